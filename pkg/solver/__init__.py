# Moteurs du laboratoire Cu-VRP
