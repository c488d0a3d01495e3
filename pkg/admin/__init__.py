# Réglages, stockage MongoDB et ligne de commande du laboratoire
