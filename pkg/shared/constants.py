import math

# Tolérances numériques
METRIC_TOLERANCE = 1e-9
PROBABILITY_TOLERANCE = 1e-12
LOAD_TOLERANCE = 1e-9
PROFILE_TOLERANCE = 1e-12
COVER_TOLERANCE = 1e-9

LP_FEASIBILITY_TOLERANCE = 1e-8
LP_PIVOT_TOLERANCE = 1e-11
LP_OPTIMALITY_TOLERANCE = 1e-10

# Capacité normalisée du véhicule
CAPACITY = 1.0

# Garantie des fournisseurs de tournée TSP
ALPHA_EXACT = 1.0
ALPHA_DOUBLE_TREE = 2.0
ALPHA_CHRISTOFIDES = 1.5

# Ordonnancement des politiques randomisées
THETA_SMALL_GAMMA = 0.5
THETA_MID_GAMMA = 0.6677
THETA_CUVRP = 0.5043
THETA_CUVRP_PARAMETRIC = 0.5

GAMMA_THETA_SWITCH = 0.375
GAMMA_APPROX1_MAX = 1.444
GAMMA_LP_CROSSOVER = 1.033
GAMMA_APPROX2_MIN = 0.1667
GAMMA_APPROX4_MAX = 0.428
GAMMA_APPROX4_PARAMETRIC_MAX = 0.285

APPROX1_LAMBDA_FACTOR = 4.0
APPROX4_LAMBDA_FACTOR = 3.5
SPLIT_LAMBDA_FACTOR = 2.0

APPROX2_LAMBDA = 1.0
APPROX2_DELTA = 1.0 / 3.0

# Bornes annoncées
RATIO_TEN_THIRDS = 10.0 / 3.0
RATIO_CUVRPSD = 3.456
RATIO_CUVRPSD_LP = 3.438
RATIO_CUVRP = 3.163
RATIO_CUVRP_PARAMETRIC_SLACK = 0.029

LN2 = math.log(2.0)

# Grille de recherche de theta
THETA_GRID_SIZE = 10000

# Valeurs symboliques
INFINITY = math.inf

# Sorties
CSV_SCHEMA_VERSION = 1
CSV_SIGNIFICANT_DIGITS = 12
