import math

EPS0 = 8.8541878128e-12  # F/m
MU0 = 4e-7 * math.pi  # H/m
