"""Physical constants (SI)."""

GAS_CONSTANT = 8.31446261815324      # J/(mol K)
STEFAN_BOLTZMANN = 5.670374419e-8    # W/(m^2 K^4)
T_STANDARD = 298.15                  # K, reference for formation enthalpies
P_STANDARD = 101325.0                # Pa
