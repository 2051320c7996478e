"""Physical constants (SI)."""

C_LIGHT = 299792458.0          # m/s
HBAR = 1.054572e-34            # J s
GYRO_ELECTRON = 1.760859e11    # rad/s/T, free electron
GYRO_PROTON = 2.675222e8       # rad/s/T
