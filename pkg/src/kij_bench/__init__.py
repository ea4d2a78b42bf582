"""PPR78 phase-behaviour engine and k_CO2-CH4 calibration workbench."""

__version__ = "0.1.0"
