"""diqkd-lab — device-independent QKD key rates, attacks, proof checks and simulation."""

__version__ = "0.1.0"
