"""Level-N GL(3) Kloosterman sums, their finite Fourier transforms and the Kuznetsov geometric side."""

__version__ = "0.1.0"
