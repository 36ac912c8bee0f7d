"""Learning-from-demonstration motion planning on dual quaternions."""

__version__ = "0.1.0"
