"""Inspector/executor optimization of irregular A[B[i]] reads on a simulated PGAS machine."""

__version__ = "0.1.0"
