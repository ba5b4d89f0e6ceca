"""selmerforge: 2-descent computations and rank-1 twist certificates for
elliptic curves over Q with full rational 2-torsion."""

__version__ = "0.1.0"
