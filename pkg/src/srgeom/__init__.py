"""Exact-arithmetic sheaf theory on subset posets, Cohen-Macaulay criteria
for simplicial complexes, and the squarefree correspondence with monomial
schemes."""

from .rings import GF, QQ, ZZ, CoefficientRing, FgModule

__all__ = ["GF", "QQ", "ZZ", "CoefficientRing", "FgModule"]
__version__ = "0.1.0"
