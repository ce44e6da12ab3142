"""Bivariate quantum-signal-processing toolkit for non-Hermitian propagators.

Constructs, factorizes, angle-synthesizes, optimizes, simulates, and
resource-estimates bivariate QSP circuits encoding e^{-i(H_R + iH_I)T}.
"""

from biqsp.bilaurent import BiLaurent, TorusGrid
from biqsp.matops import HamiltonianPair

__all__ = ["BiLaurent", "TorusGrid", "HamiltonianPair"]

__version__ = "0.1.0"
