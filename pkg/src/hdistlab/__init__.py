"""Quasi-homogeneous Fourier multipliers, defect functionals and velocity averaging on periodic grids."""

from .grid import GridSpec, PhaseSpaceField, ScalarField, SpectralField
from .symbols import Anisotropy, InvalidAnisotropy, PrincipalSymbol, SymbolOnManifold, Term
from .multipliers import MultiplierOp
from .sequences import SequenceFamily
from .defect import DefectEstimate, NoConvergence

__all__ = [
    "Anisotropy",
    "DefectEstimate",
    "GridSpec",
    "InvalidAnisotropy",
    "MultiplierOp",
    "NoConvergence",
    "PhaseSpaceField",
    "PrincipalSymbol",
    "ScalarField",
    "SequenceFamily",
    "SpectralField",
    "SymbolOnManifold",
    "Term",
]
__version__ = "0.1.0"
