"""Krylov decompositions of operator dynamics in unitary brickwork circuits."""
from .io import __version__
from .krylov import (KrylovDecomposition, MomentSequence, autocorrelation_ed, classify_regime,
                     krylov_complexity, krylov_explicit, krylov_from_moments)

__all__ = ["__version__", "KrylovDecomposition", "MomentSequence", "autocorrelation_ed",
           "classify_regime", "krylov_complexity", "krylov_explicit", "krylov_from_moments"]
