"""Certified decision of Picard-lattice membership for quartic K3 surfaces.

Modules: ``polyring`` (rational forms), ``reduction`` (Macaulay division and
pole-order reduction), ``ball`` (complex ball arithmetic), ``tower`` (numbers
stored through iterated logarithms), ``lattice`` (the rank-22 lattice),
``nl_bounds`` and ``mp_series`` (Noether-Lefschetz degree bounds),
``pipeline`` (constants and verdicts) and ``cli``.
"""

from .errors import K3SepError

__version__ = "0.1.0"

__all__ = ["K3SepError", "__version__"]
