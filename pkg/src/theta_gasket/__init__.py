"""Two-point functions of CLE4 gaskets and the numerical checks behind them.

Subpackages and modules:

* ``special``      theta functions, elliptic integrals, nomes
* ``geometry``     Green's function, canonical parametrisation, excursion mass
* ``correlators``  closed-form two-point functions and their series routes
* ``walks``        random-walk resummation coefficients
* ``soup``         lattice GFF / loop-soup cluster Monte Carlo
* ``kernels``      strip, annulus and Brownian-bridge constants
"""
from .special import ConvergenceError, DomainError, EvalPolicy, NomePair

__version__ = "0.1.0"

__all__ = ["ConvergenceError", "DomainError", "EvalPolicy", "NomePair", "__version__"]
