"""Free-probability calculus and random-matrix simulators for polynomials
in Haar unitary matrices.

Subpackages/modules:

- polyalg   : non-commutative *-polynomial algebra with free-difference
              quotients, cyclic derivatives and matrix evaluation
- exprparse : text grammar for polynomials (CLI surface syntax)
- rmt       : finite-N random matrix kernels (Haar sampling, unitary
              Brownian motion, eigensolving, distances)
- freelimit : exact traces of words in free Haar unitaries mixed with
              deterministic matrices; limit norms and smooth functionals
- fubm      : spectral density of the free unitary Brownian motion
- experiments / cli : seeded Monte Carlo experiment harness
"""

from . import polyalg, exprparse, rmt, freelimit, fubm

__version__ = "0.1.0"

__all__ = ["polyalg", "exprparse", "rmt", "freelimit", "fubm", "__version__"]
