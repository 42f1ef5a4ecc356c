"""Symmetric periodic orbits in the regularized restricted three-body problem.

The package covers the rotating-frame dynamics, the Moser regularization of
the bounded energy components onto T*S^2, a shooting solver for symmetric
periodic orbits, crossing-form index machinery (Robbin-Salamon and
Conley-Zehnder), a Levi-Civita style double cover with convexity checks, and
the graded-rank homology arithmetic used for orbit multiplicity statements.
"""

from .dynamics import Problem, ProblemKind, hamiltonian, hamiltonian_vector_field, involution, lagrange_points

__all__ = [
    "Problem",
    "ProblemKind",
    "hamiltonian",
    "hamiltonian_vector_field",
    "involution",
    "lagrange_points",
]

__version__ = "0.1.0"
