"""Rotating-frame Hamiltonians and their symmetries.

Phase points live in T*R^2 and are stored as arrays z = (q1, q2, p1, p2).
Three problems share one interface:

* the planar circular restricted three-body problem (PCRTBP) with the two
  primaries fixed on the q1-axis of the rotating frame,
* the rotating Kepler problem (the mu = 0 limit, single primary at the
  origin),
* Hill's lunar problem (single primary at the origin plus the quadratic
  tidal terms).

The rotating term is q2*p1 - q1*p2 throughout, so the frame rotates
counterclockwise with unit angular velocity and the Hamilton equations read
q1' = p1 + q2, q2' = p2 - q1.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage
from scipy.optimize import brentq

from .errors import CollisionError, DomainError, NumericalError, UnsupportedInvolutionError

__all__ = [
    "ProblemKind",
    "Problem",
    "hamiltonian",
    "hamiltonian_vector_field",
    "involution",
    "LagrangePointSet",
    "lagrange_points",
    "hill_lunar_critical_energy",
    "effective_potential",
    "HillRegionGrid",
    "hill_region",
    "export_hill_region_csv",
]

_COLLISION_RADIUS = 1e-12


class ProblemKind(Enum):
    PCRTBP = "pcrtbp"
    HILL_LUNAR = "hill_lunar"
    ROTATING_KEPLER = "rotating_kepler"


@dataclass(frozen=True)
class Problem:
    """A rotating-frame problem: kind plus mass ratio.

    mu is the normalized mass of the moon.  It must lie in (0, 1) for the
    PCRTBP; mu = 0 is admitted only for the rotating Kepler problem, and
    Hill's problem carries no mass parameter (the primary has unit mass).
    """

    kind: ProblemKind
    mu: float = 0.0

    def __post_init__(self):
        if self.kind is ProblemKind.PCRTBP:
            if not 0.0 < self.mu < 1.0:
                raise DomainError(f"PCRTBP requires 0 < mu < 1, got {self.mu}")
        elif self.kind is ProblemKind.ROTATING_KEPLER:
            if self.mu != 0.0:
                raise DomainError("rotating Kepler is the mu = 0 problem")
        else:
            if self.mu != 0.0:
                raise DomainError("Hill's problem carries no mass ratio")

    @staticmethod
    def pcrtbp(mu: float) -> "Problem":
        return Problem(ProblemKind.PCRTBP, float(mu))

    @staticmethod
    def rotating_kepler() -> "Problem":
        return Problem(ProblemKind.ROTATING_KEPLER, 0.0)

    @staticmethod
    def hill_lunar() -> "Problem":
        return Problem(ProblemKind.HILL_LUNAR, 0.0)

    @property
    def q_earth(self) -> np.ndarray:
        """Heavy primary.  At the origin for the single-primary problems."""
        if self.kind is ProblemKind.HILL_LUNAR:
            return np.zeros(2)
        return np.array([self.mu, 0.0])

    @property
    def q_moon(self) -> np.ndarray:
        if self.kind is ProblemKind.HILL_LUNAR:
            raise DomainError("Hill's problem has a single primary")
        return np.array([self.mu - 1.0, 0.0])

    def primaries(self) -> dict:
        """Positions of the gravitating bodies with positive mass."""
        if self.kind is ProblemKind.HILL_LUNAR:
            return {"primary": np.zeros(2)}
        out = {"earth": self.q_earth}
        if self.kind is ProblemKind.PCRTBP:
            out["moon"] = self.q_moon
        return out


def _check_not_on_primary(problem: Problem, q1, q2):
    for name, pos in problem.primaries().items():
        if math.hypot(q1 - pos[0], q2 - pos[1]) < _COLLISION_RADIUS:
            raise CollisionError(name)


def hamiltonian(problem: Problem, z) -> float:
    """Rotating-frame energy of the phase point z = (q1, q2, p1, p2)."""
    q1, q2, p1, p2 = np.asarray(z, dtype=float)
    _check_not_on_primary(problem, q1, q2)
    h = 0.5 * (p1 * p1 + p2 * p2) + q2 * p1 - q1 * p2
    if problem.kind is ProblemKind.HILL_LUNAR:
        h -= 1.0 / math.hypot(q1, q2)
        h += -q1 * q1 + 0.5 * q2 * q2
    else:
        mu = problem.mu
        h -= (1.0 - mu) / math.hypot(q1 - mu, q2)
        if mu > 0.0:
            h -= mu / math.hypot(q1 - mu + 1.0, q2)
    return h


def _grav_gradient(problem: Problem, q1, q2):
    """Gradient of the potential part -sum m_i/|q - q_i| (no rotating terms)."""
    gx = 0.0
    gy = 0.0
    if problem.kind is ProblemKind.HILL_LUNAR:
        r3 = math.hypot(q1, q2) ** 3
        gx += q1 / r3
        gy += q2 / r3
    else:
        mu = problem.mu
        re3 = math.hypot(q1 - mu, q2) ** 3
        gx += (1.0 - mu) * (q1 - mu) / re3
        gy += (1.0 - mu) * q2 / re3
        if mu > 0.0:
            rm3 = math.hypot(q1 - mu + 1.0, q2) ** 3
            gx += mu * (q1 - mu + 1.0) / rm3
            gy += mu * q2 / rm3
    return gx, gy


def hamiltonian_vector_field(problem: Problem, z) -> np.ndarray:
    """X_H = (dH/dp, -dH/dq), with analytic derivatives."""
    q1, q2, p1, p2 = np.asarray(z, dtype=float)
    _check_not_on_primary(problem, q1, q2)
    gx, gy = _grav_gradient(problem, q1, q2)
    dh_q1 = gx - p2
    dh_q2 = gy + p1
    if problem.kind is ProblemKind.HILL_LUNAR:
        dh_q1 += -2.0 * q1
        dh_q2 += q2
    return np.array([p1 + q2, p2 - q1, -dh_q1, -dh_q2])


_R_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])
_RPRIME_SIGNS = np.array([-1.0, 1.0, 1.0, -1.0])


def involution(problem: Problem, which: str, z) -> np.ndarray:
    """Apply an anti-symplectic involution of the problem to z.

    "R" reflects about the line of masses and is a symmetry of every kind;
    "Rprime" reflects about the orthogonal axis and only Hill's problem
    admits it.
    """
    z = np.asarray(z, dtype=float)
    if which == "R":
        return _R_SIGNS * z
    if which == "Rprime":
        if problem.kind is not ProblemKind.HILL_LUNAR:
            raise UnsupportedInvolutionError(
                "Rprime is a symmetry of Hill's problem only"
            )
        return _RPRIME_SIGNS * z
    raise UnsupportedInvolutionError(f"unknown involution {which!r}")


# ----------------------------------------------------------------------
# Lagrange points


@dataclass(frozen=True)
class LagrangePointSet:
    """The five equilibria of the PCRTBP with their rotating-frame energies.

    L1 sits between the primaries, L2 and L3 are the exterior collinear
    points ordered by energy, L4/L5 are the equilateral points.  The
    energies satisfy H(L1) < H(L2) <= H(L3) < H(L4) = H(L5).
    """

    mu: float
    points: dict
    energies: dict

    def __getitem__(self, label: str) -> np.ndarray:
        return self.points[label]

    def energy(self, label: str) -> float:
        return self.energies[label]

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "points": {k: list(map(float, v)) for k, v in self.points.items()},
            "energies": {k: float(v) for k, v in self.energies.items()},
        }


def _collinear_equation(problem: Problem, x: float) -> float:
    gx, _ = _grav_gradient(problem, x, 0.0)
    return gx - x


def _collinear_equation_prime(problem: Problem, x: float) -> float:
    # d/dx [ m*(x-a)/|x-a|^3 ] = -2m/|x-a|^3 on the axis
    mu = problem.mu
    d_e = x - mu
    d_m = x - mu + 1.0
    return -1.0 - 2.0 * (1.0 - mu) / abs(d_e) ** 3 - 2.0 * mu / abs(d_m) ** 3


def _bracketed_root(f, lo: float, hi: float) -> float:
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0.0:
        raise NumericalError(
            f"collinear point bracketing failed on [{lo:.6g}, {hi:.6g}]: "
            f"f(lo)={flo:.3g}, f(hi)={fhi:.3g}"
        )
    return brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16)


def lagrange_points(mu: float) -> LagrangePointSet:
    """Locate L1..L5 for the PCRTBP with mass ratio mu in (0, 1)."""
    problem = Problem.pcrtbp(mu)
    q1_e = mu
    q1_m = mu - 1.0
    f = lambda x: _collinear_equation(problem, x)
    eps = 1e-9

    # Inner point between the primaries, exterior points behind each.
    x_inner = _bracketed_root(f, q1_m + eps, q1_e - eps)
    x_behind_moon = _bracketed_root(f, q1_m - 2.0, q1_m - eps)
    x_behind_earth = _bracketed_root(f, q1_e + eps, q1_e + 2.0)

    # Newton polish on top of the bisection bracket.
    for _ in range(3):
        d = _collinear_equation_prime(problem, x_inner)
        x_inner -= f(x_inner) / d
    collinear = {
        "inner": x_inner,
        "behind_moon": x_behind_moon,
        "behind_earth": x_behind_earth,
    }

    def energy_at(q1, q2):
        # Equilibrium momentum in the rotating frame is p = (-q2, q1).
        return hamiltonian(problem, (q1, q2, -q2, q1))

    points = {"L1": np.array([collinear["inner"], 0.0])}
    exterior = sorted(
        [collinear["behind_moon"], collinear["behind_earth"]],
        key=lambda x: energy_at(x, 0.0),
    )
    points["L2"] = np.array([exterior[0], 0.0])
    points["L3"] = np.array([exterior[1], 0.0])
    points["L4"] = np.array([mu - 0.5, math.sqrt(3.0) / 2.0])
    points["L5"] = np.array([mu - 0.5, -math.sqrt(3.0) / 2.0])

    energies = {k: energy_at(v[0], v[1]) for k, v in points.items()}
    return LagrangePointSet(mu=mu, points=points, energies=energies)


def hill_lunar_critical_energy() -> float:
    """Energy of the two critical points (+-3**(-1/3), 0) of Hill's problem."""
    return -0.5 * 3.0 ** (4.0 / 3.0)


# ----------------------------------------------------------------------
# Effective potential and Hill's regions


def effective_potential(problem: Problem, q) -> float:
    """Position-space function U with U(q) <= c iff motion at energy c allows q."""
    q1, q2 = float(q[0]), float(q[1])
    _check_not_on_primary(problem, q1, q2)
    u = -0.5 * (q1 * q1 + q2 * q2)
    if problem.kind is ProblemKind.HILL_LUNAR:
        u += -1.0 / math.hypot(q1, q2) - q1 * q1 + 0.5 * q2 * q2
    else:
        mu = problem.mu
        u -= (1.0 - mu) / math.hypot(q1 - mu, q2)
        if mu > 0.0:
            u -= mu / math.hypot(q1 - mu + 1.0, q2)
    return u


@dataclass
class HillRegionGrid:
    """Gridded Hill region at energy c.

    component_of maps each grid cell to a label: 0 outside, positive ints
    for connected inside components.  component_kinds tags each positive
    label as "earth", "moon", "primary" or "unbounded".
    """

    problem: Problem
    c: float
    q1: np.ndarray
    q2: np.ndarray
    u: np.ndarray
    inside: np.ndarray
    singular: np.ndarray
    component_of: np.ndarray
    component_kinds: dict

    @property
    def bounded_component_count(self) -> int:
        return sum(1 for k in self.component_kinds.values() if k != "unbounded")

    def component_label_for(self, name: str):
        for label, kind in self.component_kinds.items():
            if kind == name:
                return label
        return None

    def contains(self, q, component: str) -> bool:
        """Whether position q falls in the named component (nearest cell)."""
        label = self.component_label_for(component)
        if label is None:
            return False
        i = int(np.clip(np.searchsorted(self.q1, q[0]), 0, len(self.q1) - 1))
        j = int(np.clip(np.searchsorted(self.q2, q[1]), 0, len(self.q2) - 1))
        return self.component_of[i, j] == label

    def metadata(self) -> dict:
        return {
            "kind": self.problem.kind.value,
            "mu": self.problem.mu,
            "c": self.c,
            "shape": list(self.u.shape),
            "q1_range": [float(self.q1[0]), float(self.q1[-1])],
            "q2_range": [float(self.q2[0]), float(self.q2[-1])],
            "components": {str(k): v for k, v in self.component_kinds.items()},
        }


def hill_region(problem: Problem, c: float, n: int = 512, window: float | None = None) -> HillRegionGrid:
    """Evaluate the Hill region on an n x n grid.

    The window is the half-width of the square around the barycenter;
    it defaults to 1.5 times the primary separation (1.5 for the PCRTBP).
    """
    if window is None:
        window = 1.5
    q1 = np.linspace(-window, window, n)
    q2 = np.linspace(-window, window, n)
    Q1, Q2 = np.meshgrid(q1, q2, indexing="ij")

    u = -0.5 * (Q1**2 + Q2**2)
    singular = np.zeros_like(Q1, dtype=bool)
    cell = 2.0 * window / (n - 1)
    for name, pos in problem.primaries().items():
        r = np.hypot(Q1 - pos[0], Q2 - pos[1])
        sing = r < 0.5 * cell
        singular |= sing
        r = np.where(sing, np.nan, r)
        mass = {"earth": 1.0 - problem.mu, "moon": problem.mu, "primary": 1.0}[name]
        with np.errstate(invalid="ignore"):
            u -= mass / r
    if problem.kind is ProblemKind.HILL_LUNAR:
        u += -(Q1**2) + 0.5 * Q2**2

    with np.errstate(invalid="ignore"):
        inside = u <= c
    inside |= singular  # singular cells flagged, counted with their primary's well

    labels, nlab = ndimage.label(inside)
    kinds = {}
    for lab in range(1, nlab + 1):
        mask = labels == lab
        kind = None
        for name, pos in problem.primaries().items():
            i = int(np.clip(np.searchsorted(q1, pos[0]), 0, n - 1))
            j = int(np.clip(np.searchsorted(q2, pos[1]), 0, n - 1))
            if mask[i, j]:
                kind = name
                break
        if kind is None:
            touches_edge = mask[0, :].any() or mask[-1, :].any() or mask[:, 0].any() or mask[:, -1].any()
            kind = "unbounded" if touches_edge else "island"
        kinds[lab] = kind

    return HillRegionGrid(
        problem=problem,
        c=c,
        q1=q1,
        q2=q2,
        u=u,
        inside=inside,
        singular=singular,
        component_of=labels,
        component_kinds=kinds,
    )


def export_hill_region_csv(grid: HillRegionGrid, csv_path, json_path=None):
    """Write the grid as CSV rows (q1, q2, U, inside, component) plus metadata."""
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q1", "q2", "U", "inside", "component"])
        for i, x in enumerate(grid.q1):
            for j, y in enumerate(grid.q2):
                uval = grid.u[i, j]
                writer.writerow(
                    [
                        f"{x:.12g}",
                        f"{y:.12g}",
                        "nan" if not np.isfinite(uval) else f"{uval:.12g}",
                        int(grid.inside[i, j]),
                        int(grid.component_of[i, j]),
                    ]
                )
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(grid.metadata(), fh, indent=2)
