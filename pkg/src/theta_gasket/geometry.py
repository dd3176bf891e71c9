"""Conformal data of two marked points in the unit disk.

The Dirichlet Green's function is normalised as ``G(z, w) ~ -(1/2pi) log|z - w|``.
A pair of points is mapped conformally to ``(-r, r)``; the number ``r`` fixes
the elliptic modulus ``k = r^2`` and hence a nome ``q`` with
``exp(pi G) = theta3(q^(1/2)) / theta2(q^(1/2))``.
"""
from __future__ import annotations

import cmath
import math

from .special import (
    ConvergenceError,
    DomainError,
    NomePair,
    elliptic_K_from_complement,
    elliptic_Kprime,
    nome_from_k,
    theta2,
    theta3,
    theta34_gap_log,
    theta4_log,
)

__all__ = [
    "MarkedDomain",
    "green_disk",
    "conformal_radius_disk",
    "disk_automorphism",
    "canonical_r",
    "r_from_green",
    "green_from_r",
    "nome_from_green",
    "excursion_mass",
    "cover_radius",
    "cone_factor",
    "extremal_distance_annulus",
]

TWO_PI = 2.0 * math.pi
_MIN_SEPARATION = 1e-12


def _check_interior(z: complex, name: str) -> complex:
    z = complex(z)
    if not abs(z) < 1.0:
        raise DomainError(f"{name} = {z} is not in the open unit disk")
    return z


def green_disk(z: complex, w: complex) -> float:
    """Zero-boundary Green's function of the unit disk."""
    z = _check_interior(z, "z")
    w = _check_interior(w, "w")
    d = abs(z - w)
    if d < _MIN_SEPARATION:
        raise DomainError("Green's function needs distinct points")
    return math.log(abs(1.0 - z * w.conjugate()) / d) / TWO_PI


def conformal_radius_disk(z: complex) -> float:
    z = _check_interior(z, "z")
    return 1.0 - abs(z) ** 2


def disk_automorphism(z: complex, a: complex, angle: float = 0.0) -> complex:
    """The Moebius map z -> e^{i angle} (z - a) / (1 - conj(a) z)."""
    a = _check_interior(a, "a")
    return cmath.exp(1j * angle) * (z - a) / (1.0 - a.conjugate() * z)


def _r_parts(g: float) -> tuple[float, float]:
    """(r, 1 - r) for the canonical r with exp(2 pi g) = (1 + r^2)/(2r).

    Works through x = exp(2 pi g) - 1 so neither small g (r near 1) nor large
    g (r near 0) loses digits.
    """
    x = math.expm1(TWO_PI * g)
    s = math.sqrt(x * (2.0 + x))
    r = 1.0 / (1.0 + x + s)
    return r, (x + s) / (1.0 + x + s)


def r_from_green(g: float) -> float:
    g = float(g)
    if not g > 0:
        raise DomainError(f"Green's value must be positive, got {g!r}")
    return _r_parts(g)[0]


def green_from_r(r: float) -> float:
    r = float(r)
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must lie in (0, 1), got {r!r}")
    # (1 + r^2)/(2r) = 1 + (1 - r)^2/(2r)
    return math.log1p((1.0 - r) ** 2 / (2.0 * r)) / TWO_PI


def canonical_r(z1: complex, z2: complex) -> float:
    """The r in (0, 1) such that (D, z1, z2) is conformally (D, -r, r)."""
    return r_from_green(green_disk(z1, z2))


def _nome_from_parts(r: float, one_minus_r: float) -> NomePair:
    k_prime = math.sqrt(one_minus_r * (1.0 + r) * (1.0 + r * r))
    return nome_from_k(r * r, k_prime)


def nome_from_green(g: float, check_tol: float = 1e-9) -> NomePair:
    """Nome q solving exp(pi g) = theta3(q^(1/2)) / theta2(q^(1/2))."""
    g = float(g)
    if not g > 0:
        raise DomainError(f"Green's value must be positive, got {g!r}")
    nome = _nome_from_parts(*_r_parts(g))
    half = math.exp(0.5 * nome.log_q)
    lhs = math.exp(math.pi * g)
    rhs = theta3(half) / theta2(half)
    if abs(lhs - rhs) > check_tol * lhs:
        raise ConvergenceError(
            f"nome inversion failed its consistency check (|diff|/value = {abs(lhs - rhs) / lhs:.3g})"
        )
    return nome


class MarkedDomain:
    """Two distinct marked points of the unit disk with their conformal invariants.

    Attributes ``green``, ``r_canonical``, ``nome`` and ``conformal_radii`` are
    derived once at construction. ``from_q`` builds the canonical pair
    ``(-r, r)`` of a given nome and takes the invariants from the nome itself,
    since for nomes near 1 the point ``r`` is within rounding of the circle.
    """

    __slots__ = ("z1", "z2", "green", "r_canonical", "nome", "conformal_radii")

    def __init__(self, z1: complex, z2: complex):
        z1 = _check_interior(z1, "z1")
        z2 = _check_interior(z2, "z2")
        g = green_disk(z1, z2)
        r, one_minus_r = _r_parts(g)
        self._fill(z1, z2, g, r, _nome_from_parts(r, one_minus_r),
                   (conformal_radius_disk(z1), conformal_radius_disk(z2)))

    def _fill(self, z1, z2, green, r, nome, radii):
        for name, val in zip(self.__slots__, (z1, z2, green, r, nome, radii)):
            object.__setattr__(self, name, val)

    def __setattr__(self, name, value):
        raise AttributeError("MarkedDomain is immutable")

    def __repr__(self):
        return f"MarkedDomain(z1={self.z1!r}, z2={self.z2!r}, green={self.green:.6g}, q={self.nome.q:.6g})"

    @classmethod
    def canonical(cls, r: float) -> "MarkedDomain":
        return cls(complex(-r), complex(r))

    @classmethod
    def from_q(cls, q: float) -> "MarkedDomain":
        """The canonical pair (-r, r) whose nome is exactly ``q``."""
        nome = NomePair.from_q(q)
        # exp(pi G) = theta3/theta2 at q^(1/2) = theta3/theta4 at q_hat^2
        lhat = 2.0 * math.pi ** 2 / nome.log_q
        green = math.log1p(theta34_gap_log(lhat) / theta4_log(lhat)) / math.pi
        r = math.sqrt(nome.k)
        # 1 - r^2 = 1 - k = k'^2 / (1 + k) without cancellation
        cr = nome.k_prime ** 2 / (1.0 + nome.k)
        self = object.__new__(cls)
        self._fill(complex(-r), complex(r), green, r, nome, (cr, cr))
        return self

    @classmethod
    def from_green(cls, g: float) -> "MarkedDomain":
        r, one_minus_r = _r_parts(float(g))
        nome = nome_from_green(g)
        cr = one_minus_r * (1.0 + r)
        self = object.__new__(cls)
        self._fill(complex(-r), complex(r), float(g), r, nome, (cr, cr))
        return self


def excursion_mass(md: MarkedDomain) -> float:
    """Boundary excursion mass M = 4 K(r^2) / K'(r^2) of the marked pair."""
    n = md.nome
    return 4.0 * elliptic_K_from_complement(n.k_prime) / elliptic_Kprime(n.k)


def _check_r(r: float) -> float:
    r = float(r)
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must lie in (0, 1), got {r!r}")
    return r


def cover_radius(r: float) -> float:
    """log R = pi K'(r^2) / (4 K(r^2)) for the annulus covering D minus {-r, r}."""
    r = _check_r(r)
    k_prime = math.sqrt((1.0 - r * r) * (1.0 + r * r))
    return math.pi * elliptic_Kprime(r * r) / (4.0 * elliptic_K_from_complement(k_prime))


def cone_factor(r: float) -> float:
    """Leading constant pi^2 / (8 K(r^2)^2 r (1 - r^4))."""
    r = _check_r(r)
    k_prime = math.sqrt((1.0 - r * r) * (1.0 + r * r))
    K = elliptic_K_from_complement(k_prime)
    return math.pi ** 2 / (8.0 * K * K * r * (1.0 - r ** 4))


def extremal_distance_annulus(r_in: float, r_out: float) -> float:
    """Extremal distance between the circles of a round annulus."""
    r_in, r_out = float(r_in), float(r_out)
    if not 0.0 < r_in < r_out:
        raise DomainError("need 0 < r_in < r_out")
    return math.log(r_out / r_in) / TWO_PI
