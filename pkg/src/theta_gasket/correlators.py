"""Closed-form two-point functions of the marked disk.

Each value is ``cr_prefactor * theta_factor`` where the prefactor is
``CR(z1)^(-1/8) CR(z2)^(-1/8)`` and the theta factor depends on the pair only
through its nome. Every family carries one unknown absolute constant; the
``unit`` field names it and all numeric ratios between families that share a
unit are kept in ``theta_factor``.

Units
-----
``"twist"``
    the twist-field constant.
``"base"``
    the constant K multiplying each fixed-boundary twist term; the
    pre-resummation series and the m-th gasket are expressed in it.
``"nest"``
    K / sqrt(2 pi), shared by the nested, odd and even families.
``"simple"``
    K / (2 sqrt(pi)).
``"ising"``
    the spin constant.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .geometry import MarkedDomain, excursion_mass
from .special import ConvergenceError, DomainError, NomePair, theta2_log, theta3_log, theta4_log
from .walks import coefficient

__all__ = [
    "Family",
    "CorrelatorValue",
    "twist_two_point",
    "twist_with_boundary",
    "nested",
    "odd_gaskets",
    "even_gaskets",
    "simple_gasket",
    "ising",
    "chi_ising_ratio",
    "at_line",
    "mth_gasket",
    "series_route",
    "closed_form_in_base_units",
    "evaluate",
]

SQRT_2PI = math.sqrt(2.0 * math.pi)


class Family(str, enum.Enum):
    TWIST = "twist"
    TWIST_BOUNDARY = "twist_boundary"
    NESTED = "nested"
    ODD = "odd"
    EVEN = "even"
    SIMPLE = "simple"
    MTH_GASKET = "mth_gasket"
    ISING = "ising"
    AT_LINE = "at_line"


@dataclass(frozen=True)
class CorrelatorValue:
    family: Family
    cr_prefactor: float
    theta_factor: float
    unit: str
    params: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.cr_prefactor * self.theta_factor


def _prefactor(md: MarkedDomain) -> float:
    c1, c2 = md.conformal_radii
    return (c1 * c2) ** -0.125


def _power(nome: NomePair, c: float) -> float:
    """log(q^c); the theta functions below take log-nomes."""
    return c * nome.log_q


def _twist_denominator(nome: NomePair) -> float:
    return theta2_log(_power(nome, 0.25)) * math.sqrt(-nome.log_q)


def _make(family, md, theta_factor, unit, **params) -> CorrelatorValue:
    return CorrelatorValue(family, _prefactor(md), theta_factor, unit, dict(params))


def twist_two_point(md: MarkedDomain) -> CorrelatorValue:
    return _make(Family.TWIST, md, 1.0 / _twist_denominator(md.nome), "twist")


def twist_with_boundary(md: MarkedDomain, v: float) -> CorrelatorValue:
    """Twist correlator with constant boundary value v: extra factor exp(-v^2 M)."""
    v = float(v)
    base = 1.0 / _twist_denominator(md.nome)
    return _make(Family.TWIST_BOUNDARY, md, base * math.exp(-v * v * excursion_mass(md)), "twist", v=v)


def _nested_factor(nome: NomePair) -> float:
    return theta3_log(_power(nome, 0.5)) / theta2_log(_power(nome, 0.25))


def nested(md: MarkedDomain) -> CorrelatorValue:
    return _make(Family.NESTED, md, _nested_factor(md.nome), "nest")


def odd_gaskets(md: MarkedDomain) -> CorrelatorValue:
    n = md.nome
    return _make(Family.ODD, md, 0.5 * theta3_log(_power(n, 0.125)) / theta2_log(_power(n, 0.25)), "nest")


def even_gaskets(md: MarkedDomain) -> CorrelatorValue:
    n = md.nome
    return _make(Family.EVEN, md, 0.5 * theta4_log(_power(n, 0.125)) / theta2_log(_power(n, 0.25)), "nest")


def _ising_ratio(nome: NomePair) -> float:
    x = _power(nome, 0.25)
    return theta3_log(x) / theta2_log(x)


def simple_gasket(md: MarkedDomain) -> CorrelatorValue:
    return _make(Family.SIMPLE, md, math.sqrt(_ising_ratio(md.nome)), "simple")


def ising(md: MarkedDomain) -> CorrelatorValue:
    return _make(Family.ISING, md, _ising_ratio(md.nome), "ising")


def chi_ising_ratio(green: float) -> float:
    """2^(-1/2) sqrt(exp(pi G) + exp(-pi G)), the spin ratio written through G."""
    return math.sqrt(math.cosh(math.pi * green))


def _check_g(g: float) -> float:
    g = float(g)
    if not g > 1.0:
        raise DomainError(f"the coupling g must exceed 1, got {g!r}")
    return g


def at_line(md: MarkedDomain, g: float) -> CorrelatorValue:
    """Two-point function on the critical line with coupling g, in base units."""
    g = _check_g(g)
    n = md.nome
    factor = theta3_log(_power(n, 0.5 / g)) / (math.sqrt(2.0 * g * math.pi) * theta2_log(_power(n, 0.25)))
    return _make(Family.AT_LINE, md, factor, "base", g=g)


def _truncation_index(m1: int, log_qh: float, tol: float, n_cap: int) -> int:
    """Smallest N >= m1 past which the m-th gasket series tail is below tol/10."""
    growth = 2.0 ** max(m1, 0) * 4.0 ** max(m1, 0)
    for N in range(max(m1, 1), n_cap + 1):
        term = growth * (1.0 + N ** max(m1, 1)) * math.exp(2.0 * N * N * log_qh)
        # the tail after N is dominated by a geometric series once the ratio is below 1/2
        ratio = math.exp(2.0 * (2 * N + 1) * log_qh) * ((N + 1) / N) ** max(m1, 1)
        if term < tol / 10.0 and ratio < 0.5:
            return N
    raise ConvergenceError(
        f"m-th gasket series needs more than {n_cap} terms at log q_hat = {log_qh:.6g} for tol {tol:g}"
    )


def _log_q_hat(nome: NomePair) -> float:
    return math.pi ** 2 / nome.log_q


def _mth_sum(m1: int, log_qh: float, N: int) -> float:
    terms = []
    for n in range(-N, N + 1):
        a = coefficient(m1, n)
        if a:
            terms.append(a * math.exp(2.0 * n * n * log_qh))
    return math.fsum(terms)


def mth_gasket(md: MarkedDomain, m: int, tol: float = 1e-14, n_cap: int = 10_000) -> CorrelatorValue:
    """Points lying in the same m-th nested gasket, in base units.

    The numerator sum_n a[m-1, n] q_hat^(2 n^2) is truncated at the first
    N whose remaining terms are bounded by tol/10.
    """
    m = int(m)
    if m < 2:
        raise DomainError("m must be at least 2")
    nome = md.nome
    log_qh = _log_q_hat(nome)
    N = _truncation_index(m - 1, log_qh, tol, n_cap)
    series = _mth_sum(m - 1, log_qh, N)
    return _make(Family.MTH_GASKET, md, series / _twist_denominator(nome), "base", m=m, n_terms=N)


_SERIES_FAMILIES = {Family.NESTED, Family.ODD, Family.EVEN, Family.SIMPLE, Family.AT_LINE}


def series_route(family, md: MarkedDomain, g: float | None = None, tol: float = 1e-17) -> float:
    """The fixed-boundary twist series before Poisson resummation, in base units.

    sum_n w_n q_hat^(c n^2) / (theta2(q^(1/4)) sqrt|log q|) with
    nested: w = 1 on Z; odd: 1 on 2Z; even: 1 on 2Z+1;
    simple: (-1)^(n/2) on 2Z; at_line: 1 on Z with c = 2g (else c = 2).
    """
    family = Family(family)
    if family not in _SERIES_FAMILIES:
        raise DomainError(f"no series route for {family.value}")
    nome = md.nome
    c = 2.0
    if family is Family.AT_LINE:
        if g is None:
            raise DomainError("at_line needs g")
        c = 2.0 * _check_g(g)
    log_qh = _log_q_hat(nome)
    terms = [1.0 if family in (Family.NESTED, Family.ODD, Family.SIMPLE, Family.AT_LINE) else 0.0]
    n = 1
    while True:
        t = math.exp(c * n * n * log_qh)
        if family in (Family.NESTED, Family.AT_LINE):
            w = 1.0
        elif family is Family.ODD:
            w = 1.0 if n % 2 == 0 else 0.0
        elif family is Family.EVEN:
            w = 1.0 if n % 2 else 0.0
        else:
            w = 0.0 if n % 2 else (1.0 if (n // 2) % 2 == 0 else -1.0)
        terms.append(2.0 * w * t)
        if t < tol and n >= 3:
            break
        n += 1
    return math.fsum(terms) / _twist_denominator(nome)


def closed_form_in_base_units(family, md: MarkedDomain, g: float | None = None) -> float:
    """Closed form of ``family`` expressed in base units, for comparison with series_route."""
    family = Family(family)
    if family is Family.NESTED:
        return nested(md).theta_factor / SQRT_2PI
    if family is Family.ODD:
        return odd_gaskets(md).theta_factor / SQRT_2PI
    if family is Family.EVEN:
        return even_gaskets(md).theta_factor / SQRT_2PI
    if family is Family.SIMPLE:
        return simple_gasket(md).theta_factor / (2.0 * math.sqrt(math.pi))
    if family is Family.AT_LINE:
        return at_line(md, g).theta_factor
    raise DomainError(f"no closed form comparison for {family.value}")


def evaluate(family, md: MarkedDomain, **params) -> CorrelatorValue:
    """Dispatch on the family name; v, g, m and tol are passed where relevant."""
    family = Family(family)
    if family is Family.TWIST:
        return twist_two_point(md)
    if family is Family.TWIST_BOUNDARY:
        return twist_with_boundary(md, params.get("v", 0.0))
    if family is Family.NESTED:
        return nested(md)
    if family is Family.ODD:
        return odd_gaskets(md)
    if family is Family.EVEN:
        return even_gaskets(md)
    if family is Family.SIMPLE:
        return simple_gasket(md)
    if family is Family.ISING:
        return ising(md)
    if family is Family.AT_LINE:
        if "g" not in params:
            raise DomainError("at_line needs g")
        return at_line(md, params["g"])
    if "m" not in params:
        raise DomainError("mth_gasket needs m")
    return mth_gasket(md, params["m"], params.get("tol", 1e-14))
