"""Identity suites behind ``theta-gasket verify``.

Each suite returns a list of :class:`Check` rows; a suite passes when every
row does. The grids and tolerances are the ones the package is held to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import correlators as C
from . import kernels, walks
from .correlators import Family
from .geometry import MarkedDomain, nome_from_green
from .special import NomePair, complementary_nome, elliptic_K, nome_from_k, theta2, theta3

__all__ = ["Check", "Q_GRID", "SUITES", "run_suite"]

Q_GRID = [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


@dataclass(frozen=True)
class Check:
    suite: str
    check: str
    param: str
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tol)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def theta_suite(**_) -> list:
    out = []
    for q in Q_GRID:
        p = f"q={q!r}"
        t2, t3 = theta2(q), theta3(q)
        h = math.sqrt(q)
        out.append(Check("theta", "squares", p, _rel(t2 * t2 + t3 * t3, theta3(h) ** 2), 1e-12))
        out.append(Check("theta", "linear", p, _rel(t2 + t3, theta3(q ** 0.25)), 1e-12))
        out.append(Check("theta", "duplication", p, _rel(2 * t2 * t3, theta2(h) ** 2), 1e-12))
        n = NomePair.from_q(q)
        # K'(k) = K(k'); k rounds to 1 near q = 1 while k' stays accurate
        out.append(Check("theta", "kprime", p, _rel(elliptic_K(n.k_prime), -n.log_q * t3 * t3 / 2), 1e-12))
        lhs = math.sqrt(2 * math.pi) * theta3(complementary_nome(q) ** 2)
        out.append(Check("theta", "jacobi_transform", p, _rel(lhs, math.sqrt(-n.log_q) * theta3(h)), 1e-12))
    return out


def nome_suite(**_) -> list:
    out = []
    for q in Q_GRID:
        p = f"q={q!r}"
        n = NomePair.from_q(q)
        out.append(Check("nome", "k_round_trip", p, _rel(nome_from_k(min(n.k, 1.0), n.k_prime).q, q), 1e-9))
        g = MarkedDomain.from_q(q).green
        out.append(Check("nome", "green_round_trip", p, _rel(nome_from_green(g).q, q), 1e-9))
    lem = nome_from_k(2 ** -0.5)
    out.append(Check("nome", "lemniscatic_q", "k=2^-1/2", _rel(lem.q, math.exp(-math.pi)), 1e-12))
    out.append(Check("nome", "lemniscatic_q_hat", "k=2^-1/2", _rel(lem.q_hat, math.exp(-math.pi)), 1e-12))
    return out


def correlator_suite(**_) -> list:
    out = []
    for q in Q_GRID:
        p = f"q={q!r}"
        md = MarkedDomain.from_q(q)
        nest = C.nested(md).theta_factor
        odd_even = C.odd_gaskets(md).theta_factor + C.even_gaskets(md).theta_factor
        out.append(Check("correlators", "odd_plus_even", p, _rel(odd_even, nest), 1e-9))
        out.append(Check("correlators", "nested_green", p,
                         _rel(nest, 2 ** -0.5 * math.exp(math.pi * md.green / 2)), 1e-9))
        ising = C.ising(md).theta_factor
        out.append(Check("correlators", "ising_simple_squared", p,
                         _rel(ising, C.simple_gasket(md).theta_factor ** 2), 1e-9))
        chi = 2 ** -0.5 * math.sqrt(math.exp(math.pi * md.green) + math.exp(-math.pi * md.green))
        out.append(Check("correlators", "chi_cross_check", p, _rel(ising, chi), 1e-9))
        at2 = C.at_line(md, 2.0).theta_factor * math.sqrt(4 * math.pi)
        out.append(Check("correlators", "at_line_g2_ising", p, _rel(at2, ising), 1e-9))
        for fam in (Family.NESTED, Family.ODD, Family.EVEN, Family.SIMPLE):
            err = _rel(C.series_route(fam, md), C.closed_form_in_base_units(fam, md))
            out.append(Check("correlators", f"series_{fam.value}", p, err, 1e-9))
        err = _rel(C.series_route(Family.AT_LINE, md, g=3.0), C.at_line(md, 3.0).theta_factor)
        out.append(Check("correlators", "series_at_line", p, err, 1e-9))
    return out


def walk_suite(**_) -> list:
    out = []
    for m in range(6):
        rep = walks.verify_delta(m, 30, 30)
        out.append(Check("walks", "delta_exact", f"m={m}", float(len(rep.failures)), 0.0))
    for p in (0.3, 1 - 2 ** -0.5, 1.0):
        for m in range(11):
            err = abs(walks.lazy_resummation(p, m, m) - 1.0)
            out.append(Check("walks", "lazy_resummation", f"p={p!r};m={m}", err, 1e-12))
    for n in range(6):
        rep = walks.generating_check(n)
        err = rep.max_value_error if not rep.coefficient_mismatches else math.inf
        out.append(Check("walks", "generating", f"n={n}", err, 1e-10))
    return out


def strip_suite(**_) -> list:
    rep = kernels.strip_asymptotics()
    out = [
        Check("strip", "extrapolated_vs_reference", "delta=1e-6",
              abs(rep.fitted_constant - kernels.strip_constant()), 1e-3),
        Check("strip", "extrapolated_vs_limit", "delta=1e-6",
              abs(rep.fitted_constant - kernels.strip_limit()), 1e-3),
        Check("strip", "wallis", "N=1000000",
              abs(kernels.wallis_partial_sum(10 ** 6) - math.log(math.pi / 2)), 2e-6),
        Check("strip", "annulus_expansion", "eps=1e-6",
              abs(kernels.annulus_mass(1e-6) - kernels.annulus_expansion(1e-6)), 5e-3),
    ]
    return out


def identity_suite(samples: int = 20_000, seed: int = 0, threads: int = 1, meshes=(8, 12), **_) -> list:
    from .soup import build_disk_lattice, defects_from_punctures, verify_topological_identity

    out = []
    cases = [([0j], 0.0), ([-0.3, 0.3], 0.0), ([-0.3, 0.3], 1.0)]
    for m in meshes:
        model = build_disk_lattice(m)
        for k, (pts, v) in enumerate(cases):
            rep = verify_topological_identity(model, defects_from_punctures(model, pts), v, samples,
                                              seed=seed + 97 * m + k, threads=threads)
            param = f"mesh={m};punctures={len(pts)};v={v!r}"
            out.append(Check("identity", "z_score", param, abs(rep.z_score), 4.0))
    return out


SUITES = {
    "theta": theta_suite,
    "nome": nome_suite,
    "correlators": correlator_suite,
    "walks": walk_suite,
    "strip": strip_suite,
    "identity": identity_suite,
}


def run_suite(name: str, **params) -> list:
    if name == "all":
        return [c for key in SUITES for c in SUITES[key](**params)]
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}") from None
    return fn(**params)
