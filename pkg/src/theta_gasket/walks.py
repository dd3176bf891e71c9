"""Random-walk resummation coefficients and their exact verification.

The coefficients ``a[m, n]`` weight a simple random walk started at ``n`` so
that the weighted chance of sitting at 0 after ``k`` steps is exactly
``1 if k == m else 0``:

    sum_n a[m, n] * P_n(S_k = 0) = delta(k, m).

Everything that feeds a delta check is done in integers or ``Fraction``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "WalkCoefficients",
    "coefficient",
    "coefficients",
    "walk_return_prob",
    "DeltaReport",
    "verify_delta",
    "lazy_step_distribution",
    "lazy_resummation",
    "GeneratingReport",
    "generating_series",
    "generating_function",
    "generating_check",
]


def coefficient(m: int, n: int) -> int:
    """a[m, n] as an exact integer (zero off the support)."""
    m, n = int(m), abs(int(n))
    if m < 0:
        raise ValueError("m must be non-negative")
    if n < m or (n - m) % 2:
        return 0
    j = (n - m) // 2
    if m == 0:
        return -1 if j % 2 else 1
    sign = -1 if j % 2 else 1
    tail = math.comb(m + j - 1, j - 1) if j >= 1 else 0
    return sign * 2 ** (m - 1) * (math.comb(m + j, j) + tail)


@dataclass(frozen=True)
class WalkCoefficients:
    """Table n -> a[m, n] for |n| <= n_max."""

    m: int
    n_max: int
    table: dict = field(repr=False)

    def __getitem__(self, n: int) -> int:
        if abs(n) > self.n_max:
            raise KeyError(n)
        return self.table[n]

    def items(self):
        return sorted(self.table.items())

    def growth_constant(self) -> float:
        """Smallest c with |a[m, n]| <= c (1 + |n|^m) over the table."""
        return max(abs(a) / (1.0 + abs(n) ** self.m) for n, a in self.table.items())


def coefficients(m: int, n_max: int) -> WalkCoefficients:
    m, n_max = int(m), int(n_max)
    if m < 0:
        raise ValueError("m must be non-negative")
    if n_max < m:
        raise ValueError("n_max must be at least m")
    table = {n: coefficient(m, n) for n in range(-n_max, n_max + 1)}
    return WalkCoefficients(m=m, n_max=n_max, table=table)


def walk_return_prob(n: int, k: int) -> Fraction:
    """P(S_k = 0 | S_0 = n) for the simple symmetric walk, exactly."""
    n, k = abs(int(n)), int(k)
    if k < 0:
        raise ValueError("k must be non-negative")
    if n > k or (n + k) % 2:
        return Fraction(0)
    return Fraction(math.comb(k, (k + n) // 2), 2 ** k)


@dataclass(frozen=True)
class DeltaReport:
    m: int
    k_max: int
    n_max: int
    values: dict
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_delta(m: int, k_max: int, n_max: int) -> DeltaReport:
    """Check sum_{|n| <= k} a[m, n] P_n(S_k = 0) = delta(k, m) for k <= k_max."""
    if not n_max >= k_max >= m >= 0:
        raise ValueError("need n_max >= k_max >= m >= 0")
    coeffs = coefficients(m, n_max)
    values = {}
    failures = []
    for k in range(k_max + 1):
        total = sum(
            (coeffs[n] * walk_return_prob(n, k) for n in range(-k, k + 1) if coeffs[n]),
            Fraction(0),
        )
        values[k] = total
        if total != (1 if k == m else 0):
            failures.append(k)
    return DeltaReport(m=m, k_max=k_max, n_max=n_max, values=values, failures=failures)


def lazy_step_distribution(p: float) -> np.ndarray:
    """Step law on (-1, 0, 1): move with probability p, split evenly."""
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    return np.array([0.5 * p, 1.0 - p, 0.5 * p])


def lazy_resummation(p: float, m: int, n_max: int) -> float:
    """sum_{|n| <= n_max} P_n(S_m = 0) for the lazy walk.

    Starting points beyond m steps contribute nothing, so the sum is exact
    (and equals 1) as soon as n_max >= m.
    """
    step = lazy_step_distribution(p)
    dist = np.array([1.0])
    for _ in range(int(m)):
        dist = np.convolve(dist, step)
    # dist[i] = P_0(S_m = i - m) = P_{m - i}(S_m = 0) by symmetry
    offsets = np.arange(dist.size) - int(m)
    return math.fsum(dist[np.abs(offsets) <= n_max])


def _series_mul(a: list, b: list, order: int) -> list:
    out = [Fraction(0)] * (order + 1)
    for i, ai in enumerate(a):
        if ai:
            for j in range(order + 1 - i):
                out[i + j] += ai * b[j]
    return out


def generating_series(n: int, order: int) -> list:
    """Exact Taylor coefficients of g_n up to z^order.

    g_n(z) = (1 - z^2)^(-1/2) ((1 - sqrt(1 - z^2)) / z)^n, built by composing
    rational power series rather than by expanding walk counts.
    """
    n, order = int(n), int(order)
    if n < 0:
        raise ValueError("n must be non-negative")

    def binom_half(j: int, alpha: Fraction) -> Fraction:
        c = Fraction(1)
        for i in range(j):
            c = c * (alpha - i) / (i + 1)
        return c

    half = Fraction(1, 2)
    # (1 - sqrt(1 - z^2)) / z = sum_{j>=1} -binom(1/2, j) (-1)^j z^(2j - 1)
    ratio = [Fraction(0)] * (order + 1)
    for j in range(1, order // 2 + 2):
        if 2 * j - 1 <= order:
            ratio[2 * j - 1] = -binom_half(j, half) * (-1) ** j
    inv_sqrt = [Fraction(0)] * (order + 1)
    for j in range(order // 2 + 1):
        inv_sqrt[2 * j] = binom_half(j, -half) * (-1) ** j
    out = inv_sqrt
    for _ in range(n):
        out = _series_mul(out, ratio, order)
    return out


def generating_function(n: int, z):
    z = np.asarray(z, dtype=float)
    root = np.sqrt(1.0 - z * z)
    # (1 - root)/z written as z/(1 + root) avoids cancellation near 0
    return (z / (1.0 + root)) ** n / root


@dataclass(frozen=True)
class GeneratingReport:
    n: int
    order: int
    coefficient_mismatches: list
    max_value_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return not self.coefficient_mismatches and self.max_value_error <= self.tol


def generating_check(n: int, z_grid=None, order: int = 20, tol: float = 1e-10) -> GeneratingReport:
    """Compare g_n against the return probabilities P_n(S_k = 0).

    Coefficients up to ``order`` are compared exactly; values on ``z_grid``
    are compared against the walk sum truncated far enough that the tail is
    below double precision.
    """
    coeffs = generating_series(n, order)
    mismatches = [k for k in range(order + 1) if coeffs[k] != walk_return_prob(n, k)]
    if z_grid is None:
        z_grid = np.linspace(-0.6, 0.6, 25)
    z_grid = np.asarray(z_grid, dtype=float)
    if np.any(np.abs(z_grid) >= 1.0):
        raise ValueError("z_grid must lie in (-1, 1)")
    zmax = float(np.max(np.abs(z_grid))) if z_grid.size else 0.0
    k_top = max(order, int(math.ceil(40.0 / max(-math.log(max(zmax, 1e-300)), 1e-3))) + n)
    probs = np.array([float(walk_return_prob(n, k)) for k in range(k_top + 1)])
    powers = z_grid[:, None] ** np.arange(k_top + 1)[None, :]
    walk_sum = powers @ probs
    err = float(np.max(np.abs(walk_sum - generating_function(n, z_grid)))) if z_grid.size else 0.0
    return GeneratingReport(n=n, order=order, coefficient_mismatches=mismatches, max_value_error=err, tol=tol)
