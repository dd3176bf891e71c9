"""Jacobi theta functions, complete elliptic integrals and nome conversions.

Everything here works with real nomes ``q`` in ``(0, 1)`` and real moduli
``k`` in ``(0, 1)``. The theta functions are

    theta2(q) = sum_n q^((n + 1/2)^2)
    theta3(q) = sum_n q^(n^2)
    theta4(q) = sum_n (-1)^n q^(n^2)

and the nome of a modulus is ``q = exp(-pi K'(k) / K(k))`` so that
``k = theta2(q)^2 / theta3(q)^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ConvergenceError",
    "DomainError",
    "EvalPolicy",
    "DEFAULT_POLICY",
    "NomePair",
    "theta2",
    "theta3",
    "theta4",
    "theta2_log",
    "theta3_log",
    "theta4_log",
    "theta34_gap_log",
    "agm",
    "elliptic_K",
    "elliptic_Kprime",
    "elliptic_K_from_complement",
    "nome_from_k",
    "complementary_nome",
]

PI = math.pi
PI2 = math.pi * math.pi


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(ArithmeticError):
    """A series or iteration did not reach its tolerance within its budget."""


@dataclass(frozen=True)
class EvalPolicy:
    """Truncation controls for the theta series."""

    abs_tol: float = 1e-15
    max_terms: int = 64

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_terms < 8:
            raise ValueError("max_terms must be at least 8")


DEFAULT_POLICY = EvalPolicy()


def _check_nome(q: float, allow_zero: bool = True) -> float:
    q = float(q)
    if math.isnan(q) or q >= 1.0 or q < 0.0 or (q == 0.0 and not allow_zero):
        raise DomainError(f"nome must lie in (0, 1), got {q!r}")
    return q


def _tail_sum(log_q: float, offset: float, sign: bool, policy: EvalPolicy) -> float:
    """sum_{n>=1} (+-1)^n q^((n + offset)^2) for offset in {0, 1/2} (n>=0 if 1/2)."""
    start = 0 if offset else 1
    total = 0.0
    summed = 0
    for n in range(start, start + policy.max_terms + 1):
        term = math.exp((n + offset) ** 2 * log_q)
        if sign and n % 2:
            term = -term
        if summed >= 3 and abs(term) < policy.abs_tol * max(1.0, abs(total)):
            return total
        total += term
        summed += 1
    raise ConvergenceError(
        f"theta series did not converge in {policy.max_terms} terms (log q = {log_q:g})"
    )


def _check_log_nome(log_q: float) -> float:
    log_q = float(log_q)
    if not log_q < 0.0:
        raise DomainError(f"log q must be negative, got {log_q!r}")
    return log_q


def theta2_log(log_q: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """theta2 as a function of log q; usable where q itself would underflow."""
    log_q = _check_log_nome(log_q)
    if log_q == -math.inf:
        return 0.0
    return 2.0 * _tail_sum(log_q, 0.5, False, policy)


def theta3_log(log_q: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    log_q = _check_log_nome(log_q)
    if log_q == -math.inf:
        return 1.0
    return 1.0 + 2.0 * _tail_sum(log_q, 0.0, False, policy)


def theta4_log(log_q: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    log_q = _check_log_nome(log_q)
    if log_q == -math.inf:
        return 1.0
    if log_q <= -math.pi:
        return 1.0 + 2.0 * _tail_sum(log_q, 0.0, True, policy)
    # theta4(q) = sqrt(pi/|log q|) * theta2(q_hat)
    a = -log_q
    return math.sqrt(PI / a) * theta2_log(-PI2 / a, policy)


def theta34_gap_log(log_q: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """theta3(q) - theta4(q) = 4 sum_{n odd > 0} q^(n^2), summed without cancellation."""
    log_q = _check_log_nome(log_q)
    if log_q == -math.inf:
        return 0.0
    # odd n = 2j + 1 gives q^(4 (j + 1/2)^2)
    return 4.0 * _tail_sum(4.0 * log_q, 0.5, False, policy)


def _log_of(q: float) -> float:
    q = _check_nome(q)
    return -math.inf if q == 0.0 else math.log(q)


def theta2(q: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    return theta2_log(_log_of(q), policy)


def theta3(q: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    return theta3_log(_log_of(q), policy)


def theta4(q: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    return theta4_log(_log_of(q), policy)


def agm(a: float, b: float, max_iter: int = 64) -> float:
    """Arithmetic-geometric mean of two non-negative numbers."""
    if a < 0 or b < 0:
        raise DomainError("agm needs non-negative arguments")
    if a == 0.0 or b == 0.0:
        return 0.0
    for _ in range(max_iter):
        if abs(a - b) <= 4e-16 * a:
            return 0.5 * (a + b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    raise ConvergenceError("agm iteration did not settle")


def _complement(k: float) -> float:
    return math.sqrt((1.0 - k) * (1.0 + k))


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind, modulus convention."""
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise DomainError(f"K(k) needs k in [0, 1), got {k!r} (K diverges at k = 1)")
    return PI / (2.0 * agm(1.0, _complement(k)))


def elliptic_K_from_complement(k_prime: float) -> float:
    """K(k) given the complementary modulus k' = sqrt(1 - k^2) directly.

    Keeps full relative accuracy when k is within rounding of 1.
    """
    k_prime = float(k_prime)
    if not 0.0 < k_prime <= 1.0:
        raise DomainError(f"complementary modulus must lie in (0, 1], got {k_prime!r}")
    return PI / (2.0 * agm(1.0, k_prime))


def elliptic_Kprime(k: float) -> float:
    """K'(k) = K(sqrt(1 - k^2))."""
    k = float(k)
    if not 0.0 < k <= 1.0:
        raise DomainError(f"K'(k) needs k in (0, 1], got {k!r}")
    return PI / (2.0 * agm(1.0, k))


@dataclass(frozen=True)
class NomePair:
    """A nome with its complementary nome and the matching moduli.

    ``log_q`` is kept alongside ``q`` because nomes close to 1 lose relative
    precision in ``log``; likewise ``k_prime`` is kept because ``k`` rounds
    to 1 long before ``k'`` underflows.
    """

    q: float
    q_hat: float
    k: float
    k_prime: float
    log_q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise DomainError(f"nome must lie in (0, 1), got {self.q!r}")
        if not self.log_q < 0:
            raise DomainError("log q must be negative")

    @classmethod
    def from_q(cls, q: float, policy: EvalPolicy = DEFAULT_POLICY) -> "NomePair":
        q = _check_nome(q, allow_zero=False)
        return cls.from_log_q(math.log(q), policy)

    @classmethod
    def from_log_q(cls, log_q: float, policy: EvalPolicy = DEFAULT_POLICY) -> "NomePair":
        log_q = _check_log_nome(log_q)
        t3 = theta3_log(log_q, policy)
        return cls(
            q=math.exp(log_q),
            q_hat=math.exp(PI2 / log_q),
            k=(theta2_log(log_q, policy) / t3) ** 2,
            k_prime=(theta4_log(log_q, policy) / t3) ** 2,
            log_q=log_q,
        )


def nome_from_k(k: float, k_prime: float | None = None) -> NomePair:
    """Nome q = exp(-pi K'(k)/K(k)) of the modulus k.

    ``k_prime`` may be supplied when k is too close to 1 for ``sqrt(1 - k^2)``
    to be accurate.
    """
    k = float(k)
    if k_prime is None:
        if not 0.0 < k < 1.0:
            raise DomainError(f"modulus must lie in (0, 1), got {k!r}")
        k_prime = _complement(k)
    else:
        # k itself may have rounded to 1; k_prime carries the information
        k_prime = float(k_prime)
        if not (0.0 < k <= 1.0 and 0.0 < k_prime < 1.0):
            raise DomainError(f"moduli out of range: k = {k!r}, k' = {k_prime!r}")
    # K'/K = agm(1, k') / agm(1, k)
    log_q = -PI * agm(1.0, k_prime) / agm(1.0, k)
    return NomePair(
        q=math.exp(log_q),
        q_hat=math.exp(PI2 / log_q),
        k=k,
        k_prime=k_prime,
        log_q=log_q,
    )


def complementary_nome(q: float) -> float:
    """The nome q_hat with log(q) * log(q_hat) = pi^2."""
    q = _check_nome(q, allow_zero=False)
    return math.exp(PI2 / math.log(q))
