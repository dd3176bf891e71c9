"""Power-law fits of probability ladders."""
from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

__all__ = ["FitMode", "ScalingFit", "scaling_fit"]


class FitMode(str, enum.Enum):
    PURE = "pure"
    LOG_CORRECTED = "log_corrected"


class ScalingFit(NamedTuple):
    exponent: float
    intercept: float
    stderr: float


def scaling_fit(reports, mode=FitMode.PURE, x_key: str = "x") -> ScalingFit:
    """Least squares for log p = intercept + exponent log x.

    LogCorrected first divides p by sqrt(log(1/x)). Points with a positive
    standard error are weighted by (p / std_err)^2, the inverse variance of
    log p; otherwise all weights are one. stderr is the usual estimate from
    the weighted residuals.
    """
    mode = FitMode(mode)
    x = np.array([float(r.params[x_key]) for r in reports])
    p = np.array([float(r.p_hat) for r in reports])
    se = np.array([float(r.std_err) for r in reports])
    if len(x) < 3:
        raise ValueError("need at least three ladder points")
    if np.any(p <= 0) or np.any(x <= 0):
        raise ValueError("probabilities and scales must be positive")
    y = np.log(p)
    if mode is FitMode.LOG_CORRECTED:
        if np.any(x >= 1):
            raise ValueError("log correction needs x < 1")
        y = y - 0.5 * np.log(np.log(1.0 / x))
    w = (p / se) ** 2 if np.all(se > 0) else np.ones_like(p)
    A = np.column_stack([np.ones_like(x), np.log(x)])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    resid = (y - A @ coef) * sw
    dof = len(x) - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv((A * w[:, None]).T @ A)
    return ScalingFit(float(coef[1]), float(coef[0]), math.sqrt(max(cov[1, 1], 0.0)))
