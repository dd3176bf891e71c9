"""Odd-holonomy loop and excursion masses from twisted Laplacians."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..special import DomainError
from .defects import DefectConfig
from .lattice import LatticeModel
from .linalg import SPDFactor

__all__ = ["twisted_laplacian", "twisted_boundary_load", "loop_mass_odd", "excursion_mass_odd", "exact_no_odd_probability"]


def twisted_laplacian(model: LatticeModel, defects: DefectConfig) -> sp.csc_matrix:
    """Laplacian with the conductance sign flipped on every crossed interior edge."""
    flip = defects.edge_parity.astype(bool)
    if not flip.any():
        return model.laplacian
    u, w = model.edges[flip, 0], model.edges[flip, 1]
    c = 2.0 * model.conductance[flip]
    n = model.n_vertices
    # entries -c become +c
    corr = sp.coo_matrix((np.concatenate([c, c]), (np.concatenate([u, w]), np.concatenate([w, u]))), shape=(n, n))
    return (model.laplacian + corr).tocsc()


def twisted_boundary_load(model: LatticeModel, defects: DefectConfig, v: float) -> np.ndarray:
    """b_sigma: the boundary load with ghost values carried into the twisted gauge."""
    sign = 1 - 2 * defects.ghost_sheet_shift(model).astype(float)
    val = model.boundary_values(v)[model.ghost_edges[:, 1]] * model.ghost_conductance * sign
    return np.bincount(model.ghost_edges[:, 0], val, model.n_vertices)


def loop_mass_odd(model: LatticeModel, defects: DefectConfig) -> float:
    """Mass of loops with holonomy -1: (1/2) log(det Delta_sigma / det Delta)."""
    if not defects.edge_parity.any():
        return 0.0
    return 0.5 * (SPDFactor(twisted_laplacian(model, defects)).logdet - SPDFactor(model.laplacian).logdet)


def excursion_mass_odd(model: LatticeModel, defects: DefectConfig, full_model: LatticeModel | None = None) -> float:
    """Mass of boundary-to-boundary excursions with holonomy -1, at unit boundary value.

    Equal to (1/2)(b^T Delta^{-1} b - b_s^T Delta_s^{-1} b_s), the drop in
    the harmonic-extension energy between the plain and twisted gauges.
    ``full_model`` is accepted for interface symmetry and not used: both
    energies live on ``model`` itself.
    """
    if defects.n_punctures % 2:
        raise DomainError("excursion mass needs an even number of punctures")
    b = model.boundary_load(1.0)
    bs = twisted_boundary_load(model, defects, 1.0)
    if defects.is_trivial:
        return 0.0
    e0 = float(b @ SPDFactor(model.laplacian).solve(b))
    e1 = float(bs @ SPDFactor(twisted_laplacian(model, defects)).solve(bs))
    return 0.5 * (e0 - e1)


def exact_no_odd_probability(model: LatticeModel, defects: DefectConfig, v: float) -> float:
    """exp(-loop_mass_odd - v^2 excursion_mass_odd)."""
    mass = loop_mass_odd(model, defects)
    if v != 0.0:
        mass += v * v * excursion_mass_odd(model, defects)
    return float(np.exp(-mass))
