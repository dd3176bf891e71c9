"""Defect lines: a +-1 gauge on edges whose holonomy is the winding parity
around marked points."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..special import DomainError
from .lattice import LatticeModel

__all__ = ["DefectConfig", "defects_from_punctures", "explicit_defects", "snap_to_face", "ray_crossings"]

# rays leave radially, turned by a small angle so they never hit a lattice point
RAY_TILT = 0.01 * (math.sqrt(5.0) - 1.0)
# direction used for a puncture at the origin
ORIGIN_ANGLE = 0.1 * math.sqrt(2.0)
_FAR = 10.0


@dataclass(frozen=True, eq=False)
class DefectConfig:
    """Crossing parities of interior and ghost edges plus the boundary twist.

    ``ghost_twist[g]`` is the crossing parity of an exterior path from a base
    ghost to ghost g; a ghost edge (x, g) then joins lift s of x to the
    boundary sheet s ^ ghost_parity ^ ghost_twist[g].
    """

    punctures: np.ndarray
    directions: np.ndarray
    edge_parity: np.ndarray
    ghost_parity: np.ndarray
    ghost_twist: np.ndarray

    @property
    def n_punctures(self) -> int:
        return int(self.punctures.shape[0])

    @property
    def crossing_set(self) -> np.ndarray:
        """Interior edges crossed an odd number of times."""
        return np.flatnonzero(self.edge_parity)

    @property
    def is_trivial(self) -> bool:
        return not (self.edge_parity.any() or self.ghost_parity.any() or self.ghost_twist.any())

    def ghost_sheet_shift(self, model: LatticeModel) -> np.ndarray:
        """Per ghost edge: parity added when stepping onto the boundary sheet."""
        return (self.ghost_parity ^ self.ghost_twist[model.ghost_edges[:, 1]]).astype(np.int8)


def snap_to_face(model: LatticeModel, z: complex) -> complex:
    """Centre of the lattice face containing z."""
    h = model.mesh
    if not math.isfinite(h):
        raise DomainError("model has no mesh; give explicit punctures")
    return complex((math.floor(z.real / h) + 0.5) * h, (math.floor(z.imag / h) + 0.5) * h)


def ray_crossings(a: np.ndarray, b: np.ndarray, p: complex, d: complex) -> np.ndarray:
    """1 where the segment [a, b) crosses the ray p + t d, t >= 0 (a, b complex arrays)."""
    e = b - a
    w = a - p
    # solve w + s e = t d
    den = d.real * e.imag - d.imag * e.real
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (d.imag * w.real - d.real * w.imag) / den
        t = (e.imag * w.real - e.real * w.imag) / den
    hit = (den != 0) & (s >= 0) & (s < 1) & (t >= 0)
    return hit.astype(np.int8)


def _exit_angle(p: complex, d: complex) -> float:
    # |p + t d| = _FAR has one positive root because |p| < _FAR
    bq = 2 * (p.real * d.real + p.imag * d.imag)
    cq = abs(p) ** 2 - _FAR ** 2
    t = (-bq + math.sqrt(bq * bq - 4 * cq)) / 2
    return math.atan2((p + t * d).imag, (p + t * d).real) % (2 * math.pi)


def defects_from_punctures(model: LatticeModel, punctures, directions=None, snap: bool = True) -> DefectConfig:
    """One straight defect ray per puncture, from the puncture to infinity.

    By default rays point away from the origin (the shortest way out of a
    disk), turned by RAY_TILT; ``directions`` overrides the angles. Any
    other choice of rays gives a gauge-equivalent configuration.
    """
    pts = [complex(z) for z in punctures]
    if snap:
        pts = [snap_to_face(model, z) for z in pts]
    for z in pts:
        if abs(z) >= 1.0:
            raise DomainError("punctures must lie inside the unit disk")
    if directions is None:
        directions = [(math.atan2(z.imag, z.real) if abs(z) > 1e-12 else ORIGIN_ANGLE) + RAY_TILT for z in pts]
    directions = [float(t) for t in directions]
    if len(directions) != len(pts):
        raise ValueError("one direction per puncture")
    pos = model.pos[:, 0] + 1j * model.pos[:, 1]
    gpos = model.ghost_pos[:, 0] + 1j * model.ghost_pos[:, 1]
    a, b = pos[model.edges[:, 0]], pos[model.edges[:, 1]]
    ga, gb = pos[model.ghost_edges[:, 0]], gpos[model.ghost_edges[:, 1]]
    ep = np.zeros(len(a), dtype=np.int8)
    gp = np.zeros(len(ga), dtype=np.int8)
    twist = np.zeros(model.n_ghosts, dtype=np.int8)
    outer = np.flatnonzero(model.ghost_component == 0)
    base = outer[0] if outer.size else 0
    ang = np.angle(gpos) % (2 * math.pi)
    far = gpos / np.abs(gpos) * _FAR
    for p, t in zip(pts, directions):
        d = complex(math.cos(t), math.sin(t))
        ep ^= ray_crossings(a, b, p, d)
        gp ^= ray_crossings(ga, gb, p, d)
        # exterior path: radially out to |z| = _FAR, ccw along it, radially back in
        radial = ray_crossings(gpos, far, p, d)
        alpha = _exit_angle(p, d)
        arc = ((alpha - ang[base]) % (2 * math.pi) < (ang - ang[base]) % (2 * math.pi)).astype(np.int8)
        twist ^= radial ^ radial[base] ^ arc
    twist[model.ghost_component != 0] = 0
    return DefectConfig(np.array(pts), np.array(directions), ep, gp, twist)


def explicit_defects(model: LatticeModel, edge_parity, ghost_parity=None, ghost_twist=None) -> DefectConfig:
    """Gauge given edge by edge, for graphs without geometry."""
    ep = np.asarray(edge_parity, dtype=np.int8) & 1
    gp = np.zeros(len(model.ghost_edges), np.int8) if ghost_parity is None else np.asarray(ghost_parity, np.int8) & 1
    tw = np.zeros(model.n_ghosts, np.int8) if ghost_twist is None else np.asarray(ghost_twist, np.int8) & 1
    if ep.shape != (len(model.edges),) or gp.shape != (len(model.ghost_edges),) or tw.shape != (model.n_ghosts,):
        raise ValueError("parity arrays do not match the model")
    return DefectConfig(np.zeros(0, complex), np.zeros(0), ep, gp, tw)
