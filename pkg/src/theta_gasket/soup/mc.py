"""Seeded, worker-count independent Monte Carlo over GFF samples."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clusters import adjacency, block_statistics, block_surround, exclusion_keys
from .defects import DefectConfig, defects_from_punctures
from .lattice import LatticeModel
from .linalg import SPDFactor
from .masses import exact_no_odd_probability

__all__ = ["EstimatorReport", "Event", "GFFSampler", "sample_gff", "odd_cluster_statistics",
           "verify_topological_identity", "estimate_event", "estimate_ladder", "BLOCK_SIZE"]

# samples per RNG block; blocks are keyed by (seed, stream, block index)
BLOCK_SIZE = 256


@dataclass(frozen=True)
class EstimatorReport:
    p_hat: float
    std_err: float
    n_samples: int
    seed: int
    exact_target: float | None = None
    z_score: float | None = None
    params: dict = field(default_factory=dict)

    @classmethod
    def from_count(cls, hits: int, n: int, seed: int, target: float | None = None, **params) -> "EstimatorReport":
        p = hits / n
        se = math.sqrt(p * (1.0 - p) / n)
        z = None
        if target is not None:
            if se > 0:
                z = (p - target) / se
            else:
                z = 0.0 if p == target else math.copysign(math.inf, p - target)
        return cls(p, se, n, seed, target, z, params)


class Event(str, enum.Enum):
    DISCONNECTION = "disconnection"
    HOLES_DISCONNECTION = "holes_disconnection"
    ONE_POINT_SURROUND = "one_point_surround"


class GFFSampler:
    """Dirichlet GFF on the model with ghost values v (outer) and 0 (holes)."""

    def __init__(self, model: LatticeModel, v: float = 0.0):
        self.model = model
        self.v = float(v)
        self.factor = SPDFactor(model.laplacian)
        b = model.boundary_load(self.v)
        self.mean = self.factor.solve(b) if self.v else np.zeros(model.n_vertices)

    def fluctuation(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """(n, size) centred samples with covariance Delta^{-1}."""
        return self.factor.correlate(rng.standard_normal((self.model.n_vertices, size)))

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        k = 1 if size is None else int(size)
        x = self.fluctuation(rng, k) + self.mean[:, None]
        return x[:, 0] if size is None else x.T


def sample_gff(model: LatticeModel, v: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """One field (or ``size`` fields as rows)."""
    return GFFSampler(model, v).sample(rng, size)


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(block)))))


def odd_cluster_statistics(model: LatticeModel, defects: DefectConfig, v: float, keys, n_samples: int, seed: int,
                           threads: int = 1, stream: int = 0, sampler: GFFSampler | None = None,
                           mode: str = "cluster") -> np.ndarray:
    """Per sample statistic of the odd-holonomy clusters.

    mode "cluster": the largest, over clusters of odd holonomy, of the least
    key in the cluster. mode "surround": the largest t such that the open
    graph restricted to {key >= t} still has an odd cycle. Both are -inf
    when there is no odd cluster. Samples are produced in blocks of
    BLOCK_SIZE, each from its own RNG stream, so the output does not
    depend on ``threads``.
    """
    if mode not in ("cluster", "surround"):
        raise ValueError(f"unknown mode {mode!r}")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    sampler = GFFSampler(model, v) if sampler is None else sampler
    m = model
    keys = np.ascontiguousarray(keys, dtype=float)
    edges = (m.edges[:, 0].copy(), m.edges[:, 1].copy(), m.conductance, defects.edge_parity.astype(np.int64),
             m.ghost_edges[:, 0].copy(), m.ghost_edges[:, 1].copy(), m.ghost_conductance,
             defects.ghost_sheet_shift(m).astype(np.int64))
    beta = m.boundary_values(v)
    n_edges = len(m.edges) + len(m.ghost_edges)
    n_blocks = -(-n_samples // BLOCK_SIZE)
    out = np.empty(n_samples)
    if mode == "surround":
        order = np.argsort(-keys, kind="stable")
        adj = adjacency(m)

    def run(k):
        size = min(BLOCK_SIZE, n_samples - k * BLOCK_SIZE)
        rng = _block_rng(seed, stream, k)
        X = np.ascontiguousarray(sampler.fluctuation(rng, size))
        U = rng.random((n_edges, size))
        eu, ev, ec, ep, gx, gg, gc, gs = edges
        res = np.empty(size)
        if mode == "surround":
            block_surround(sampler.mean, X, U, beta, eu, ev, ec, gx, gg, gc, order, keys, *adj, ep, gs, res)
        else:
            block_statistics(sampler.mean, X, U, beta, eu, ev, ec, ep, gx, gg, gc, gs, keys, res)
        out[k * BLOCK_SIZE:k * BLOCK_SIZE + size] = res

    if threads <= 1:
        for k in range(n_blocks):
            run(k)
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(run, range(n_blocks)))
    return out


def verify_topological_identity(model: LatticeModel, defects: DefectConfig, v: float, n_samples: int, seed: int,
                                threads: int = 1) -> EstimatorReport:
    """MC frequency of 'no cluster of odd holonomy' against its determinant value."""
    if v != 0.0 and defects.n_punctures % 2:
        raise ValueError("an odd number of punctures needs v = 0")
    target = exact_no_odd_probability(model, defects, v)
    stat = odd_cluster_statistics(model, defects, v, np.zeros(model.n_vertices), n_samples, seed, threads)
    hits = int(np.count_nonzero(stat == -np.inf))
    return EstimatorReport.from_count(hits, n_samples, seed, target, v=float(v), n_punctures=defects.n_punctures,
                                      n_vertices=model.n_vertices)


def _event_setup(model, event, params):
    event = Event(event)
    v = float(params.get("v", 0.0))
    if event is Event.ONE_POINT_SURROUND:
        z = complex(*params.get("point", (0.0, 0.0)))
        defects = defects_from_punctures(model, [z])
        p = defects.punctures[0]
        pos = model.pos[:, 0] + 1j * model.pos[:, 1]
        return defects, np.abs(pos - p), v, "surround"
    points = [complex(*z) for z in params["points"]]
    if event is Event.HOLES_DISCONNECTION:
        if not model.holes:
            raise ValueError("holes_disconnection needs a model built with holes")
        defects = defects_from_punctures(model, points, snap=False)
        return defects, np.zeros(model.n_vertices), v, "cluster"
    eps = [float(e) for e in params["eps"]]
    defects = defects_from_punctures(model, points)
    disks = [((z.real, z.imag), e) for z, e in zip(points, eps)]
    return defects, exclusion_keys(model, disks), v, "cluster"


def estimate_ladder(model: LatticeModel, event, params: dict, thresholds, n_samples: int, seed: int,
                    threads: int = 1) -> list[EstimatorReport]:
    """P(event) at each threshold from one shared set of samples.

    one_point_surround: no cluster surrounds the disk of radius r about the
    point (params: point, v), i.e. no odd cycle around the point among
    vertices outside the disk. disconnection: no odd cluster avoids all the
    eps-disks around ``points``; thresholds scale the radii. holes_disconnection:
    no odd cluster at all on a model with holes around ``points``.
    """
    defects, keys, v, mode = _event_setup(model, event, params)
    stat = odd_cluster_statistics(model, defects, v, keys, n_samples, seed, threads, mode=mode)
    reports = []
    for t in thresholds:
        t = float(t)
        hits = int(np.count_nonzero(stat < (t if Event(event) is not Event.HOLES_DISCONNECTION else 0.0)))
        reports.append(EstimatorReport.from_count(hits, n_samples, seed, None, event=Event(event).value,
                                                  x=t, v=v))
    return reports


def estimate_event(model: LatticeModel, event, params: dict, n_samples: int, seed: int,
                   threads: int = 1) -> EstimatorReport:
    """P(event) for one configuration; the threshold is params['r'] (surround) or 1."""
    t = float(params.get("r", 1.0))
    return estimate_ladder(model, event, params, [t], n_samples, seed, threads)[0]
