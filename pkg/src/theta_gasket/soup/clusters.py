"""Sign clusters of the metric-graph field and their holonomy, via a
double-cover union-find.

Lift s in {0, 1} of vertex x is node 2x + s; the two boundary sheets are
nodes 2n and 2n + 1. An open edge with crossing parity p joins (x, s) to
(y, s ^ p), so a cluster carries a closed path of odd holonomy exactly
when the two lifts of one of its vertices meet.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

from .defects import DefectConfig
from .lattice import LatticeModel

__all__ = ["ClusterState", "open_edges", "detect_odd_cluster", "detect_disconnection", "exclusion_keys",
           "odd_cluster_statistic", "block_statistics", "block_surround", "adjacency", "detect_surround"]


@nb.njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@nb.njit(cache=True, nogil=True)
def _union(parent, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra != rb:
        if ra < rb:
            parent[rb] = ra
        else:
            parent[ra] = rb


@nb.njit(cache=True, nogil=True)
def _open_into(phi, beta, eu, ev, ec, gx, gg, gc, ue, ug, open_e, open_g):
    # a same-sign edge stays open with the probability that the bridge on it avoids 0
    for e in range(eu.shape[0]):
        prod = phi[eu[e]] * phi[ev[e]]
        open_e[e] = prod > 0.0 and ue[e] < -math.expm1(-2.0 * ec[e] * prod)
    for e in range(gx.shape[0]):
        prod = phi[gx[e]] * beta[gg[e]]
        open_g[e] = prod > 0.0 and ug[e] < -math.expm1(-2.0 * gc[e] * prod)


@nb.njit(cache=True, nogil=True)
def _cover(n, eu, ev, epar, open_e, gx, gshift, open_g, parent):
    for i in range(2 * n + 2):
        parent[i] = i
    for e in range(eu.shape[0]):
        if open_e[e]:
            p = epar[e]
            _union(parent, 2 * eu[e], 2 * ev[e] + p)
            _union(parent, 2 * eu[e] + 1, 2 * ev[e] + 1 - p)
    for e in range(gx.shape[0]):
        if open_g[e]:
            s = gshift[e]
            _union(parent, 2 * gx[e], 2 * n + s)
            _union(parent, 2 * gx[e] + 1, 2 * n + 1 - s)


@nb.njit(cache=True, nogil=True)
def _odd_statistic(n, parent, keys, cmin):
    """max over odd clusters of the least key in the cluster; -inf if none."""
    for i in range(2 * n + 2):
        cmin[i] = np.inf
    any_odd = False
    for x in range(n):
        r = _find(parent, 2 * x)
        if r == _find(parent, 2 * x + 1):
            any_odd = True
            if keys[x] < cmin[r]:
                cmin[r] = keys[x]
    best = -np.inf
    if any_odd:
        for x in range(n):
            r = _find(parent, 2 * x)
            if cmin[r] < np.inf and cmin[r] > best:
                best = cmin[r]
    return best


@nb.njit(cache=True, nogil=True)
def block_statistics(mean, X, U, beta, eu, ev, ec, epar, gx, gg, gc, gshift, keys, out):
    """Per column of X (field minus mean) and U (edge uniforms): the odd-cluster statistic."""
    n = mean.shape[0]
    ne = eu.shape[0]
    ng = gx.shape[0]
    phi = np.empty(n)
    open_e = np.empty(ne, dtype=np.bool_)
    open_g = np.empty(ng, dtype=np.bool_)
    parent = np.empty(2 * n + 2, dtype=np.int64)
    cmin = np.empty(2 * n + 2)
    for b in range(X.shape[1]):
        for i in range(n):
            phi[i] = mean[i] + X[i, b]
        _open_into(phi, beta, eu, ev, ec, gx, gg, gc, U[:ne, b], U[ne:, b], open_e, open_g)
        _cover(n, eu, ev, epar, open_e, gx, gshift, open_g, parent)
        out[b] = _odd_statistic(n, parent, keys, cmin)


@nb.njit(cache=True, nogil=True)
def _surround_statistic(order, keys, adj_ptr, adj_nbr, adj_edge, gptr, gedge, epar, open_e, gshift, open_g, parent):
    """Largest t such that the open graph on {x : key(x) >= t} has an odd cycle; -inf if never.

    Vertices are added in decreasing key order; an odd cycle appears exactly
    when the two lifts of the vertex just added meet.
    """
    n = order.shape[0]
    for i in range(2 * n + 2):
        parent[i] = i
    added = np.zeros(n, dtype=np.bool_)
    for k in range(n):
        x = order[k]
        added[x] = True
        for p in range(adj_ptr[x], adj_ptr[x + 1]):
            y = adj_nbr[p]
            e = adj_edge[p]
            if added[y] and open_e[e]:
                q = epar[e]
                _union(parent, 2 * x, 2 * y + q)
                _union(parent, 2 * x + 1, 2 * y + 1 - q)
        for p in range(gptr[x], gptr[x + 1]):
            e = gedge[p]
            if open_g[e]:
                s = gshift[e]
                _union(parent, 2 * x, 2 * n + s)
                _union(parent, 2 * x + 1, 2 * n + 1 - s)
        if _find(parent, 2 * x) == _find(parent, 2 * x + 1):
            return keys[x]
    return -np.inf


@nb.njit(cache=True, nogil=True)
def block_surround(mean, X, U, beta, eu, ev, ec, gx, gg, gc, order, keys, adj_ptr, adj_nbr, adj_edge, gptr,
                   gedge, epar, gshift, out):
    """Per column: the surround statistic of the sample."""
    n = mean.shape[0]
    ne = eu.shape[0]
    phi = np.empty(n)
    open_e = np.empty(ne, dtype=np.bool_)
    open_g = np.empty(gx.shape[0], dtype=np.bool_)
    parent = np.empty(2 * n + 2, dtype=np.int64)
    for b in range(X.shape[1]):
        for i in range(n):
            phi[i] = mean[i] + X[i, b]
        _open_into(phi, beta, eu, ev, ec, gx, gg, gc, U[:ne, b], U[ne:, b], open_e, open_g)
        out[b] = _surround_statistic(order, keys, adj_ptr, adj_nbr, adj_edge, gptr, gedge, epar, open_e, gshift,
                                     open_g, parent)


def adjacency(model: LatticeModel):
    """CSR incidence: (ptr, neighbour, edge id) over interior edges and (ptr, ghost edge id)."""
    n = model.n_vertices
    u, w = model.edges[:, 0], model.edges[:, 1]
    src = np.concatenate([u, w])
    dst = np.concatenate([w, u])
    eid = np.concatenate([np.arange(len(u)), np.arange(len(u))])
    o = np.argsort(src, kind="stable")
    ptr = np.concatenate([[0], np.cumsum(np.bincount(src, minlength=n))])
    gx = model.ghost_edges[:, 0]
    go = np.argsort(gx, kind="stable")
    gptr = np.concatenate([[0], np.cumsum(np.bincount(gx, minlength=n))])
    return ptr.astype(np.int64), dst[o].astype(np.int64), eid[o].astype(np.int64), gptr.astype(np.int64), \
        go.astype(np.int64)


def open_edges(field: np.ndarray, model: LatticeModel, rng: np.random.Generator, v: float = 0.0):
    """Open edges of the coupling: (interior mask, ghost mask)."""
    field = np.ascontiguousarray(field, dtype=float)
    oe = np.empty(len(model.edges), dtype=bool)
    og = np.empty(len(model.ghost_edges), dtype=bool)
    ue = rng.random(len(model.edges))
    ug = rng.random(len(model.ghost_edges))
    _open_into(field, model.boundary_values(v), model.edges[:, 0], model.edges[:, 1], model.conductance,
               model.ghost_edges[:, 0], model.ghost_edges[:, 1], model.ghost_conductance, ue, ug, oe, og)
    return oe, og


class ClusterState:
    """Open edges of one sample together with the double cover they induce."""

    def __init__(self, model: LatticeModel, open_interior, open_ghost=None):
        self.model = model
        self.open_interior = np.asarray(open_interior, dtype=bool)
        self.open_ghost = (np.zeros(len(model.ghost_edges), bool) if open_ghost is None
                           else np.asarray(open_ghost, dtype=bool))
        self._parent = None
        self._for = None

    def cover(self, defects: DefectConfig) -> np.ndarray:
        if self._for is not defects:
            m = self.model
            parent = np.empty(2 * m.n_vertices + 2, dtype=np.int64)
            _cover(m.n_vertices, m.edges[:, 0], m.edges[:, 1], defects.edge_parity.astype(np.int64),
                   self.open_interior, m.ghost_edges[:, 0], defects.ghost_sheet_shift(m).astype(np.int64),
                   self.open_ghost, parent)
            self._parent, self._for = parent, defects
        return self._parent

    def surround_statistic(self, defects: DefectConfig, keys) -> float:
        """Largest t with an odd cycle among open edges inside {key >= t}."""
        m = self.model
        keys = np.asarray(keys, float)
        order = np.argsort(-keys, kind="stable")
        ptr, nbr, eid, gptr, gedge = adjacency(m)
        parent = np.empty(2 * m.n_vertices + 2, dtype=np.int64)
        return float(_surround_statistic(order, keys, ptr, nbr, eid, gptr, gedge, defects.edge_parity.astype(np.int64),
                                         self.open_interior, defects.ghost_sheet_shift(m).astype(np.int64),
                                         self.open_ghost, parent))

    def statistic(self, defects: DefectConfig, keys) -> float:
        parent = self.cover(defects).copy()
        n = self.model.n_vertices
        return float(_odd_statistic(n, parent, np.asarray(keys, float), np.empty(2 * n + 2)))


def detect_odd_cluster(state: ClusterState, defects: DefectConfig) -> bool:
    """True iff some cluster (boundary-attached ones included) has odd holonomy."""
    return state.statistic(defects, np.zeros(state.model.n_vertices)) > -np.inf


def exclusion_keys(model: LatticeModel, disks) -> np.ndarray:
    """min_j |x - z_j| / eps_j per vertex; a cluster avoids every disk iff its least key is >= 1."""
    pos = model.pos[:, 0] + 1j * model.pos[:, 1]
    keys = np.full(model.n_vertices, np.inf)
    for (cx, cy), eps in disks:
        keys = np.minimum(keys, np.abs(pos - complex(cx, cy)) / float(eps))
    return keys


def detect_disconnection(state: ClusterState, defects: DefectConfig, exclusion=None) -> bool:
    """True iff an odd cluster exists that avoids every exclusion disk ((x, y), eps)."""
    if not exclusion:
        return detect_odd_cluster(state, defects)
    return state.statistic(defects, exclusion_keys(state.model, exclusion)) >= 1.0


def detect_surround(state: ClusterState, defects: DefectConfig, center, r: float) -> bool:
    """True iff some cluster surrounds the disk of radius r about ``center`` (the single puncture)."""
    pos = state.model.pos[:, 0] + 1j * state.model.pos[:, 1]
    return state.surround_statistic(defects, np.abs(pos - complex(*center))) >= r


def odd_cluster_statistic(state: ClusterState, defects: DefectConfig, keys) -> float:
    return state.statistic(defects, keys)
