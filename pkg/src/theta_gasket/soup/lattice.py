"""Finite grid graphs with Dirichlet ghost vertices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ..special import DomainError

__all__ = ["LatticeModel", "build_disk_lattice", "graph_model"]


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """Interior vertices, interior edges and edges to fixed-value ghost vertices.

    Ghost vertex g sits at ``ghost_pos[g]`` and belongs to boundary
    component ``ghost_component[g]``: 0 is the outer boundary (value v),
    k >= 1 is the boundary of hole k (value 0). Every ghost edge
    ``(ghost_edges[i, 0], ghost_edges[i, 1])`` joins an interior vertex to
    a ghost. The Laplacian is degree minus adjacency on the interior, with
    ghost edges counted in the degree.
    """

    pos: np.ndarray
    edges: np.ndarray
    conductance: np.ndarray
    ghost_pos: np.ndarray
    ghost_edges: np.ndarray
    ghost_conductance: np.ndarray
    ghost_component: np.ndarray
    mesh: float = float("nan")
    holes: tuple = ()
    laplacian: sp.csc_matrix = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_vertices
        if n == 0:
            raise DomainError("model has no interior vertices")
        if self.ghost_edges.shape[0] == 0:
            raise DomainError("boundary is empty; the Laplacian would be singular")
        u, w = self.edges[:, 0], self.edges[:, 1]
        c = self.conductance
        deg = np.bincount(u, c, n) + np.bincount(w, c, n)
        deg += np.bincount(self.ghost_edges[:, 0], self.ghost_conductance, n)
        adj = sp.coo_matrix((np.concatenate([c, c]), (np.concatenate([u, w]), np.concatenate([w, u]))), shape=(n, n))
        lap = (sp.diags(deg) - adj).tocsc()
        object.__setattr__(self, "laplacian", lap)

    @property
    def n_vertices(self) -> int:
        return int(self.pos.shape[0])

    @property
    def n_ghosts(self) -> int:
        return int(self.ghost_pos.shape[0])

    def is_connected(self) -> bool:
        n = self.n_vertices
        adj = sp.coo_matrix((np.ones(len(self.edges)), (self.edges[:, 0], self.edges[:, 1])), shape=(n, n))
        return connected_components(adj, directed=False)[0] == 1

    def boundary_values(self, v: float) -> np.ndarray:
        """Ghost values: v on the outer boundary, 0 on hole boundaries."""
        return np.where(self.ghost_component == 0, float(v), 0.0)

    def boundary_load(self, v: float) -> np.ndarray:
        """b with b_x = sum over ghost edges (x, g) of c * value(g)."""
        val = self.boundary_values(v)[self.ghost_edges[:, 1]] * self.ghost_conductance
        return np.bincount(self.ghost_edges[:, 0], val, self.n_vertices)

    def scaled(self, factor: float) -> "LatticeModel":
        """Same graph with every conductance multiplied by factor."""
        return LatticeModel(self.pos, self.edges, self.conductance * factor, self.ghost_pos, self.ghost_edges,
                            self.ghost_conductance * factor, self.ghost_component, self.mesh, self.holes)


def _check_holes(holes):
    out = []
    for h in holes or ():
        (cx, cy), r = h
        c, r = complex(float(cx), float(cy)), float(r)
        if r <= 0:
            raise DomainError("hole radius must be positive")
        if abs(c) + r >= 1.0:
            raise DomainError("hole must lie strictly inside the unit disk")
        out.append((c, r))
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            if abs(out[i][0] - out[j][0]) <= out[i][1] + out[j][1]:
                raise DomainError("holes must be disjoint")
    return out


def build_disk_lattice(mesh_m: int, holes=None) -> LatticeModel:
    """Grid points (i, j)/m with i^2 + j^2 < m^2, minus points inside the holes.

    ``holes`` is a sequence of ((x, y), radius). A lattice point strictly
    inside a hole is removed and becomes a ghost of that hole. Every
    neighbour of an interior point that is not interior is a ghost vertex
    of its own; outer ghosts carry the boundary value.
    """
    m = int(mesh_m)
    if m < 8:
        raise DomainError("mesh_m must be at least 8")
    hl = _check_holes(holes)
    for c, r in hl:
        # the ghost ring of a hole must not merge with the outer ghosts
        if abs(c) + r >= 1.0 - 2.0 / m:
            raise DomainError("hole touches the outer boundary at this mesh")
    span = np.arange(-m - 1, m + 2)
    I, J = np.meshgrid(span, span, indexing="ij")
    I, J = I.ravel(), J.ravel()
    pts = (I + 1j * J) / m
    comp = np.full(I.shape, -1)  # -1 interior, 0 outside, k hole k
    comp[I * I + J * J >= m * m] = 0
    for k, (c, r) in enumerate(hl, start=1):
        inside = (np.abs(pts - c) < r) & (comp == -1)
        comp[inside] = k
    interior = np.flatnonzero(comp == -1)
    if interior.size == 0:
        raise DomainError("no interior vertices")
    index = {(int(I[p]), int(J[p])): n for n, p in enumerate(interior)}
    edges, gpos, gedges, gcomp, gindex = [], [], [], [], {}
    lookup = {(int(i), int(j)): int(cmp) for i, j, cmp in zip(I, J, comp)}
    for (i, j), n in index.items():
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            key = (i + di, j + dj)
            other = index.get(key)
            if other is not None:
                if n < other:
                    edges.append((n, other))
                continue
            g = gindex.get(key)
            if g is None:
                g = len(gpos)
                gindex[key] = g
                gpos.append((key[0] / m, key[1] / m))
                gcomp.append(lookup.get(key, 0))
            gedges.append((n, g))
    pos = np.column_stack([I[interior] / m, J[interior] / m])
    edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
    gedges = np.array(gedges, dtype=np.int64).reshape(-1, 2)
    return LatticeModel(pos=pos, edges=edges, conductance=np.ones(len(edges)),
                        ghost_pos=np.array(gpos, dtype=float).reshape(-1, 2), ghost_edges=gedges,
                        ghost_conductance=np.ones(len(gedges)), ghost_component=np.array(gcomp, dtype=np.int64),
                        mesh=1.0 / m, holes=tuple((c.real, c.imag, r) for c, r in hl))


def graph_model(n_vertices: int, edges, ghost_edges, conductance=None, ghost_conductance=None,
                ghost_component=None, pos=None, ghost_pos=None) -> LatticeModel:
    """A model on an arbitrary graph, for small exact checks.

    ``ghost_edges`` lists (interior vertex, ghost id) pairs; ghost ids are
    0..n_ghosts-1. Positions default to zeros.
    """
    edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
    gedges = np.array(ghost_edges, dtype=np.int64).reshape(-1, 2)
    n_g = int(gedges[:, 1].max()) + 1 if len(gedges) else 0
    c = np.ones(len(edges)) if conductance is None else np.asarray(conductance, float)
    gc = np.ones(len(gedges)) if ghost_conductance is None else np.asarray(ghost_conductance, float)
    gcomp = np.zeros(n_g, dtype=np.int64) if ghost_component is None else np.asarray(ghost_component, np.int64)
    pos = np.zeros((n_vertices, 2)) if pos is None else np.asarray(pos, float)
    gpos = np.zeros((n_g, 2)) if ghost_pos is None else np.asarray(ghost_pos, float)
    return LatticeModel(pos, edges, c, gpos, gedges, gc, gcomp)
