from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from theta_gasket.soup import (
    ClusterState,
    EstimatorReport,
    FitMode,
    GFFSampler,
    build_disk_lattice,
    defects_from_punctures,
    detect_disconnection,
    detect_odd_cluster,
    estimate_event,
    estimate_ladder,
    exact_no_odd_probability,
    excursion_mass_odd,
    explicit_defects,
    graph_model,
    loop_mass_odd,
    odd_cluster_statistics,
    open_edges,
    scaling_fit,
    twisted_laplacian,
    verify_topological_identity,
)
from theta_gasket.soup import linalg as soup_linalg
from theta_gasket.soup.clusters import detect_surround
from theta_gasket.special import DomainError

from oracles import brute_force_odd, enumerate_odd_loop_mass, killed_graph, path_excursions


@pytest.fixture(scope="module")
def disk8():
    return build_disk_lattice(8)


# --- lattice ----------------------------------------------------------------------


class TestLattice:
    def test_mesh8_count_frozen(self, disk8):
        assert disk8.n_vertices == 193
        assert disk8.mesh == 1 / 8

    @pytest.mark.parametrize("m", [8, 9, 13, 20, 33, 64])
    def test_connected(self, m):
        assert build_disk_lattice(m).is_connected()

    def test_holes_remove_vertices(self, disk8):
        holed = build_disk_lattice(8, holes=[((-0.4, 0.0), 0.15), ((0.4, 0.0), 0.15)])
        assert holed.n_vertices < disk8.n_vertices
        assert set(holed.ghost_component.tolist()) == {0, 1, 2}

    def test_degenerate_holes(self):
        with pytest.raises(DomainError):
            build_disk_lattice(8, holes=[((0.8, 0.0), 0.3)])
        with pytest.raises(DomainError):
            build_disk_lattice(8, holes=[((0.1, 0.0), 0.2), ((-0.1, 0.0), 0.2)])
        with pytest.raises(DomainError):
            build_disk_lattice(4)

    def test_laplacian_positive_definite(self, disk8):
        L = disk8.laplacian.toarray()
        assert np.allclose(L, L.T)
        assert np.linalg.eigvalsh(L).min() > 0

    def test_empty_boundary_rejected(self):
        with pytest.raises(DomainError):
            graph_model(2, [(0, 1)], [])


class TestSPDFactor:
    def test_sparse_route_matches_dense(self, monkeypatch):
        model = build_disk_lattice(10)
        A = model.laplacian
        dense = soup_linalg.SPDFactor(A)
        monkeypatch.setattr(soup_linalg, "DENSE_LIMIT", 0)
        sparse = soup_linalg.SPDFactor(A)
        assert not sparse.dense and dense.dense
        assert sparse.logdet == pytest.approx(dense.logdet, rel=1e-12)
        b = np.arange(model.n_vertices, dtype=float)
        assert np.allclose(sparse.solve(b), dense.solve(b), rtol=1e-11)
        # correlating the identity gives a square root of the inverse
        C = sparse.correlate(np.eye(model.n_vertices))
        assert np.allclose(A @ (C @ C.T), np.eye(model.n_vertices), atol=1e-10)
        C = dense.correlate(np.eye(model.n_vertices))
        assert np.allclose(A @ (C @ C.T), np.eye(model.n_vertices), atol=1e-10)


# --- masses -----------------------------------------------------------------------


class TestLoopMass:
    def test_empty_crossing(self, disk8):
        d = explicit_defects(disk8, np.zeros(len(disk8.edges)))
        assert loop_mass_odd(disk8, d) == 0.0

    @pytest.mark.parametrize("edges,flip", [
        ([(0, 1), (1, 2), (2, 0)], [1, 0, 0]),
        ([(0, 1), (1, 2), (2, 3), (3, 0)], [0, 0, 1, 0]),
        ([(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], [1, 0, 0, 0, 1]),
    ])
    def test_against_loop_enumeration(self, edges, flip):
        n = 1 + max(max(e) for e in edges)
        model = killed_graph(edges, n, 8.0)
        d = explicit_defects(model, flip)
        assert loop_mass_odd(model, d) == pytest.approx(enumerate_odd_loop_mass(model, d), abs=1e-6)

    def test_enumeration_with_weaker_killing(self):
        model = killed_graph([(0, 1), (1, 2), (2, 0)], 3, 2.0)
        d = explicit_defects(model, [1, 0, 0])
        assert loop_mass_odd(model, d) == pytest.approx(enumerate_odd_loop_mass(model, d, 1e-12), abs=1e-6)

    def test_doubling_conductances(self, disk8):
        d = defects_from_punctures(disk8, [0.2 + 0.1j])
        assert loop_mass_odd(disk8.scaled(2.0), d) == pytest.approx(loop_mass_odd(disk8, d), rel=1e-12)

    def test_rerouted_defect(self, disk8):
        pts = [-0.3, 0.3 + 0.1j]
        a = defects_from_punctures(disk8, pts)
        b = defects_from_punctures(disk8, pts, directions=[2.0, -1.3])
        assert not np.array_equal(a.edge_parity, b.edge_parity)
        assert loop_mass_odd(disk8, b) == pytest.approx(loop_mass_odd(disk8, a), rel=1e-12)
        assert excursion_mass_odd(disk8, b) == pytest.approx(excursion_mass_odd(disk8, a), rel=1e-10)

    def test_positive(self, disk8):
        assert loop_mass_odd(disk8, defects_from_punctures(disk8, [0j])) > 0

    def test_twisted_laplacian_signs(self):
        model = killed_graph([(0, 1), (1, 2)], 3, 1.0)
        T = twisted_laplacian(model, explicit_defects(model, [1, 0])).toarray()
        assert T[0, 1] == 1.0 and T[1, 2] == -1.0



class TestExcursionMass:
    def test_no_defects(self, disk8):
        d = explicit_defects(disk8, np.zeros(len(disk8.edges)))
        assert excursion_mass_odd(disk8, d) == 0.0

    @pytest.mark.parametrize("flip,twist", [(1, 0), (0, 1), (1, 1)])
    def test_path_graph_enumeration(self, flip, twist):
        c1, c, c2 = 1.0, 2.0, 0.5
        model = graph_model(2, [(0, 1)], [(0, 0), (1, 1)], conductance=[c], ghost_conductance=[c1, c2])
        d = explicit_defects(model, [flip], ghost_twist=[0, twist])
        assert excursion_mass_odd(model, d) == pytest.approx(path_excursions(c1, c, c2, flip, twist), abs=1e-10)

    def test_grows_as_punctures_separate(self):
        model = build_disk_lattice(8)
        vals = [excursion_mass_odd(model, defects_from_punctures(model, [-a, a])) for a in (0.1, 0.25, 0.4, 0.55)]
        assert all(x < y for x, y in zip(vals, vals[1:]))

    def test_odd_count_rejected(self, disk8):
        with pytest.raises(DomainError):
            excursion_mass_odd(disk8, defects_from_punctures(disk8, [0j]))


# --- sampling and edge opening ----------------------------------------------------


class TestGFF:
    def test_centre_variance(self, disk8):
        s = GFFSampler(disk8)
        c = int(np.argmin(np.hypot(*disk8.pos.T)))
        x = s.sample(np.random.default_rng(0), 100_000)[:, c]
        G = s.factor.solve(np.eye(disk8.n_vertices)[c])[c]
        assert abs(x.var() - G) < 3 * G * math.sqrt(2 / len(x))

    def test_constant_boundary_mean(self, disk8):
        # without holes the harmonic extension of a constant is that constant
        assert np.allclose(GFFSampler(disk8, 1.5).mean, 1.5, atol=1e-12)

    def test_mean_linear_with_holes(self):
        model = build_disk_lattice(8, holes=[((0.3, 0.0), 0.2)])
        m1, m2 = GFFSampler(model, 1.0).mean, GFFSampler(model, 2.0).mean
        assert np.allclose(m2, 2 * m1, atol=1e-13)
        assert np.all((m1 > 0) & (m1 < 1))

    def test_zero_boundary_symmetric(self, disk8):
        s = GFFSampler(disk8)
        assert not s.mean.any()
        x = s.sample(np.random.default_rng(1), 20_000)
        assert abs(np.mean(x > 0) - 0.5) < 0.01


class TestOpenEdges:
    def test_opposite_signs_closed(self):
        model = graph_model(2, [(0, 1)], [(0, 0), (1, 1)])
        rng = np.random.default_rng(0)
        for _ in range(50):
            oe, _ = open_edges(np.array([1.0, -2.0]), model, rng)
            assert not oe[0]

    def test_large_product_open(self):
        model = graph_model(2, [(0, 1)], [(0, 0), (1, 1)])
        oe, _ = open_edges(np.array([30.0, 40.0]), model, np.random.default_rng(0))
        assert oe[0]

    def test_zero_boundary_never_opens(self, disk8):
        _, og = open_edges(np.full(disk8.n_vertices, 5.0), disk8, np.random.default_rng(0), v=0.0)
        assert not og.any()

    def test_two_vertex_probability(self):
        kill = 1.0
        model = graph_model(2, [(0, 1)], [(0, 0), (1, 1)], ghost_conductance=[kill, kill])
        cov = np.linalg.inv(model.laplacian.toarray())
        prec = model.laplacian.toarray()
        norm = 1 / (2 * math.pi * math.sqrt(np.linalg.det(cov)))

        def dens(y, x):
            q = prec[0, 0] * x * x + 2 * prec[0, 1] * x * y + prec[1, 1] * y * y
            return norm * math.exp(-0.5 * q) * -math.expm1(-2 * x * y)

        quad, _ = integrate.dblquad(dens, 0, 12, 0, 12, epsabs=1e-12)
        exact = 2 * quad  # both positive or both negative
        rng = np.random.default_rng(3)
        s = GFFSampler(model)
        n = 100_000
        fields = s.sample(rng, n)
        hits = sum(open_edges(f, model, rng)[0][0] for f in fields)
        p = hits / n
        assert abs(p - exact) < 3 * math.sqrt(exact * (1 - exact) / n)


# --- odd clusters -----------------------------------------------------------------


def face_ring(model, corner, size=1):
    """Open mask for the boundary of the square of lattice cells from corner (i, j)."""
    m = round(1 / model.mesh)
    idx = {(round(x * m), round(y * m)): k for k, (x, y) in enumerate(model.pos)}
    i0, j0 = corner
    ring = []
    for t in range(size):
        ring += [((i0 + t, j0), (i0 + t + 1, j0)), ((i0 + size, j0 + t), (i0 + size, j0 + t + 1)),
                 ((i0 + t, j0 + size), (i0 + t + 1, j0 + size)), ((i0, j0 + t), (i0, j0 + t + 1))]
    want = {frozenset((idx[a], idx[b])) for a, b in ring}
    return np.array([frozenset((int(a), int(b))) in want for a, b in model.edges])


class TestOddDetection:
    def test_plaquette_ring_around_one_puncture(self, disk8):
        d = defects_from_punctures(disk8, [0.3 + 0.1j, -0.3])
        state = ClusterState(disk8, face_ring(disk8, (2, 0)))
        assert detect_odd_cluster(state, d)

    def test_ring_around_both(self, disk8):
        d = defects_from_punctures(disk8, [0.3 + 0.1j, -0.3])
        open_e = face_ring(disk8, (-4, -2), size=7)
        assert open_e.sum() == 28
        assert not detect_odd_cluster(ClusterState(disk8, open_e), d)

    def test_ring_with_exclusion(self, disk8):
        d = defects_from_punctures(disk8, [0.3 + 0.1j, -0.3])
        state = ClusterState(disk8, face_ring(disk8, (2, 0)))
        assert detect_disconnection(state, d, [((0.3, 0.1), 0.05), ((-0.3, 0.0), 0.05)])
        # a disk reaching the ring rules the cluster out
        assert not detect_disconnection(state, d, [((0.3, 0.1), 0.2), ((-0.3, 0.0), 0.05)])

    def test_surround(self, disk8):
        d = defects_from_punctures(disk8, [0j])
        state = ClusterState(disk8, face_ring(disk8, (-2, -2), size=4))
        # the nearest ring vertex is at distance 0.198 from the face centre
        assert detect_surround(state, d, (1 / 16, 1 / 16), 0.15)
        assert not detect_surround(state, d, (1 / 16, 1 / 16), 0.25)

    @settings(max_examples=120, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_against_cycle_basis(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 13))
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        pick = rng.random(len(pairs)) < 0.35
        edges = [p for p, k in zip(pairs, pick) if k] or [(0, 1)]
        n_g = int(rng.integers(1, 4))
        gedges = [(int(rng.integers(n)), int(rng.integers(n_g))) for _ in range(int(rng.integers(1, 6)))]
        gedges += [(0, g) for g in range(n_g)]
        model = graph_model(n, edges, gedges)
        d = explicit_defects(model, rng.integers(0, 2, len(edges)), rng.integers(0, 2, len(gedges)),
                             rng.integers(0, 2, n_g))
        oe = rng.random(len(edges)) < 0.6
        og = rng.random(len(gedges)) < 0.3
        state = ClusterState(model, oe, og)
        assert detect_odd_cluster(state, d) == brute_force_odd(model, d, oe, og)
        keys = rng.random(n)
        t = float(rng.random())
        got = state.surround_statistic(d, keys) >= t
        assert got == brute_force_odd(model, d, oe, og, keep=keys >= t)


# --- Monte Carlo ------------------------------------------------------------------


class TestEstimatorReport:
    def test_fields(self):
        r = EstimatorReport.from_count(30, 100, seed=4, target=0.25, v=1.0)
        assert r.p_hat == 0.3
        assert r.std_err == pytest.approx(math.sqrt(0.3 * 0.7 / 100))
        assert r.z_score == pytest.approx((0.3 - 0.25) / r.std_err)
        assert r.seed == 4 and r.params["v"] == 1.0

    def test_degenerate(self):
        r = EstimatorReport.from_count(100, 100, seed=0, target=1.0)
        assert r.std_err == 0 and r.z_score == 0.0


class TestIdentity:
    @pytest.mark.parametrize("pts,v", [([0j], 0.0), ([-0.3, 0.3], 0.0), ([-0.3, 0.3], 1.0)])
    def test_small_run(self, disk8, pts, v):
        rep = verify_topological_identity(disk8, defects_from_punctures(disk8, pts), v, 20_000, seed=9)
        assert abs(rep.z_score) <= 4

    def test_odd_count_needs_zero_boundary(self, disk8):
        with pytest.raises(ValueError):
            verify_topological_identity(disk8, defects_from_punctures(disk8, [0j]), 1.0, 10, seed=0)

    def test_threads_do_not_change_samples(self, disk8):
        d = defects_from_punctures(disk8, [-0.3, 0.3])
        a = odd_cluster_statistics(disk8, d, 1.0, np.zeros(disk8.n_vertices), 1000, seed=5, threads=1)
        for t in (2, 8):
            b = odd_cluster_statistics(disk8, d, 1.0, np.zeros(disk8.n_vertices), 1000, seed=5, threads=t)
            assert np.array_equal(a, b)

    def test_boundary_value_lowers_probability(self, disk8):
        d = defects_from_punctures(disk8, [-0.3, 0.3])
        reps = [verify_topological_identity(disk8, d, v, 20_000, seed=2) for v in (0.0, 0.5, 1.0, 2.0)]
        for a, b in zip(reps, reps[1:]):
            assert b.p_hat <= a.p_hat + 3 * math.hypot(a.std_err, b.std_err)
        targets = [r.exact_target for r in reps]
        assert all(x > y for x, y in zip(targets, targets[1:]))

    def test_exact_target_matches_masses(self, disk8):
        d = defects_from_punctures(disk8, [-0.3, 0.3])
        mass = loop_mass_odd(disk8, d) + 4 * excursion_mass_odd(disk8, d)
        assert exact_no_odd_probability(disk8, d, 2.0) == pytest.approx(math.exp(-mass), rel=1e-14)


class TestEvents:
    def test_surround_below_mesh_is_no_odd_cluster(self, disk8):
        rep = estimate_event(disk8, "one_point_surround", {"point": (0.0, 0.0), "r": 1e-3}, 5000, seed=8)
        d = defects_from_punctures(disk8, [0j])
        stat = odd_cluster_statistics(disk8, d, 0.0, np.zeros(disk8.n_vertices), 5000, seed=8)
        assert rep.p_hat == np.mean(stat == -np.inf)

    def test_surround_large_r_near_one(self, disk8):
        rep = estimate_event(disk8, "one_point_surround", {"point": (0.0, 0.0), "r": 0.9}, 5000, seed=1)
        assert rep.p_hat > 0.99

    def test_ladder_monotone(self, disk8):
        reps = estimate_ladder(disk8, "one_point_surround", {"point": (0.0, 0.0)}, [0.1, 0.2, 0.4], 5000, seed=1)
        ps = [r.p_hat for r in reps]
        assert ps == sorted(ps)

    def test_covering_disks(self, disk8):
        params = {"points": [(-0.3, 0.0), (0.3, 0.0)], "eps": [0.9, 0.9]}
        assert estimate_event(disk8, "disconnection", params, 2000, seed=0).p_hat == 1.0

    def test_disconnection_between_extremes(self, disk8):
        params = {"points": [(-0.3, 0.0), (0.3, 0.0)], "eps": [0.1, 0.1]}
        p = estimate_event(disk8, "disconnection", params, 5000, seed=0).p_hat
        d = defects_from_punctures(disk8, [-0.3, 0.3])
        assert exact_no_odd_probability(disk8, d, 0.0) < p < 1.0

    def test_holes_event(self):
        model = build_disk_lattice(12, holes=[((-0.4, 0.0), 0.1), ((0.4, 0.0), 0.1)])
        params = {"points": [(-0.4, 0.0), (0.4, 0.0)]}
        rep = estimate_event(model, "holes_disconnection", params, 5000, seed=0)
        d = defects_from_punctures(model, [-0.4, 0.4], snap=False)
        target = exact_no_odd_probability(model, d, 0.0)
        assert abs(rep.p_hat - target) < 4 * rep.std_err

    def test_holes_event_needs_holes(self, disk8):
        with pytest.raises(ValueError):
            estimate_event(disk8, "holes_disconnection", {"points": [(0.1, 0.0)]}, 10, seed=0)


class TestScalingFit:
    def fake(self, xs, ps):
        return [EstimatorReport(p, 0.0, 1, 0, params={"x": x}) for x, p in zip(xs, ps)]

    def test_pure(self):
        xs = [0.02, 0.04, 0.08, 0.16]
        fit = scaling_fit(self.fake(xs, [x ** 0.125 for x in xs]))
        assert fit.exponent == pytest.approx(0.125, abs=1e-12)
        assert fit.intercept == pytest.approx(0.0, abs=1e-12)
        assert fit.stderr < 1e-12

    def test_log_corrected(self):
        xs = [1e-2, 1e-3, 1e-4, 1e-5]
        ps = [x ** 0.125 * math.sqrt(math.log(1 / x)) for x in xs]
        fit = scaling_fit(self.fake(xs, ps), FitMode.LOG_CORRECTED)
        assert fit.exponent == pytest.approx(0.125, abs=1e-12)

    def test_needs_three_points(self):
        with pytest.raises(ValueError):
            scaling_fit(self.fake([0.1, 0.2], [0.5, 0.6]))

    def test_unpacks(self):
        xs = [0.1, 0.2, 0.4]
        e, c, s = scaling_fit(self.fake(xs, [2 * x ** 0.5 for x in xs]))
        assert e == pytest.approx(0.5) and c == pytest.approx(math.log(2))
