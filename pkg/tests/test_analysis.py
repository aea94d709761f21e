import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odyn.analysis import (
    bifurcation_sweep,
    consensus_time,
    dirichlet_energy,
    grandpp_closed_form,
    opinion_diameter,
    reduced_equilibria,
    save_bifurcation_csv,
    scrambling_check,
)
from odyn.fixtures import (
    random_row_stochastic,
    toy_adjacency,
    toy_graph,
    toy_initial_state,
)
from odyn.graphs import from_edge_list, laplacian
from odyn.integrate import euler_integrate
from odyn.kernels import KernelState, kernel_setup


def fully_connected(n):
    return from_edge_list(
        [(i, j, 1.0) for i in range(n) for j in range(n) if i != j], n
    )


class TestDirichletEnergy:
    def test_consensus_is_zero(self):
        g = toy_graph()
        assert dirichlet_energy(np.ones((3, 2)) * 0.7, g) == 0.0

    def test_toy_state_direct_summation_oracle(self):
        g = fully_connected(3)
        x = toy_initial_state()
        brute = 0.0
        for i in range(3):
            for j in range(3):
                if i != j:
                    brute += np.sum((x[i] - x[j]) ** 2)
        brute /= 3
        val = dirichlet_energy(x, g)
        assert val == pytest.approx(brute, abs=1e-15)
        assert val == pytest.approx(0.628, abs=1e-12)

    def test_quadratic_homogeneity(self):
        g = toy_graph()
        x = toy_initial_state()
        assert dirichlet_energy(3.0 * x, g) == pytest.approx(
            9.0 * dirichlet_energy(x, g), rel=1e-12
        )

    def test_empty_graph(self):
        g = from_edge_list([], 3)
        assert dirichlet_energy(toy_initial_state(), g) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="rows"):
            dirichlet_energy(np.zeros((2, 2)), toy_graph())

    @settings(max_examples=40)
    @given(st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_zero_iff_edge_connected_pairs_equal(self, n, seed):
        rng = np.random.default_rng(seed)
        edges = [
            (i, j, 1.0)
            for i in range(n)
            for j in range(n)
            if i != j and rng.uniform() < 0.5
        ]
        g = from_edge_list(edges, n)
        x = rng.standard_normal((n, 2))
        energy = dirichlet_energy(x, g)
        pairs_equal = all(
            np.allclose(x[s], x[d], atol=1e-12) for s, d, _ in g.to_edge_list()
        )
        assert (energy <= 1e-12) == pairs_equal


class TestOpinionDiameter:
    def test_consensus_zero(self):
        assert opinion_diameter(np.ones((4, 3)) * 2.5) == 0.0

    def test_toy_state_hand_value(self):
        # column spreads: 0.32, 0.50, 0.41
        assert opinion_diameter(toy_initial_state()) == pytest.approx(0.50, abs=1e-12)

    def test_permutation_invariance(self):
        x = toy_initial_state()
        assert opinion_diameter(x[[2, 0, 1]]) == opinion_diameter(x)

    def test_vector_input_reads_as_one_option(self):
        assert opinion_diameter(np.array([1.0, 5.0, 2.0])) == 4.0


class TestConsensusTime:
    def test_laplacian_kernel_reaches_consensus(self):
        setup = kernel_setup("laplacian", toy_graph(), toy_initial_state())
        traj = euler_integrate(
            setup.state0, setup.rhs, 0.05, 400, diameter_fn=opinion_diameter
        )
        t = consensus_time(traj, 1e-3)
        assert t is not None and 0.0 < t <= 20.0

    def test_saturated_kernel_with_input_never_consents(self):
        x0 = toy_initial_state()
        setup = kernel_setup("bimp", toy_graph(), x0, b=x0)
        traj = euler_integrate(
            setup.state0, setup.rhs, 0.05, 400, damping=1.0,
            diameter_fn=opinion_diameter,
        )
        assert consensus_time(traj, 1e-3) is None

    def test_consensus_start_returns_zero(self):
        setup = kernel_setup("laplacian", toy_graph(), np.ones((3, 2)))
        traj = euler_integrate(
            setup.state0, setup.rhs, 0.1, 5, diameter_fn=opinion_diameter
        )
        assert consensus_time(traj, 1e-3) == 0.0


class TestBifurcation:
    def test_supercritical_structure_with_fitted_damping(self):
        # d = 0.8952, alpha = 1: the critical attention is d / 4 = 0.2238.
        d = 0.8952
        u_star = d / 4.0
        below = reduced_equilibria(u_star * 0.9, d, 1.0)
        above = reduced_equilibria(u_star * 1.1, d, 1.0)
        assert len(below) == 1 and below[0][0] == pytest.approx(0.0, abs=1e-10)
        assert below[0][1] is True
        assert len(above) == 3
        ys = [y for y, _ in above]
        assert ys[0] < 0 < ys[2] and ys[1] == pytest.approx(0.0, abs=1e-10)
        stabilities = [s for _, s in above]
        assert stabilities == [True, False, True]

    def test_equilibria_at_half(self):
        # u = 0.5, d = 1, alpha = 1: nonzero equilibria solve y = tanh(2y).
        y_oracle = 1.0
        for _ in range(200):
            y_oracle = math.tanh(2.0 * y_oracle)
        eq = reduced_equilibria(0.5, 1.0, 1.0)
        assert len(eq) == 3
        assert eq[2][0] == pytest.approx(y_oracle, abs=1e-10)
        assert eq[0][0] == pytest.approx(-y_oracle, abs=1e-10)
        assert eq[2][0] == pytest.approx(0.9575, abs=1e-3)

    def test_positive_input_unfolds_the_pitchfork(self):
        # At the critical attention a positive input leaves exactly one
        # equilibrium, on the positive branch.
        eq = reduced_equilibria(0.25, 1.0, 1.0, b=0.05)
        assert len(eq) == 1
        y, stable = eq[0]
        assert y > 0 and stable

    def test_sweep_branch_counts(self):
        points = bifurcation_sweep((0.05, 0.6, 112), d=1.0, alpha=1.0)
        for p in points:
            if p.u < 0.24:
                assert len(p.equilibria) == 1
            elif p.u > 0.26:
                assert len(p.equilibria) == 3
                assert [s for _, s in p.equilibria] == [True, False, True]

    def test_sweep_validation(self):
        with pytest.raises(ValueError, match="lo < hi"):
            bifurcation_sweep((0.5, 0.1, 10), 1.0, 1.0)
        with pytest.raises(ValueError, match="two sweep"):
            bifurcation_sweep((0.1, 0.5, 1), 1.0, 1.0)
        with pytest.raises(ValueError, match="damping"):
            bifurcation_sweep((0.1, 0.5, 10), 0.0, 1.0)

    def test_csv_export(self, tmp_path):
        path = tmp_path / "bif.csv"
        save_bifurcation_csv(bifurcation_sweep((0.1, 0.3, 3), 1.0, 1.0), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "u,y,stable"
        assert all(len(line.split(",")) == 3 for line in lines[1:])


class TestMonotoneExtremes:
    @settings(max_examples=30)
    @given(st.integers(2, 6), st.integers(1, 20), st.integers(0, 2**32 - 1))
    def test_discrete_averaging_contracts_extremes(self, n, steps, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(n)
        for _ in range(steps):
            a = random_row_stochastic(n, rng, zero_diagonal=False)
            x_next = a @ x
            assert x_next.max() <= x.max() + 1e-12
            assert x_next.min() >= x.min() - 1e-12
            x = x_next


class TestClosedForm:
    def path_graph(self, n=5):
        edges = []
        for i in range(n - 1):
            edges += [(i, i + 1, 1.0), (i + 1, i, 1.0)]
        return from_edge_list(edges, n)

    def test_kernel_mode_is_constant_without_source(self):
        lap = laplacian(self.path_graph())
        x0 = np.ones((5, 2)) * 0.4
        sol = grandpp_closed_form(lap, x0, np.zeros((5, 2)))
        np.testing.assert_allclose(sol.evaluate(3.7), x0, atol=1e-10)

    def test_reconstructs_initial_state(self):
        rng = np.random.default_rng(12)
        lap = laplacian(self.path_graph())
        x0 = rng.standard_normal((5, 3))
        b = rng.standard_normal((5, 3))
        sol = grandpp_closed_form(lap, x0, b)
        assert np.max(np.abs(sol.evaluate(0.0) - x0)) <= 1e-8

    def test_matches_euler_integration(self):
        rng = np.random.default_rng(13)
        g = self.path_graph()
        lap = laplacian(g)
        x0 = rng.standard_normal((5, 2))
        b = rng.standard_normal((5, 2))
        sol = grandpp_closed_form(lap, x0, b)
        setup = kernel_setup("laplacian-source", g, x0, b=b)
        traj = euler_integrate(setup.state0, setup.rhs, 1e-3, 5000, record_every=500)
        worst = max(
            np.max(np.abs(traj.states[i] - sol.evaluate(traj.times[i])))
            for i in range(len(traj.times))
        )
        assert worst <= 5e-3

    def test_matches_rk4_integration_tightly(self):
        from odyn.integrate import rk4_integrate

        rng = np.random.default_rng(15)
        g = self.path_graph()
        lap = laplacian(g)
        x0 = rng.standard_normal((5, 2))
        b = rng.standard_normal((5, 2))
        sol = grandpp_closed_form(lap, x0, b)
        setup = kernel_setup("laplacian-source", g, x0, b=b)
        traj = rk4_integrate(setup.state0, setup.rhs, 1e-2, 500, record_every=50)
        worst = max(
            np.max(np.abs(traj.states[i] - sol.evaluate(traj.times[i])))
            for i in range(len(traj.times))
        )
        assert worst <= 1e-6

    def test_nonsymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            grandpp_closed_form(np.array([[1.0, -1.0], [0.0, 0.0]]), np.zeros((2, 1)), np.zeros((2, 1)))

    def test_disconnected_graph_rejected(self):
        g = from_edge_list([(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)], 4)
        with pytest.raises(ValueError, match="repeated"):
            grandpp_closed_form(laplacian(g), np.zeros((4, 1)), np.zeros((4, 1)))


class TestScrambling:
    def test_two_copies_of_toy_influence(self):
        a = toy_adjacency()
        x0 = toy_initial_state()[:, :1]
        report = scrambling_check([a, a], zeta=0.3, x0=x0)
        assert report.window == 2
        assert report.scrambling and report.delta > 0
        # the window product is strictly positive, hand-checkable
        assert np.all(a @ a > 0)
        # delta equals the worst-pair best shared column of the product
        phi = a @ a
        masses = [
            np.max(np.minimum(phi[i], phi[k]))
            for i in range(3)
            for k in range(i + 1, 3)
        ]
        assert report.delta == pytest.approx(min(masses), abs=1e-15)

    def test_identity_matrices_are_not_scrambling(self):
        x0 = np.array([[0.0], [1.0], [2.0]])
        report = scrambling_check([np.eye(3), np.eye(3)], zeta=0.5, x0=x0)
        assert not report.scrambling
        assert report.delta == 0.0
        assert report.diameters == (2.0, 2.0, 2.0)

    def test_long_random_sequence_contracts_exponentially(self):
        rng = np.random.default_rng(14)
        n, zeta, windows = 5, 0.05, 50
        mats = []
        for _ in range(windows * (n - 1)):
            raw = zeta + (1.0 - n * zeta) * rng.dirichlet(np.ones(n), size=n)
            mats.append(raw)
        x0 = rng.standard_normal((n, 1))
        report = scrambling_check(mats, zeta=zeta, x0=x0)
        assert report.scrambling and report.delta > 0
        diam = np.array(report.diameters)
        boundaries = diam[:: n - 1]
        assert np.all(np.diff(boundaries) <= 1e-12)
        logs = np.log(diam[diam > 1e-300])
        slope = np.polyfit(np.arange(len(logs)), logs, 1)[0]
        assert slope < 0

    def test_non_stochastic_rejected(self):
        with pytest.raises(ValueError, match="row-stochastic"):
            scrambling_check([np.eye(3) * 2.0], zeta=0.1, x0=np.zeros((3, 1)))

    def test_zeta_floor_enforced(self):
        m = np.array([[0.99, 0.01], [0.5, 0.5]])
        with pytest.raises(ValueError, match="positivity floor"):
            scrambling_check([m], zeta=0.1, x0=np.zeros((2, 1)))

    def test_report_json(self):
        a = toy_adjacency()
        report = scrambling_check([a, a], zeta=0.3, x0=toy_initial_state()[:, :1])
        payload = json.loads(report.to_json())
        assert payload["scrambling"] is True
        assert payload["window"] == 2
        assert len(payload["diameters"]) == 3
