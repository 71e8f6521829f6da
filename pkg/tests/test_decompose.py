"""Feasibility solver: fast bipartite test, projection solver, certificates."""

import numpy as np
import pytest

from covnet.decompose import (
    Decomposition,
    DualWitness,
    Feasibility,
    SolverOptions,
    decompose,
    decomposition_from_json,
    fast_check_bipartite,
    verify_decomposition,
    verify_witness,
    witness_from_json,
)
from covnet.network import Network
from support import (
    random_boundary_instance,
    random_dual_element,
    random_feasible,
    star_network,
)

PATH_M = np.array([[1, 1, 0], [1, 2, 1], [0, 1, 1]], dtype=float)
PATH_SPLIT = {
    "s0": np.array([[1, 1, 0], [1, 1, 0], [0, 0, 0]], dtype=float),
    "s1": np.array([[0, 0, 0], [0, 1, 1], [0, 1, 1]], dtype=float),
}


class TestFastCheck:
    def test_path_feasible(self, path_net):
        assert fast_check_bipartite(path_net, PATH_M, 1e-7) is Feasibility.FEASIBLE

    def test_triangle_ones_infeasible(self, triangle_net):
        assert (
            fast_check_bipartite(triangle_net, np.ones((3, 3)), 1e-7)
            is Feasibility.INFEASIBLE
        )

    def test_diagonal_always_feasible(self, rng):
        net = star_network(5)
        m = np.diag(rng.random(5))
        assert fast_check_bipartite(net, m, 1e-9) is Feasibility.FEASIBLE

    def test_forbidden_entry_infeasible(self, path_net):
        m = PATH_M.copy()
        m[0, 2] = m[2, 0] = 0.5
        assert fast_check_bipartite(path_net, m, 1e-7) is Feasibility.INFEASIBLE

    def test_non_bipartite_unavailable(self):
        net = Network(("A1", "A2", "A3"), ("a",), ((0, 1, 2),))
        with pytest.raises(ValueError, match="fast path unavailable"):
            fast_check_bipartite(net, np.eye(3), 1e-7)


class TestDecompose:
    def test_path_feasible(self, path_net, backend):
        res = decompose(path_net, PATH_M, backend=backend)
        assert res.status is Feasibility.FEASIBLE
        assert verify_decomposition(path_net, PATH_M, res.decomposition, 1e-7)

    def test_triangle_ones_witness(self, triangle_net, backend):
        res = decompose(triangle_net, np.ones((3, 3)), backend=backend)
        assert res.status is Feasibility.INFEASIBLE
        assert verify_witness(triangle_net, np.ones((3, 3)), res.witness, 1e-7)
        # The recovered witness approaches (2I - J)/3, inner product -1.
        assert res.witness.inner_product == pytest.approx(-1.0, abs=1e-4)

    def test_zero_matrix(self, triangle_net):
        res = decompose(triangle_net, np.zeros((3, 3)))
        assert res.status is Feasibility.FEASIBLE
        assert res.sweeps == 0
        assert all(np.all(t == 0) for t in res.decomposition.terms.values())

    def test_forbidden_entry_immediate_witness(self, path_net):
        m = PATH_M.astype(complex)
        m[0, 2] = 0.3 + 0.4j
        m[2, 0] = np.conj(m[0, 2])
        res = decompose(path_net, m)
        assert res.status is Feasibility.INFEASIBLE
        w = res.witness.w
        # Mass only on the forbidden pair; source blocks vacuously PSD.
        assert abs(np.linalg.norm(w) - 1.0) < 1e-12
        assert w[0, 1] == 0 and w[1, 2] == 0
        # Inner product is -sqrt(2)|m_02| after unit normalization.
        assert res.witness.inner_product == pytest.approx(-np.sqrt(2) * 0.5, abs=1e-12)
        assert verify_witness(path_net, m, res.witness, 1e-7)

    def test_sweep_budget_exhausted_is_undecided(self, triangle_net):
        opts = SolverOptions(max_sweeps=1, feasibility_tol=1e-12, stall_tol=1e-300)
        res = decompose(triangle_net, random_feasible(triangle_net, np.random.default_rng(1)), opts)
        assert res.status is Feasibility.UNDECIDED
        assert "exhausted" in res.message

    def test_monotone_residual(self, triangle_net, rng, backend):
        m = random_boundary_instance(triangle_net, rng)
        res = decompose(triangle_net, m, backend=backend)
        hist = res.residual_history
        assert np.all(np.diff(hist) <= 1e-12)

    def test_backends_agree(self, path_net, triangle_net, rng):
        from covnet.decompose import available_backends

        if len(available_backends()) < 2:
            pytest.skip("compiled backend unavailable")
        multi = Network(
            ("A1", "A2", "A3", "A4"), ("a", "b", "c"), ((0, 1), (1, 2), (0, 2, 3))
        )
        for net in (path_net, triangle_net, multi):
            for _ in range(10):
                m = random_boundary_instance(net, rng)
                ra = decompose(net, m, backend="compiled")
                rb = decompose(net, m, backend="python")
                assert ra.status == rb.status
                assert ra.residual_norm == pytest.approx(rb.residual_norm, abs=1e-9)

    def test_deterministic_reruns(self, triangle_net, rng, backend):
        m = random_boundary_instance(triangle_net, rng)
        a = decompose(triangle_net, m, backend=backend)
        b = decompose(triangle_net, m, backend=backend)
        assert a.status == b.status and a.sweeps == b.sweeps
        assert np.array_equal(a.residual_history, b.residual_history)

    def test_non_ndcs_network_still_sound(self, rng):
        # No completeness claim for double-common-source networks, but any
        # verdict must carry a verifiable certificate.
        net = Network(("A1", "A2", "A3", "A4"), ("a", "b"), ((0, 1, 2), (0, 1, 3)))
        for _ in range(5):
            m = random_feasible(net, rng)
            res = decompose(net, m)
            assert res.status is Feasibility.FEASIBLE
            assert verify_decomposition(net, m, res.decomposition, 1e-7)
        bad = np.eye(4)
        bad[2, 3] = bad[3, 2] = 0.9  # pair (A3, A4) shares no source
        res = decompose(net, bad)
        assert res.status is Feasibility.INFEASIBLE
        assert verify_witness(net, bad, res.witness, 1e-7)

    def test_single_party_network(self):
        net = Network(("A1",), ("s",), ((0,),))
        assert decompose(net, [[2.0]]).status is Feasibility.FEASIBLE
        res = decompose(net, [[-1.0]])
        assert res.status is Feasibility.INFEASIBLE
        assert verify_witness(net, [[-1.0]], res.witness, 1e-7)


class TestVerifyDecomposition:
    def test_hand_split(self, path_net):
        d = Decomposition(PATH_SPLIT, PATH_M, 0.0)
        assert verify_decomposition(path_net, PATH_M, d, 1e-9)

    def test_support_violation(self, path_net):
        terms = {k: v.copy() for k, v in PATH_SPLIT.items()}
        terms["s0"][0, 2] = terms["s0"][2, 0] = 0.1
        check = verify_decomposition(path_net, PATH_M, Decomposition(terms, PATH_M, 0.0), 1e-7)
        assert not check
        assert any("support violation" in r for r in check.reasons)

    def test_residual_violation(self, path_net):
        m_off = PATH_M + 0.01 * np.eye(3)
        check = verify_decomposition(
            path_net, m_off, Decomposition(PATH_SPLIT, m_off, 0.0), 1e-7
        )
        assert not check
        assert any("residual" in r for r in check.reasons)

    def test_non_psd_term(self, path_net):
        terms = {
            "s0": np.array([[1, 2, 0], [2, 1, 0], [0, 0, 0]], dtype=float),
            "s1": PATH_M - np.array([[1, 2, 0], [2, 1, 0], [0, 0, 0]], dtype=float),
        }
        # Second term also breaks support, but the PSD failure must be named.
        check = verify_decomposition(path_net, PATH_M, Decomposition(terms, PATH_M, 0.0), 1e-9)
        assert any("not PSD" in r for r in check.reasons)


class TestVerifyWitness:
    def test_hand_witness(self, triangle_net):
        w = 2 * np.eye(3) - np.ones((3, 3))
        w = w / np.linalg.norm(w)
        wit = DualWitness(w, float(np.vdot(w, np.ones((3, 3))).real))
        assert wit.inner_product == pytest.approx(-1.0, abs=1e-15)
        assert verify_witness(triangle_net, np.ones((3, 3)), wit, 1e-7)

    def test_no_witness_against_feasible(self, path_net, rng):
        m = random_feasible(path_net, rng)
        for _ in range(20):
            w = random_dual_element(path_net, rng)
            wit = DualWitness(w, float(np.vdot(w, m).real))
            assert not verify_witness(path_net, m, wit, 1e-9)

    def test_zero_witness_rejected(self, triangle_net):
        wit = DualWitness(np.zeros((3, 3)), 0.0)
        assert not verify_witness(triangle_net, np.ones((3, 3)), wit, 1e-9)


class TestConeLaws:
    def test_scaling_and_sums_stay_feasible(self, triangle_net, rng):
        for _ in range(5):
            m1 = random_feasible(triangle_net, rng)
            m2 = random_feasible(triangle_net, rng)
            r = float(rng.uniform(0.1, 5.0))
            for m in (r * m1, m1 + m2):
                res = decompose(triangle_net, m)
                assert res.status is Feasibility.FEASIBLE

    def test_weak_duality(self, triangle_net, rng):
        for _ in range(20):
            m = random_feasible(triangle_net, rng)
            w = random_dual_element(triangle_net, rng)
            assert float(np.vdot(w, m).real) >= -1e-9


class TestJson:
    def test_decomposition_round_trip(self, path_net):
        res = decompose(path_net, PATH_M)
        back = decomposition_from_json(res.decomposition.to_json())
        assert verify_decomposition(path_net, PATH_M, back, 1e-6)

    def test_witness_round_trip(self, triangle_net):
        res = decompose(triangle_net, np.ones((3, 3)))
        back = witness_from_json(res.witness.to_json())
        assert verify_witness(triangle_net, np.ones((3, 3)), back, 1e-6)
