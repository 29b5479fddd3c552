import numpy as np
import pytest

from gadgetforge.gadgets import (
    XYZCoupling,
    antisym_gadget,
    basic_gadget,
    pair_h0,
    third_order_chain_gadget,
    tim_gadget,
)
from gadgetforge.pauli import PauliOperator, identity, two_body
from gadgetforge.sw import (
    BlockConditionError,
    compose_parallel,
    ground_split,
    matrix_from_operator,
    measure_simulation,
    operator_from_matrix,
    perturbative_effective,
    sw_numerical_effective,
)
from gadgetforge.spectra import eig_dense


def opnorm(op):
    return float(np.linalg.norm(matrix_from_operator(op), 2))


class TestGroundSplit:
    def test_symmetric_pair(self):
        sp = ground_split(pair_h0(XYZCoupling(1, 1, 1), 2, 0, 1))
        assert sp.ground_dim == 1
        # unique ground state is the singlet
        psi = sp.projector_minus[:, 0]
        singlet = np.zeros(4, dtype=complex)
        singlet[2], singlet[1] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        assert abs(abs(np.vdot(psi, singlet)) - 1) < 1e-12

    def test_zz_pair_two_dim(self):
        h0 = 0.5 * two_body(2, 0, 1, "ZZ") + identity(2, 0.5)
        sp = ground_split(h0)
        assert sp.ground_dim == 2
        # ground space is span{|01>, |10>}: basis indices 1 and 2
        for j in range(2):
            v = sp.projector_minus[:, j]
            assert abs(v[0]) < 1e-12 and abs(v[3]) < 1e-12

    def test_antisym_heavy_spectrum(self):
        h0 = 0.5 * (two_body(2, 0, 1, "XZ") - two_body(2, 0, 1, "ZX")) + identity(
            2, 1.0
        )
        sp = ground_split(h0)
        assert sp.ground_dim == 1
        assert np.allclose(sp.plus_eigenvalues, [1, 1, 2])

    def test_ambiguous_cluster(self):
        from gadgetforge.pauli import single

        op = single(1, 0, "Z", 1e-9)  # levels 2e-9 apart, inside 10*deg_tol
        with pytest.raises(ValueError, match="ambiguous"):
            ground_split(op, deg_tol=1e-9)


class TestPerturbativeEffective:
    def test_basic_xy_opposite(self):
        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], 1e4)
        eff = perturbative_effective(g)
        want = g.predicted_target + identity(2, g.predicted_shift)
        assert opnorm(eff - want) < 1e-12
        xx = eff.coefficient(((0, "X"), (1, "X")))
        assert xx == pytest.approx(1.0, abs=1e-12)

    def test_basic_same_side_negative(self):
        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0), (1, 1.0)], [], 1e4)
        eff = perturbative_effective(g)
        assert eff.coefficient(((0, "X"), (1, "X"))) == pytest.approx(-1.0)

    def test_chain_heisenberg_quarter(self):
        g = third_order_chain_gadget(XYZCoupling(1, 1, 1), 1e4)
        eff = perturbative_effective(g).traceless()
        assert opnorm(eff - g.predicted_target) < 1e-10
        assert g.predicted_target.coefficient(((0, "X"), (1, "X"))) == pytest.approx(
            0.25
        )

    def test_block_condition_gate(self):
        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], 1e4)
        g.v_extra = two_body(g.n_qubits, 0, 2, "XX")  # touches the ancilla
        with pytest.raises(BlockConditionError):
            perturbative_effective(g)


class TestNumericalEffective:
    def test_exact_block_diagonal(self):
        # h0 ground space already hosts the target: eta must vanish
        g = basic_gadget(XYZCoupling(1, 1, 1), [(0, 1.0)], [(1, 1.0)], 1e4)
        h = 1e4 * g.h0
        eff, eta = sw_numerical_effective(h, g.encoding)
        assert eta < 1e-9
        assert opnorm(eff) < 1e-8

    def test_basic_gadget_converges(self):
        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], 1e4)
        diffs = {}
        for d in (1e4, 1e5):
            eff, _ = sw_numerical_effective(g.assemble(d), g.encoding)
            diffs[d] = opnorm(eff.traceless() - g.predicted_target)
        assert diffs[1e5] < diffs[1e4]
        # order-2 convergence: a decade of delta is sqrt(10) of error
        assert diffs[1e5] <= 10 * diffs[1e4] / np.sqrt(10)

    def test_tim_large_delta(self):
        g = tim_gadget({(0, 1): 1.0}, {0: 0.5, 1: 0.5}, 1e5)
        eff, _ = sw_numerical_effective(g.assemble(1e5), g.encoding)
        assert opnorm(eff.traceless() - g.predicted_target.traceless()) < 5e-2

    def test_chain_third_order_ratio(self):
        g = third_order_chain_gadget(XYZCoupling(1, 1, 1), 1e4)
        diffs = {}
        for d in (1e4, 1e5):
            eff, _ = sw_numerical_effective(g.assemble(d), g.encoding)
            diffs[d] = opnorm(eff.traceless() - g.predicted_target)
        assert diffs[1e5] <= 10 * diffs[1e4] / 10 ** (1 / 3)


class TestMeasureSimulation:
    def test_second_order_exponent(self):
        g = basic_gadget(XYZCoupling(1, 1, 1), [(0, 1.0)], [(1, 1.0)], 1e5)
        rep = measure_simulation(g, [1e2, 1e3, 1e4, 1e5])
        assert rep.eps_exponent <= -0.45
        assert rep.eta_exponent <= -0.45

    def test_eta_third_order_exponent(self):
        g = third_order_chain_gadget(XYZCoupling(1, 1, 1), 1e5)
        rep = measure_simulation(g, [1e2, 1e3, 1e4, 1e5])
        assert rep.eps_exponent <= -0.30
        assert rep.eta_exponent <= -0.30

    def test_weyl_epsilon_bound(self):
        # eigenvalue error never exceeds the operator-norm error of the
        # extracted effective Hamiltonian
        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], 1e4)
        for d in (1e3, 1e4):
            h = g.assemble(d)
            vals = eig_dense(h).eigenvalues[: g.encoding.logical_dim]
            tv = np.linalg.eigvalsh(matrix_from_operator(g.predicted_target))
            eps = np.max(np.abs(vals - g.predicted_shift - tv))
            eff, _ = sw_numerical_effective(h, g.encoding)
            bound = opnorm(
                eff - g.predicted_target - identity(2, g.predicted_shift)
            )
            assert eps <= bound + 1e-9

    def test_delta_precondition(self):
        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], 10)
        with pytest.raises(ValueError, match="heavy term must dominate"):
            measure_simulation(g, [1.0, 2.0, 4.0, 8.0])

    def test_few_deltas_no_fit(self):
        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], 1e4)
        rep = measure_simulation(g, [1e3, 1e4])
        assert rep.eps_exponent is None
        assert len(rep.epsilon) == 2

    def test_report_json_keys(self):
        import json

        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], 1e4)
        rep = measure_simulation(g, [1e3, 1e4])
        data = json.loads(rep.to_json())
        assert set(data) == {
            "gadget_name",
            "order",
            "deltas",
            "epsilon",
            "eta",
            "eps_exponent",
            "eta_exponent",
        }


class TestCompose:
    def _pair(self, delta=1e4):
        g1 = basic_gadget(
            XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], delta,
            n_logical=4, ancilla_start=4, n_total=8,
        )
        g2 = basic_gadget(
            XYZCoupling(1, 1, 0), [(2, 1.0)], [(3, 1.0)], delta,
            n_logical=4, ancilla_start=6, n_total=8,
        )
        return g1, g2

    def test_two_gadgets_sum_targets(self):
        g1, g2 = self._pair()
        gc = compose_parallel([g1, g2], shared_targets={0, 1, 2, 3})
        want = (
            two_body(4, 0, 1, "XX")
            + two_body(4, 0, 1, "YY")
            + two_body(4, 2, 3, "XX")
            + two_body(4, 2, 3, "YY")
        )
        assert gc.predicted_target == want

    def test_low_sector_matches_sum(self):
        g1, g2 = self._pair()
        gc = compose_parallel([g1, g2], shared_targets={0, 1, 2, 3})
        vals = eig_dense(gc.assemble(1e4)).eigenvalues[:16]
        tv = np.linalg.eigvalsh(matrix_from_operator(gc.predicted_target))
        eps = np.max(np.abs(vals - gc.predicted_shift - tv))
        # single-gadget epsilon at the same delta bounds the composition
        single = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], 1e4)
        svals = eig_dense(single.assemble(1e4)).eigenvalues[:4]
        stv = np.linalg.eigvalsh(matrix_from_operator(single.predicted_target))
        seps = np.max(np.abs(svals - single.predicted_shift - stv))
        assert eps <= 2 * seps + 1e-9

    def test_identity_composition(self):
        g1, _ = self._pair()
        assert compose_parallel([g1], shared_targets={0, 1}) is g1

    def test_overlapping_ancillas_rejected(self):
        g1, _ = self._pair()
        g1b = basic_gadget(
            XYZCoupling(1, 1, 0), [(2, 1.0)], [(3, 1.0)], 1e4,
            n_logical=4, ancilla_start=4, n_total=8,
        )
        with pytest.raises(ValueError, match="ancilla overlap"):
            compose_parallel([g1, g1b], shared_targets={0, 1, 2, 3})


class TestOperatorMatrixRoundTrip:
    def test_round_trip(self):
        op = (
            two_body(2, 0, 1, "XY", 0.3)
            + two_body(2, 0, 1, "ZZ", -1.2)
            + identity(2, 0.7)
        )
        back = operator_from_matrix(matrix_from_operator(op))
        assert opnorm(back - op) < 1e-12
