import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gadgetforge.gadgets import (
    InteractionClass,
    XYZCoupling,
    antisym_gadget,
    assign_signs,
    basic_gadget,
    classify,
    coupling_operator,
    mediator_gadget,
    one_local_cancel_gadget,
    stoquastic_witness,
    third_order_chain_gadget,
    tilde,
    tim_gadget,
    triangular_family,
    xxyy_gamma_gadget,
)
from gadgetforge.pauli import single, two_body
from gadgetforge.spectra import eig_dense
from gadgetforge.sw import matrix_from_operator


def opnorm(op):
    return float(np.linalg.norm(matrix_from_operator(op), 2))


class TestTilde:
    def test_xy_fixed_point(self):
        t = tilde(XYZCoupling(1, 1, 0))
        assert t.isclose(XYZCoupling(1, 1, 0))

    def test_heisenberg_halves(self):
        t = tilde(XYZCoupling(1, 1, 1))
        assert t.isclose(XYZCoupling(0.5, 0.5, 0.5))

    def test_zero_pairwise_sum_rejected(self):
        with pytest.raises(ValueError):
            tilde(XYZCoupling(1, -1, 1))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=1e3))
    def test_xy_family_fixed(self, t):
        out = tilde(XYZCoupling(t, t, 0))
        assert abs(out.alpha - t) < 1e-12 * max(1, t)
        assert abs(out.beta - t) < 1e-12 * max(1, t)
        assert out.gamma == 0


couplings = st.tuples(
    st.floats(-2, 2, allow_nan=False),
    st.floats(-2, 2, allow_nan=False),
    st.floats(-2, 2, allow_nan=False),
)


class TestClassifier:
    def test_examples(self):
        assert classify(XYZCoupling(1, 1, 1)) == InteractionClass.QMA_COMPLETE
        assert classify(XYZCoupling(1, -1, 2)) == InteractionClass.STOQMA_COMPLETE
        assert classify(XYZCoupling(1, 1, -1)) == InteractionClass.P

    @settings(max_examples=100, deadline=None)
    @given(couplings)
    def test_relabeling_invariance(self, abc):
        labels = {classify(XYZCoupling(*perm)) for perm in itertools.permutations(abc)}
        assert len(labels) == 1

    @settings(max_examples=100, deadline=None)
    @given(couplings, st.floats(min_value=0.01, max_value=100))
    def test_scaling_invariance(self, abc, k):
        a, b, g = abc
        assert classify(XYZCoupling(a, b, g)) == classify(
            XYZCoupling(k * a, k * b, k * g)
        )

    def test_witness_examples(self):
        assert stoquastic_witness(XYZCoupling(1, -1, 2)) is not None
        assert stoquastic_witness(XYZCoupling(1, 1, 1)) is None
        assert stoquastic_witness(XYZCoupling(0, 0, -1)) is not None

    def test_witness_matches_matrix(self):
        # the relabeled interaction really is stoquastic: check the 4x4
        c = XYZCoupling(1, -1, 2)
        wit = stoquastic_witness(c)
        coeffs = dict(zip("XYZ", c.as_tuple()))
        new = {wit[ax]: coeffs[ax] for ax in "XYZ"}
        relabeled = XYZCoupling(new["X"], new["Y"], new["Z"])
        mat = coupling_operator(relabeled, 2, 0, 1).to_dense().real
        off = mat - np.diag(np.diag(mat))
        assert off.max() <= 1e-12


class TestBasicGadget:
    def test_positive_subdivision_target(self):
        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0)], [(1, 1.0)], 1e4)
        want = two_body(2, 0, 1, "XX") + two_body(2, 0, 1, "YY")
        assert g.predicted_target == want

    def test_same_side_negative(self):
        g = basic_gadget(XYZCoupling(1, 1, 0), [(0, 1.0), (1, 1.0)], [], 1e4)
        want = -1.0 * (two_body(2, 0, 1, "XX") + two_body(2, 0, 1, "YY"))
        assert g.predicted_target == want

    def test_heisenberg_tilde_target(self):
        g = basic_gadget(XYZCoupling(1, 1, 1), [(0, 1.0)], [(1, 1.0)], 1e4)
        assert g.predicted_target.coefficient(((0, "X"), (1, "X"))) == 0.5

    def test_precondition(self):
        with pytest.raises(ValueError):
            basic_gadget(XYZCoupling(1, -1, 1), [(0, 1.0)], [(1, 1.0)], 1e4)

    def test_h0_is_eq1_form(self):
        g = basic_gadget(XYZCoupling(1, 1, 1), [(0, 1.0)], [(1, 1.0)], 1e4)
        res = eig_dense(g.h0)
        # targets untouched: each pair eigenvalue appears 4x
        assert np.allclose(sorted(set(np.round(res.eigenvalues, 10))), [0, 2])


class TestAntisymGadget:
    def test_targets(self):
        g = antisym_gadget([(0, 1.0)], [(1, 1.0)], 1e4)
        want = two_body(2, 0, 1, "XZ") - two_body(2, 0, 1, "ZX")
        assert g.predicted_target == want
        g2 = antisym_gadget([(0, 1.0), (1, 1.0)], [], 1e4)
        want2 = -1.0 * (two_body(2, 0, 1, "XX") + two_body(2, 0, 1, "ZZ"))
        assert g2.predicted_target == want2

    def test_heavy_spectrum(self):
        g = antisym_gadget([(0, 1.0)], [(1, 1.0)], 1e4)
        vals = np.unique(np.round(eig_dense(g.h0).eigenvalues, 10))
        assert np.allclose(vals, [0, 1, 2])


class TestTimGadget:
    def test_xx_signs(self):
        gp = tim_gadget({(0, 1): 1.0}, {}, 1e4)
        assert gp.predicted_target == two_body(2, 0, 1, "XX")
        gm = tim_gadget({(0, 1): -1.0}, {}, 1e4)
        assert gm.predicted_target == -1.0 * two_body(2, 0, 1, "XX")

    def test_transverse_term(self):
        g = tim_gadget({}, {0: 1.0}, 1e4)
        # -2 mu^2 (I - Z): traceless part 2 Z, shift -2
        assert g.predicted_target == single(1, 0, "Z", 2.0)
        assert g.predicted_shift == pytest.approx(-2.0)


class TestXXYYGamma:
    def test_gamma_validation(self):
        with pytest.raises(ValueError):
            xxyy_gamma_gadget(1.0, {(0, 1): 1.0}, {}, 1e4)

    def test_second_order_factor_gamma2(self):
        g = xxyy_gamma_gadget(2.0, {}, {(0, 1): 1.0}, 1e4)
        # -(1/6)(Z - 7I)(Z - I) expanded: -(1/6)(ZZ - Z0 - 7 Z1 + 7 I)
        assert g.predicted_target.coefficient(((0, "Z"), (1, "Z"))) == pytest.approx(
            -1 / 6
        )
        assert g.predicted_target.coefficient(((0, "Z"),)) == pytest.approx(1 / 6)
        assert g.predicted_target.coefficient(((1, "Z"),)) == pytest.approx(7 / 6)
        assert g.predicted_shift == pytest.approx(-7 / 6)

    def test_intermediate_energies(self):
        gamma = 2.0
        g = xxyy_gamma_gadget(gamma, {(0, 1): 1.0}, {(0, 1): 1.0}, 1e4)
        vals = np.round(eig_dense(g.h0).eigenvalues, 10)
        # two-pair register: 2 gamma + 2 and 2 gamma - 2 appear as sums
        assert 2 * gamma + 2 in vals
        assert 2 * gamma - 2 in vals

    def test_first_order_xx(self):
        g = xxyy_gamma_gadget(2.0, {(0, 1): 1.0}, {}, 1e4)
        assert g.predicted_target == two_body(2, 0, 1, "XX")


class TestMediatorGadgets:
    def test_subdivision_pair(self):
        g = mediator_gadget("subdivide_pos", XYZCoupling(1, 1, 0), [0, 1], 1e4)
        want = two_body(2, 0, 1, "XX") + two_body(2, 0, 1, "YY")
        assert g.predicted_target == want

    def test_fork(self):
        g = mediator_gadget("fork", XYZCoupling(1, 1, 0), [0, 1, 2], 1e4)
        want = (
            two_body(3, 0, 2, "XX")
            + two_body(3, 0, 2, "YY")
            + two_body(3, 1, 2, "XX")
            + two_body(3, 1, 2, "YY")
        )
        assert g.predicted_target == want

    def test_crossing(self):
        g = mediator_gadget("crossing", XYZCoupling(1, 1, 0), [0, 1, 2, 3], 1e4)
        want = (
            two_body(4, 0, 3, "XX")
            + two_body(4, 0, 3, "YY")
            + two_body(4, 1, 2, "XX")
            + two_body(4, 1, 2, "YY")
        )
        assert g.predicted_target == want

    def test_arity_gate(self):
        with pytest.raises(ValueError):
            mediator_gadget("fork", XYZCoupling(1, 1, 0), [0, 1], 1e4)


class TestChainGadget:
    def test_closed_forms(self):
        g = third_order_chain_gadget(XYZCoupling(2, 1, 0), 1e4)
        assert g.predicted_target.coefficient(((0, "X"), (1, "X"))) == pytest.approx(8.0)
        assert g.predicted_target.coefficient(((0, "Y"), (1, "Y"))) == pytest.approx(
            0.25
        )

    def test_counterterm_blocks(self):
        g = third_order_chain_gadget(XYZCoupling(1, 1, 1), 1e4)
        g.validate()  # order-3 block conditions incl. the counterterm match


class TestTriangularFamily:
    def test_closed_forms_210(self):
        fam = triangular_family(XYZCoupling(2, 1, 0))
        assert fam.h1.alpha == pytest.approx(64.0)
        assert fam.h1.beta == pytest.approx(1 / 32)
        assert fam.h2.alpha == pytest.approx(32.0)
        assert fam.h2.beta == pytest.approx(1 / 16)
        assert fam.mu_alpha == pytest.approx(2 / 3)
        assert fam.mu_beta == pytest.approx(1 / 3)
        # closed forms against the rank-2 specialization
        assert fam.h1.alpha == pytest.approx(2**6 / 1**5)
        assert fam.h1.beta == pytest.approx(1**6 / 2**5)
        assert fam.h2.alpha == pytest.approx(2**5 / 1**4)
        assert fam.h2.beta == pytest.approx(1**5 / 2**4)

    def test_lambda_mu_recovery(self):
        fam = triangular_family(XYZCoupling(2, 1, 0))
        lam, mu = 511 / 48, 2047 / 96
        out = fam.interpolate(0)  # exercise the interpolation too
        assert out.alpha == pytest.approx(-fam.h1.alpha)
        a = -lam * fam.h1.alpha + mu * fam.h2.alpha
        b = -lam * fam.h1.beta + mu * fam.h2.beta
        assert a == pytest.approx(1.0, abs=1e-12)
        assert b == pytest.approx(1.0, abs=1e-12)

    def test_heisenberg_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            triangular_family(XYZCoupling(1, 1, 1))

    def test_intermediate_gadget_target(self):
        fam = triangular_family(XYZCoupling(2, 1, 0))
        g = fam.intermediate_gadget(1.0, 1.0, 1e4)
        want = -1.0 * coupling_operator(fam.h1, 2, 0, 1) + coupling_operator(
            fam.h2, 2, 0, 1
        )
        assert opnorm(g.predicted_target - want) < 1e-12


class TestOneLocalCancel:
    def _full(self):
        return (
            two_body(2, 0, 1, "XX")
            + two_body(2, 0, 1, "YY")
            + single(2, 0, "Z")
            + single(2, 1, "Z")
        )

    def test_effective_minus_z(self):
        g = one_local_cancel_gadget(self._full(), 1e4)
        assert g.predicted_target == single(1, 0, "Z", -1.0)

    def test_marginals_maximally_mixed(self):
        # construction itself validates the marginals; reaching here means
        # they were I/2 within tolerance
        g = one_local_cancel_gadget(self._full(), 1e4)
        assert g.meta["form"] == "symmetric"

    def test_zero_local_part(self):
        full = two_body(2, 0, 1, "XX") + two_body(2, 0, 1, "YY")
        g = one_local_cancel_gadget(full, 1e4)
        assert g.predicted_target.n_terms == 0

    def test_antisymmetric_form(self):
        full = (
            two_body(2, 0, 1, "XZ")
            - two_body(2, 0, 1, "ZX")
            + single(2, 0, "X")
            - single(2, 1, "X")
        )
        g = one_local_cancel_gadget(full, 1e4)
        assert g.predicted_target == single(1, 0, "X", -1.0)

    def test_outside_normal_form(self):
        bad = two_body(2, 0, 1, "XX") + single(2, 0, "Z")  # asym locals, sym 2-local
        with pytest.raises(ValueError, match="normal form"):
            one_local_cancel_gadget(bad, 1e4)


class TestAssignSigns:
    def test_single_row_positive(self):
        asg = assign_signs([[1.0]])
        assert asg.mu[((0, 0), (0, 1))] == 1
        assert asg.mu[((0, 1), (0, 0))] == 1

    def test_row_rule(self):
        asg = assign_signs([[1.0, 1.0]])
        assert asg.mu[((0, 1), (0, 2))] == -asg.mu[((0, 1), (0, 0))]

    def test_interior_cancellation_random(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            lam_row = rng.choice([-1.0, 1.0], size=(3, 2)) * rng.uniform(
                0.5, 2, (3, 2)
            )
            lam_col = rng.choice([-1.0, 1.0], size=(2, 3)) * rng.uniform(
                0.5, 2, (2, 3)
            )
            asg = assign_signs(lam_row.tolist(), lam_col.tolist())
            assert asg.residual((1, 1)) == 0

    def test_edge_sign_constraint(self):
        rng = np.random.default_rng(9)
        lam_row = rng.choice([-1.0, 1.0], size=(4, 3))
        lam_col = rng.choice([-1.0, 1.0], size=(3, 4))
        asg = assign_signs(lam_row.tolist(), lam_col.tolist())
        for i in range(4):
            for j in range(3):
                sgn = 1 if lam_row[i][j] > 0 else -1
                assert asg.mu[((i, j), (i, j + 1))] * asg.mu[((i, j + 1), (i, j))] == sgn

    def test_zero_weight_rejected(self):
        with pytest.raises(ValueError):
            assign_signs([[0.0]])
