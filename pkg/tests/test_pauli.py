import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gadgetforge.pauli import (
    PauliOperator,
    PauliString,
    basis_state,
    identity,
    pauli_rank,
    single,
    two_body,
)


def heisenberg(n=2):
    return two_body(n, 0, 1, "XX") + two_body(n, 0, 1, "YY") + two_body(n, 0, 1, "ZZ")


class TestAction:
    def test_x_flips(self):
        out = single(1, 0, "X").apply(basis_state(1, 0))
        assert np.allclose(out, [0, 1])

    def test_xx_plus_yy_on_01(self):
        # |01> = qubit1 set -> index 2; maps to 2|10> = index 1
        op = two_body(2, 0, 1, "XX") + two_body(2, 0, 1, "YY")
        out = op.apply(basis_state(2, 2))
        expect = np.zeros(4)
        expect[1] = 2.0
        assert np.allclose(out, expect)

    def test_zz_diagonal(self):
        out = two_body(2, 0, 1, "ZZ").apply(basis_state(2, 0))
        assert out[0] == pytest.approx(1.0)

    def test_y_phase(self):
        out = single(1, 0, "Y").apply(basis_state(1, 0))
        assert np.allclose(out, [0, 1j])
        out = single(1, 0, "Y").apply(basis_state(1, 1))
        assert np.allclose(out, [-1j, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            single(2, 0, "X").apply(np.zeros(2))


class TestDense:
    def test_identity_coeff(self):
        mat = identity(1, 3.0).to_dense()
        assert np.allclose(mat, 3 * np.eye(2))

    def test_heisenberg_spectrum(self):
        vals = np.linalg.eigvalsh(heisenberg().to_dense())
        assert np.allclose(vals, [-3, 1, 1, 1])

    def test_general_xyz_matrix(self):
        # alpha XX + beta YY + gamma ZZ in the computational basis:
        # diag(g, -g, -g, g), corners a -/+ b, middle a + b
        a, b, g = 0.7, -0.3, 1.1
        op = (
            two_body(2, 0, 1, "XX", a)
            + two_body(2, 0, 1, "YY", b)
            + two_body(2, 0, 1, "ZZ", g)
        )
        expect = np.array(
            [
                [g, 0, 0, a - b],
                [0, -g, a + b, 0],
                [0, a + b, -g, 0],
                [a - b, 0, 0, g],
            ],
            dtype=complex,
        )
        assert np.allclose(op.to_dense(), expect)

    def test_dense_cap(self):
        with pytest.raises(ValueError):
            single(15, 0, "X").to_dense()

    def test_apply_dense_agree_exhaustive(self):
        rng = np.random.default_rng(0)
        for n in range(1, 7):
            terms = []
            for _ in range(4):
                qubits = rng.choice(n, size=min(n, 2), replace=False)
                letters = rng.choice(list("XYZ"), size=len(qubits))
                factors = {int(q): str(p) for q, p in zip(qubits, letters)}
                terms.append((rng.normal(), PauliString.from_map(n, factors)))
            op = PauliOperator(n, terms)
            mat = op.to_dense()
            for i in range(1 << n):
                assert np.allclose(mat[:, i], op.apply(basis_state(n, i)), atol=1e-12)


class TestAlgebra:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_linearity(self, seed):
        rng = np.random.default_rng(seed)
        op = heisenberg() + two_body(2, 0, 1, "XZ", rng.normal())
        u = rng.normal(size=4) + 1j * rng.normal(size=4)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        a, b = rng.normal(), rng.normal()
        lhs = op.apply(a * u + b * v)
        rhs = a * op.apply(u) + b * op.apply(v)
        assert np.linalg.norm(lhs - rhs) < 1e-12 * max(1, np.linalg.norm(rhs))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_hermiticity(self, seed):
        rng = np.random.default_rng(seed)
        op = (
            two_body(3, 0, 2, "XY", rng.normal())
            + two_body(3, 1, 2, "ZZ", rng.normal())
            + single(3, 0, "Y", rng.normal())
        )
        u = rng.normal(size=8) + 1j * rng.normal(size=8)
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        lhs = np.vdot(u, op.apply(v))
        rhs = np.conj(np.vdot(v, op.apply(u)))
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))

    def test_canonical_merge_and_idempotence(self):
        s = PauliString.from_map(2, {0: "X", 1: "X"})
        op = PauliOperator(2, [(1.0, s), (2.0, s), (-3.0, s)])
        assert op.n_terms == 0  # exact zero dropped
        op2 = PauliOperator(2, [(1.0, s), (2.0, s)])
        assert op2.n_terms == 1 and op2.terms[0][0] == 3.0
        op3 = PauliOperator(2, op2.terms)
        assert op3 == op2
        v = np.arange(4, dtype=complex)
        assert np.allclose(op2.apply(v), op3.apply(v))

    def test_invalid_strings(self):
        with pytest.raises(ValueError):
            PauliString.from_map(2, {3: "X"})
        with pytest.raises(ValueError):
            PauliString(2, ((0, "X"), (0, "Y")))
        with pytest.raises(ValueError):
            PauliOperator(2, [(np.inf, PauliString(2, ()))])


class TestRank:
    def test_examples(self):
        assert pauli_rank(heisenberg()) == 3
        assert pauli_rank(two_body(2, 0, 1, "XX") + two_body(2, 0, 1, "YY")) == 2
        anti = two_body(2, 0, 1, "XZ") - two_body(2, 0, 1, "ZX")
        # hand oracle: M = [[0,0,1],[0,0,0],[-1,0,0]] has singular values 1,1,0
        assert pauli_rank(anti) == 2

    def test_requires_two_qubits(self):
        with pytest.raises(ValueError):
            pauli_rank(single(1, 0, "X"))


class TestSerialization:
    def test_round_trip(self):
        op = heisenberg() + identity(2, -1.5) + single(2, 1, "Y", 0.25)
        text = op.to_text()
        assert "I" in text.splitlines()[0]
        back = PauliOperator.from_text(text, 2)
        assert back == op

    def test_format_example(self):
        op = two_body(2, 0, 1, "XX")
        assert op.to_text() == "1 X@0 X@1\n"

    def test_parse_errors(self):
        with pytest.raises(ValueError, match="line 1"):
            PauliOperator.from_text("abc X@0", 2)
        with pytest.raises(ValueError, match="line 2"):
            PauliOperator.from_text("1 X@0\n1 X0", 2)
