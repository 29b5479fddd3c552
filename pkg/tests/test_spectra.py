import numpy as np
import pytest

from gadgetforge.gadgets import XYZCoupling, pair_h0
from gadgetforge.pauli import PauliOperator, two_body
from gadgetforge.spectra import eig_dense, low_eigs
from gadgetforge.xychain import ChainSpec, chain_operator, ground_energy, spectral_gap


def heisenberg():
    return two_body(2, 0, 1, "XX") + two_body(2, 0, 1, "YY") + two_body(2, 0, 1, "ZZ")


class TestDenseSolver:
    def test_heisenberg(self):
        res = eig_dense(heisenberg())
        assert np.allclose(res.eigenvalues, [-3, 1, 1, 1])
        assert res.residual_norms.max() < 1e-12

    def test_pair_hamiltonian_spectrum(self):
        # (1/2)(H + 3I) for the fully symmetric coupling: {0, 2, 2, 2}
        h0 = pair_h0(XYZCoupling(1, 1, 1), 2, 0, 1)
        res = eig_dense(h0)
        assert np.allclose(res.eigenvalues, [0, 2, 2, 2])

    def test_xy_chain_n6_ground(self):
        res = eig_dense(chain_operator(ChainSpec(6)))
        assert res.eigenvalues[0] == pytest.approx(-2.0, abs=1e-12)

    def test_residuals_bound_true_residual(self):
        op = heisenberg()
        res = eig_dense(op, want_vectors=True)
        mat = op.to_dense()
        for lam, vec, r in zip(res.eigenvalues, res.eigenvectors, res.residual_norms):
            assert np.linalg.norm(mat @ vec - lam * vec) <= r + 1e-14


class TestLanczos:
    def test_xy_chain_n10(self):
        spec = ChainSpec(10)
        res = low_eigs(chain_operator(spec), k=2, tol=1e-9, seed=3)
        assert res.eigenvalues[0] == pytest.approx(ground_energy(spec), abs=1e-8)
        gap = res.eigenvalues[1] - res.eigenvalues[0]
        assert gap == pytest.approx(spectral_gap(spec), abs=1e-8)
        assert res.residual_norms.max() <= 1e-8

    def test_matches_dense_k4(self):
        res = low_eigs(heisenberg(), k=4, tol=1e-10, seed=1)
        assert np.allclose(res.eigenvalues, [-3, 1, 1, 1], atol=1e-8)

    def test_deterministic_given_seed(self):
        op = chain_operator(ChainSpec(6))
        a = low_eigs(op, k=3, tol=1e-9, seed=42).eigenvalues
        b = low_eigs(op, k=3, tol=1e-9, seed=42).eigenvalues
        assert np.array_equal(a, b)

    def test_agrees_with_dense_corpus(self):
        rng = np.random.default_rng(11)
        for n in (4, 6, 8, 10):
            op = PauliOperator(n, [])
            for i in range(n - 1):
                op = op + two_body(n, i, i + 1, "XX", rng.normal()) + two_body(
                    n, i, i + 1, "ZZ", rng.normal()
                )
            dense = eig_dense(op).eigenvalues[:3]
            it = low_eigs(op, k=3, tol=1e-10, seed=n).eigenvalues
            assert np.allclose(dense, it, atol=1e-8)

    def test_fourfold_degenerate_ground(self):
        # two decoupled heavy pairs: ground space is 4-dimensional at zero
        h0 = pair_h0(XYZCoupling(1, 1, 1), 4, 0, 1) + pair_h0(
            XYZCoupling(1, 1, 1), 4, 2, 3
        )
        res = low_eigs(h0, k=4, tol=1e-10, seed=2)
        assert np.all(np.abs(res.eigenvalues) < 1e-8)
        assert res.eigenvalues.max() - res.eigenvalues.min() < 1e-8

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            low_eigs(heisenberg(), k=0)
        with pytest.raises(ValueError):
            low_eigs(heisenberg(), k=17)


class TestWeylSanity:
    def test_perturbation_bound(self):
        rng = np.random.default_rng(5)
        for n in (2, 4, 6):
            h = PauliOperator(n, [])
            e = PauliOperator(n, [])
            for i in range(n - 1):
                h = h + two_body(n, i, i + 1, "XY", rng.normal())
                e = e + two_body(n, i, i + 1, "ZZ", 0.01 * rng.normal())
            vals_h = eig_dense(h).eigenvalues
            vals_he = eig_dense(h + e).eigenvalues
            enorm = np.linalg.norm(e.to_dense(), 2)
            assert np.max(np.abs(vals_he - vals_h)) <= enorm + 1e-12
