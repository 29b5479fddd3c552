"""Dense and iterative eigensolvers for PauliOperators.

The iterative path is a Lanczos recursion with full reorthogonalization
and per-eigenpair deflation restarts, driven entirely by the matrix-free
``PauliOperator.apply``. Start vectors are drawn from a seeded generator
so repeated runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .pauli import DENSE_CAP, PauliOperator

__all__ = ["EigenResult", "eig_dense", "low_eigs", "NonConvergenceError"]


class NonConvergenceError(RuntimeError):
    """Raised when the iterative solver fails; carries best residuals."""

    def __init__(self, message, eigenvalues=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.residuals = residuals


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: list | None = None
    residual_norms: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        order = np.argsort(self.eigenvalues, kind="stable")
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)[order]
        if self.eigenvectors is not None:
            self.eigenvectors = [self.eigenvectors[i] for i in order]
        if len(self.residual_norms):
            self.residual_norms = np.asarray(self.residual_norms)[order]

    def cluster_ground(self, tol):
        """Indices of eigenvalues within tol of the minimum."""
        lo = self.eigenvalues[0]
        return np.nonzero(self.eigenvalues <= lo + tol)[0]


def eig_dense(op: PauliOperator, want_vectors=False, cap=DENSE_CAP, herm_tol=1e-9):
    """Full spectrum via dense Hermitian diagonalization.

    Eigenvectors are always computed internally so that true residual
    norms can be reported; they are returned only on request.
    """
    mat = op.to_dense(cap=cap)
    if not np.allclose(mat, mat.conj().T, atol=herm_tol):
        raise ValueError("operator is not Hermitian within tolerance")
    vals, vecs = scipy.linalg.eigh(mat)
    res = np.linalg.norm(mat @ vecs - vecs * vals[None, :], axis=0)
    vectors = [vecs[:, i] for i in range(vecs.shape[1])] if want_vectors else None
    return EigenResult(vals, vectors, res)


def _lanczos_run(apply_h, dim, start, deflate, max_steps, tol, breakdown_tol=1e-12):
    """One Lanczos sweep from ``start``; returns converged Ritz pairs.

    ``deflate`` is a (possibly empty) orthonormal array (dim, d) of already
    converged vectors kept out of the Krylov space. Pairs are accepted at
    residual estimate <= tol, or <= 10*beta on a lucky breakdown (the
    Krylov space is then invariant to that accuracy anyway).
    """
    v = start.astype(complex)
    if deflate.shape[1]:
        v -= deflate @ (deflate.conj().T @ v)
    nrm = np.linalg.norm(v)
    if nrm < 1e-14:
        return [], []
    v /= nrm

    basis = [v]
    alphas, betas = [], []
    for step in range(max_steps):
        w = apply_h(basis[-1])
        a = float(np.real(np.vdot(basis[-1], w)))
        alphas.append(a)
        w = w - a * basis[-1]
        if len(basis) > 1:
            w = w - betas[-1] * basis[-2]
        # full reorthogonalization, twice for safety, plus deflation space
        for _ in range(2):
            if deflate.shape[1]:
                w -= deflate @ (deflate.conj().T @ w)
            for b in basis:
                w -= np.vdot(b, w) * b
        b = np.linalg.norm(w)
        m = len(alphas)
        broke = b < breakdown_tol
        last = step == max_steps - 1
        theta, s = scipy.linalg.eigh_tridiagonal(alphas, betas)
        thresh = max(tol, 10 * b) if broke else tol
        if abs(b * s[-1, 0]) <= thresh or broke or last:
            V = np.asarray(basis).T
            pairs_v, pairs_x = [], []
            for j in range(m):
                if abs(b * s[-1, j]) <= thresh:
                    x = V @ s[:, j]
                    x /= np.linalg.norm(x)
                    pairs_v.append(theta[j])
                    pairs_x.append(x)
                else:
                    break
            if pairs_v or broke or last:
                return pairs_v, pairs_x
        betas.append(b)
        basis.append(w / b)
    return [], []


def low_eigs(
    op: PauliOperator,
    k: int,
    tol: float = 1e-9,
    seed: int = 7,
    max_steps: int = 400,
    max_restarts: int = 60,
) -> EigenResult:
    """Lowest-k eigenpairs of a Hermitian PauliOperator, matrix-free.

    Deterministic for a fixed seed. Degenerate levels are resolved by
    deflation: each restart orthogonalizes against everything already
    converged, so repeated eigenvalues are found one copy at a time.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dim = 1 << op.n_qubits
    if k > dim:
        raise ValueError("k exceeds the Hilbert dimension")
    rng = np.random.default_rng(seed)
    apply_h = op.apply

    vals: list[float] = []
    vecs: list[np.ndarray] = []
    for restart in range(max_restarts):
        if len(vals) >= k:
            break
        start = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        deflate = np.asarray(vecs).T if vecs else np.zeros((dim, 0))
        got_v, got_x = _lanczos_run(apply_h, dim, start, deflate, max_steps, tol)
        for theta, x in zip(got_v, got_x):
            # refresh orthogonality against earlier pairs before accepting
            if vecs:
                x = x - deflate @ (deflate.conj().T @ x)
                n = np.linalg.norm(x)
                if n < 1e-8:
                    continue
                x /= n
            vals.append(theta)
            vecs.append(x)

    if len(vals) < k:
        raise NonConvergenceError(
            f"found only {len(vals)}/{k} eigenpairs after {max_restarts} restarts",
            eigenvalues=np.array(sorted(vals)),
            residuals=None,
        )

    order = np.argsort(vals)[:k]
    vals_k = [vals[i] for i in order]
    vecs_k = [vecs[i] for i in order]
    # exact residuals on the returned pairs; Rayleigh-quotient refresh
    out_vals, out_res = [], []
    for i, x in enumerate(vecs_k):
        hx = apply_h(x)
        lam = float(np.real(np.vdot(x, hx)))
        out_vals.append(lam)
        out_res.append(float(np.linalg.norm(hx - lam * x)))
    if max(out_res) > 10 * tol:
        raise NonConvergenceError(
            f"residuals {max(out_res):.3e} above tolerance {tol:.3e}",
            eigenvalues=np.array(out_vals),
            residuals=np.array(out_res),
        )
    return EigenResult(np.array(out_vals), vecs_k, np.array(out_res))
