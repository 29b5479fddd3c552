"""Schrieffer-Wolff effective Hamiltonians and simulation-error measurement.

A gadget bundles a heavy term ``h0``, perturbations at order-dependent
weights, and an encoding isometry whose image is the ground space of
``h0``. The simulator Hamiltonian is assembled as

* order 1:  D*h0 + v_main
* order 2:  D*h0 + sqrt(D)*v_main + v_extra
* order 3:  D*h0 + D^(2/3)*v_main + D^(1/3)*v_extra_tilde + v_extra

``perturbative_effective`` evaluates the closed-form low-energy operator
from the block decomposition of the perturbations; the pseudo-inverse of
the ground-shifted h0 is taken on the excited space only.
``sw_numerical_effective`` instead extracts the exact effective operator
from the low-energy subspace of the assembled simulator, rotating the
encoding onto it by a polar (direct-rotation) factor.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .pauli import DENSE_CAP, PauliOperator, PauliString
from .spectra import eig_dense, low_eigs

__all__ = [
    "SplitSpace",
    "Encoding",
    "GadgetInstance",
    "SimulationReport",
    "BlockConditionError",
    "ground_split",
    "perturbative_effective",
    "sw_numerical_effective",
    "measure_simulation",
    "compose_parallel",
    "operator_from_matrix",
    "matrix_from_operator",
]

BLOCK_TOL = 1e-10


class BlockConditionError(ValueError):
    """A forbidden block of a perturbation is nonzero beyond tolerance."""


@dataclass
class SplitSpace:
    """Ground/excited split of a heavy Hamiltonian, after the ground shift."""

    projector_minus: np.ndarray  # (dim, N) orthonormal columns
    projector_plus: np.ndarray  # (dim, dim-N) orthonormal columns
    ground_dim: int
    plus_eigenvalues: np.ndarray  # eigenvalues of the shifted (H0)++
    shift: float  # subtracted ground energy

    def block(self, op: PauliOperator, left: str, right: str):
        """Matrix block  P_left^dag Op P_right  in the split bases."""
        bases = {"-": self.projector_minus, "+": self.projector_plus}
        bl, br = bases[left], bases[right]
        cols = np.column_stack([op.apply(br[:, j]) for j in range(br.shape[1])])
        return bl.conj().T @ cols


def ground_split(h0: PauliOperator, deg_tol: float = 1e-8) -> SplitSpace:
    """Identify the ground space of h0 and shift it to zero energy.

    Raises if the boundary of the ground cluster is ambiguous (the next
    eigenvalue within 10*deg_tol of the cluster edge); warns if the
    smallest shifted excited eigenvalue is below 1.
    """
    res = eig_dense(h0, want_vectors=True)
    vals = res.eigenvalues
    ground = res.cluster_ground(deg_tol)
    n = len(ground)
    if n < len(vals):
        edge = vals[n - 1]
        if vals[n] - edge < 10 * deg_tol:
            raise ValueError(
                f"ambiguous ground cluster: gap {vals[n] - edge:.3e} "
                f"< 10*deg_tol={10 * deg_tol:.3e}"
            )
    vecs = np.column_stack(res.eigenvectors)
    shift = float(vals[0])
    plus_vals = vals[n:] - shift
    if len(plus_vals) and plus_vals[0] < 1.0 - 1e-9:
        warnings.warn(
            f"smallest excited eigenvalue of shifted h0 is {plus_vals[0]:.3g} < 1; "
            "perturbative error constants assume a rescaled h0",
            stacklevel=2,
        )
    return SplitSpace(
        projector_minus=vecs[:, :n],
        projector_plus=vecs[:, n:],
        ground_dim=n,
        plus_eigenvalues=plus_vals,
        shift=shift,
    )


class Encoding:
    """Isometry from a 2**m logical space into the simulator space.

    Two layouts cover every gadget here: ``passthrough`` keeps a set of
    physical qubits as the logical register and freezes the ancillas in a
    fixed state; ``bell_pairs`` encodes one logical qubit per physical
    pair as |0L> = (|01>-|10>)/sqrt2, |1L> = (|01>+|10>)/sqrt2.
    """

    def __init__(self, n_qubits, matrix, kind, meta=None):
        self.n_qubits = n_qubits
        self.matrix = matrix  # (2**n, 2**m), orthonormal columns
        self.kind = kind
        self.meta = meta or {}

    @property
    def logical_qubits(self):
        return int(np.round(np.log2(self.matrix.shape[1])))

    @property
    def logical_dim(self):
        return self.matrix.shape[1]

    @property
    def vectors(self):
        return [self.matrix[:, j] for j in range(self.matrix.shape[1])]

    @classmethod
    def passthrough(cls, n_qubits, logical, ancilla_state, ancillas):
        """Logical register = ``logical`` qubits; ``ancillas`` frozen.

        ``ancilla_state`` is a state vector on len(ancillas) qubits in the
        order given (little-endian within that sub-register).
        """
        logical = list(logical)
        ancillas = list(ancillas)
        if sorted(logical + ancillas) != list(range(n_qubits)):
            raise ValueError("logical + ancillas must partition the register")
        m = len(logical)
        dim, ldim = 1 << n_qubits, 1 << m
        mat = np.zeros((dim, ldim), dtype=complex)
        anc_dim = 1 << len(ancillas)
        chi = np.asarray(ancilla_state, dtype=complex).reshape(anc_dim)
        for l in range(ldim):
            for a in range(anc_dim):
                idx = 0
                for pos, q in enumerate(logical):
                    idx |= ((l >> pos) & 1) << q
                for pos, q in enumerate(ancillas):
                    idx |= ((a >> pos) & 1) << q
                mat[idx, l] += chi[a]
        return cls(
            n_qubits,
            mat,
            "passthrough",
            {"logical": logical, "ancillas": ancillas, "ancilla_state": chi},
        )

    @classmethod
    def bell_pairs(cls, n_qubits, pairs):
        """One logical qubit per (qa, qb) pair: |0L>=|Psi->, |1L>=|Psi+>."""
        pairs = [tuple(p) for p in pairs]
        used = [q for p in pairs for q in p]
        if sorted(used) != list(range(n_qubits)):
            raise ValueError("pairs must partition the register")
        m = len(pairs)
        dim, ldim = 1 << n_qubits, 1 << m
        mat = np.zeros((dim, ldim), dtype=complex)
        s = 1 / np.sqrt(2)
        for l in range(ldim):
            entries = [(0, 1.0)]
            for pos, (qa, qb) in enumerate(pairs):
                sign = 1.0 if (l >> pos) & 1 else -1.0  # |1L> = Psi+, |0L> = Psi-
                new = []
                for idx, amp in entries:
                    new.append((idx | (1 << qb), amp * s))
                    new.append((idx | (1 << qa), amp * sign * s))
                entries = new
            for idx, amp in entries:
                mat[idx, l] += amp
        return cls(n_qubits, mat, "bell_pairs", {"pairs": pairs})


# -- logical-space Pauli decomposition --------------------------------------


def matrix_from_operator(op: PauliOperator):
    return op.to_dense(cap=max(DENSE_CAP, op.n_qubits))


def operator_from_matrix(mat, tol=1e-12) -> PauliOperator:
    """Pauli decomposition of a Hermitian 2**m x 2**m matrix.

    Imaginary parts of the expansion coefficients (below tol) are dropped:
    operators here are real combinations of Pauli strings.
    """
    dim = mat.shape[0]
    m = int(np.round(np.log2(dim)))
    if 1 << m != dim:
        raise ValueError("matrix dimension is not a power of two")
    terms = []
    letters = ("I", "X", "Y", "Z")
    for combo in itertools.product(letters, repeat=m):
        factors = {q: p for q, p in enumerate(combo) if p != "I"}
        string = PauliString.from_map(m, factors) if factors else PauliString(m, ())
        basis_op = PauliOperator(m, [(1.0, string)])
        coeff = np.trace(basis_op.to_dense(cap=m).conj().T @ mat) / dim
        if abs(coeff.imag) > 1e-8:
            raise ValueError(f"matrix has non-real Pauli coefficient {coeff:.3e}")
        if abs(coeff.real) > tol:
            terms.append((coeff.real, string))
    return PauliOperator(m, terms)


# -- gadget instances --------------------------------------------------------


@dataclass
class GadgetInstance:
    """A perturbative gadget plus its predicted low-energy physics.

    ``predicted_target`` lives on the logical register and excludes the
    identity component, which is carried separately in ``predicted_shift``
    (spectra are always compared up to an overall energy shift).
    """

    name: str
    h0: PauliOperator
    v_main: PauliOperator
    v_extra: PauliOperator
    v_extra_tilde: PauliOperator
    delta: float
    order: int
    encoding: Encoding
    predicted_target: PauliOperator
    predicted_shift: float = 0.0
    strict_blocks: bool = True
    ancillas: tuple = ()
    meta: dict = field(default_factory=dict)

    @property
    def n_qubits(self):
        return self.h0.n_qubits

    def assemble(self, delta=None) -> PauliOperator:
        """The simulator Hamiltonian at the order's delta weighting."""
        d = self.delta if delta is None else float(delta)
        if d <= 0:
            raise ValueError("delta must be positive")
        if self.order == 1:
            return d * self.h0 + self.v_main
        if self.order == 2:
            return d * self.h0 + np.sqrt(d) * self.v_main + self.v_extra
        if self.order == 3:
            return (
                d * self.h0
                + d ** (2 / 3) * self.v_main
                + d ** (1 / 3) * self.v_extra_tilde
                + self.v_extra
            )
        raise ValueError(f"unsupported order {self.order}")

    def perturbation_norm_bound(self):
        return (
            self.v_main.coeff_norm()
            + self.v_extra.coeff_norm()
            + self.v_extra_tilde.coeff_norm()
        )

    def split(self, deg_tol=1e-8) -> SplitSpace:
        return ground_split(self.h0, deg_tol)

    def validate(self, split=None, tol=BLOCK_TOL):
        """Check the order-specific block conditions of the lemmas."""
        if self.order == 1:
            return
        sp = split or self.split()
        vm_mm = sp.block(self.v_main, "-", "-")
        if scipy.linalg.norm(vm_mm, 2) > tol:
            raise BlockConditionError(
                f"{self.name}: (v_main)-- norm {scipy.linalg.norm(vm_mm, 2):.2e}"
            )
        if self.strict_blocks and self.v_extra.n_terms:
            ve_pm = sp.block(self.v_extra, "+", "-")
            if scipy.linalg.norm(ve_pm, 2) > tol:
                raise BlockConditionError(
                    f"{self.name}: (v_extra)+- norm {scipy.linalg.norm(ve_pm, 2):.2e}"
                )
        if self.order == 3:
            if self.strict_blocks and self.v_extra_tilde.n_terms:
                vt_pm = sp.block(self.v_extra_tilde, "+", "-")
                if scipy.linalg.norm(vt_pm, 2) > tol:
                    raise BlockConditionError(
                        f"{self.name}: (v_extra_tilde)+- norm above tolerance"
                    )
            vt_mm = sp.block(self.v_extra_tilde, "-", "-")
            vm_mp = sp.block(self.v_main, "-", "+")
            inv = 1.0 / sp.plus_eigenvalues
            second = (vm_mp * inv[None, :]) @ vm_mp.conj().T
            if scipy.linalg.norm(vt_mm - second, 2) > max(
                tol, 1e-8 * scipy.linalg.norm(second, 2)
            ):
                raise BlockConditionError(
                    f"{self.name}: (v_extra_tilde)-- != Vm-+ H0^-1 Vm+-"
                )


def perturbative_effective(g: GadgetInstance, deg_tol=1e-8) -> PauliOperator:
    """Closed-form effective operator on the logical register.

    Order 1 returns V--; order 2 returns (Ve)-- - Vm-+ H0^-1 Vm+-;
    order 3 returns (Ve)-- + Vm-+ H0^-1 Vm++ H0^-1 Vm+-. The identity
    component is kept explicit in the returned operator.
    """
    sp = g.split(deg_tol)
    g.validate(split=sp)
    E = g.encoding.matrix
    # express blocks in the encoding's logical basis rather than the
    # eigenbasis of h0 (the two span the same space)
    if E.shape[1] != sp.ground_dim:
        raise ValueError(
            f"encoding dimension {E.shape[1]} != ground dimension {sp.ground_dim}"
        )
    overlap = sp.projector_minus.conj().T @ E
    # sanity: image(E) must equal the ground space
    s = np.linalg.svd(overlap, compute_uv=False)
    if s.min() < 1 - 1e-8:
        raise ValueError("encoding image does not match the h0 ground space")

    def mm(op):
        cols = np.column_stack([op.apply(E[:, j]) for j in range(E.shape[1])])
        return E.conj().T @ cols

    if g.order == 1:
        eff = mm(g.v_main)
    else:
        bp = sp.projector_plus
        cols = np.column_stack([g.v_main.apply(E[:, j]) for j in range(E.shape[1])])
        vm_pm = bp.conj().T @ cols  # (dim+, N) block Vm+-
        inv = 1.0 / sp.plus_eigenvalues
        if g.order == 2:
            eff = mm(g.v_extra) - vm_pm.conj().T @ (inv[:, None] * vm_pm)
        else:
            vpp = sp.block(g.v_main, "+", "+")
            eff = mm(g.v_extra) + vm_pm.conj().T @ (
                inv[:, None] * (vpp @ (inv[:, None] * vm_pm))
            )
    return operator_from_matrix(eff)


def sw_numerical_effective(
    h_sim: PauliOperator,
    encoding: Encoding,
    gap_tol=1e-7,
    overlap_floor=0.1,
    dense_cap=DENSE_CAP,
    seed=11,
):
    """Exact effective operator on the lowest-N subspace of ``h_sim``.

    Computes L_N, rotates the encoding onto it by the polar factor of
    P_L E (the direct rotation, the minimal-rotation realization of the
    implicit isometry), and returns (effective PauliOperator in the
    logical basis, eta = ||E - E~|| in operator norm).
    """
    N = encoding.logical_dim
    dim = 1 << h_sim.n_qubits
    if h_sim.n_qubits <= dense_cap and dim <= 4096:
        res = eig_dense(h_sim, want_vectors=True)
        vals = res.eigenvalues
        vecs = res.eigenvectors
    else:
        res = low_eigs(h_sim, k=min(N + 2, dim - 1), tol=1e-9, seed=seed)
        vals = res.eigenvalues
        vecs = res.eigenvectors
    if len(vals) > N:
        spread = max(abs(vals[-1] - vals[0]), 1.0)
        if vals[N] - vals[N - 1] < gap_tol * spread:
            raise ValueError(
                f"low-energy subspace not separated: gap {vals[N] - vals[N - 1]:.3e}"
            )
    Q = np.column_stack(vecs[:N])
    ove = Q.conj().T @ encoding.matrix  # (N, N)
    u, s, vh = np.linalg.svd(ove)
    if s.min() < overlap_floor:
        raise ValueError(
            f"encoding barely overlaps the low-energy space (sigma_min={s.min():.3e})"
        )
    e_tilde = Q @ (u @ vh)
    eta = scipy.linalg.norm(encoding.matrix - e_tilde, 2)
    cols = np.column_stack([h_sim.apply(e_tilde[:, j]) for j in range(N)])
    eff = e_tilde.conj().T @ cols
    eff = (eff + eff.conj().T) / 2
    return operator_from_matrix(eff), float(eta)


# -- simulation-error measurement -------------------------------------------


@dataclass
class SimulationReport:
    gadget_name: str
    order: int
    deltas: np.ndarray
    epsilon: np.ndarray
    eta: np.ndarray
    eps_exponent: float | None
    eta_exponent: float | None

    def to_json(self):
        def fmt(x):
            return float(format(float(x), ".12g"))

        payload = {
            "gadget_name": self.gadget_name,
            "order": self.order,
            "deltas": [fmt(d) for d in self.deltas],
            "epsilon": [fmt(e) for e in self.epsilon],
            "eta": [fmt(e) for e in self.eta],
            "eps_exponent": None if self.eps_exponent is None else fmt(self.eps_exponent),
            "eta_exponent": None if self.eta_exponent is None else fmt(self.eta_exponent),
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _fit_exponent(deltas, values):
    if len(deltas) < 4 or np.any(np.asarray(values) <= 0):
        return None
    slope, _ = np.polyfit(np.log10(deltas), np.log10(values), 1)
    return float(slope)


def target_spectrum(g: GadgetInstance):
    mat = matrix_from_operator(g.predicted_target)
    return np.linalg.eigvalsh(mat)


def measure_simulation(g: GadgetInstance, deltas, workers=None) -> SimulationReport:
    """Per-delta eigenvalue error and encoding distance, with fitted slopes.

    epsilon(delta) = max_i |lambda_i(H_sim) - shift - lambda_i(target)|
    over the lowest N eigenvalues, after subtracting the gadget's
    predicted identity shift.
    """
    deltas = np.asarray(sorted(float(d) for d in deltas))
    bound = 2 * g.perturbation_norm_bound()
    if np.any(deltas < bound):
        raise ValueError(
            f"delta values below 2*||V|| = {bound:.3g}; the heavy term must dominate"
        )
    target_vals = target_spectrum(g)
    N = g.encoding.logical_dim

    def one(delta):
        h_sim = g.assemble(delta)
        if h_sim.n_qubits <= DENSE_CAP and (1 << h_sim.n_qubits) <= 4096:
            vals = eig_dense(h_sim).eigenvalues[:N]
        else:
            vals = low_eigs(h_sim, k=N, tol=1e-9).eigenvalues
        eps = float(np.max(np.abs(vals - g.predicted_shift - target_vals)))
        _, eta = sw_numerical_effective(h_sim, g.encoding)
        return eps, eta

    results = _run_parallel(one, deltas, workers)
    eps = np.array([r[0] for r in results])
    eta = np.array([r[1] for r in results])
    return SimulationReport(
        gadget_name=g.name,
        order=g.order,
        deltas=deltas,
        epsilon=eps,
        eta=eta,
        eps_exponent=_fit_exponent(deltas, eps),
        eta_exponent=_fit_exponent(deltas, eta),
    )


def _worker_count(n_items, workers):
    import os

    if workers is None:
        env = os.environ.get("GADGETFORGE_THREADS")
        workers = int(env) if env else 1
    return max(1, min(workers, n_items))


def _run_parallel(fn, items, workers=None):
    n = _worker_count(len(items), workers)
    if n == 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- parallel composition -----------------------------------------------------


def compose_parallel(gadgets, shared_targets) -> GadgetInstance:
    """Merge gadgets acting on disjoint ancilla sets over shared targets.

    All gadgets must live on the same register, use passthrough encodings
    with the same logical qubits, share the order, and touch only their
    own ancillas plus the shared targets.
    """
    if not gadgets:
        raise ValueError("nothing to compose")
    if len(gadgets) == 1:
        return gadgets[0]
    n = gadgets[0].n_qubits
    order = gadgets[0].order
    shared = set(shared_targets)
    seen_ancillas = set()
    for g in gadgets:
        if g.n_qubits != n or g.order != order:
            raise ValueError("gadgets must share register size and order")
        anc = set(g.ancillas)
        if anc & seen_ancillas:
            raise ValueError(f"ancilla overlap: {sorted(anc & seen_ancillas)}")
        seen_ancillas |= anc
        for op in (g.v_main, g.v_extra, g.v_extra_tilde):
            extra = op.support() - anc - shared
            if extra:
                raise ValueError(
                    f"{g.name} acts outside its ancillas and shared targets: {sorted(extra)}"
                )
    logical = sorted(set(range(n)) - seen_ancillas)
    ancillas = sorted(seen_ancillas)
    by_block = sorted(gadgets, key=lambda g: min(g.ancillas))
    anc_state = np.ones(1, dtype=complex)
    pos = 0
    for g in by_block:
        idx = [ancillas.index(a) for a in g.encoding.meta["ancillas"]]
        if idx != list(range(pos, pos + len(idx))):
            raise ValueError(
                "composition requires each gadget's ancillas to form a "
                "contiguous block in the merged register"
            )
        pos += len(idx)
        anc_state = np.kron(g.encoding.meta["ancilla_state"], anc_state)
    encoding = Encoding.passthrough(n, logical, anc_state, ancillas)

    def total(attr):
        out = PauliOperator(n, [])
        for g in gadgets:
            out = out + getattr(g, attr)
        return out

    return GadgetInstance(
        name="+".join(g.name for g in gadgets),
        h0=total("h0"),
        v_main=total("v_main"),
        v_extra=total("v_extra"),
        v_extra_tilde=total("v_extra_tilde"),
        delta=min(g.delta for g in gadgets),
        order=order,
        encoding=encoding,
        predicted_target=sum(
            (g.predicted_target for g in gadgets[1:]), gadgets[0].predicted_target
        ),
        predicted_shift=sum(g.predicted_shift for g in gadgets),
        strict_blocks=all(g.strict_blocks for g in gadgets),
        ancillas=tuple(ancillas),
    )
