"""Gadget constructors, the two-qubit interaction classifier, and the
stoquasticity witness.

Normalization convention used by every constructor here: physical legs
are scaled by 1/sqrt(2) relative to the caller's weights, so that one
A-side qubit and one B-side qubit with unit weights produce exactly one
unit of the tilde interaction between them. Cross-side pairs then enter
the predicted target once per unordered pair, matching the quoted target
formulas with single counting.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .pauli import PauliOperator, PauliString, identity, two_body
from .sw import Encoding, GadgetInstance, ground_split, operator_from_matrix

__all__ = [
    "XYZCoupling",
    "InteractionClass",
    "tilde",
    "tilde_bilinear",
    "classify",
    "stoquastic_witness",
    "coupling_operator",
    "pair_h0",
    "bell_psi_minus",
    "basic_gadget",
    "antisym_gadget",
    "tim_gadget",
    "xxyy_gamma_gadget",
    "mediator_gadget",
    "third_order_chain_gadget",
    "TriangularFamily",
    "triangular_family",
    "one_local_cancel_gadget",
    "assign_signs",
    "SignAssignment",
    "GADGET_NAMES",
]

GADGET_NAMES = (
    "basic",
    "antisym",
    "tim",
    "xxyy-gamma",
    "subdivide+",
    "subdivide-",
    "fork",
    "crossing",
    "triangular",
    "cancel1local",
)


@dataclass(frozen=True)
class XYZCoupling:
    """Coefficients of XX, YY, ZZ in a symmetric 2-qubit interaction."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for v in (self.alpha, self.beta, self.gamma):
            if not math.isfinite(v):
                raise ValueError("coupling coefficients must be finite")

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)

    def pairwise_sums(self):
        a, b, g = self.as_tuple()
        return (a + b, a + g, b + g)

    def pairwise_sums_positive(self):
        return all(s > 0 for s in self.pairwise_sums())

    def scaled(self, k):
        return XYZCoupling(k * self.alpha, k * self.beta, k * self.gamma)

    def isclose(self, other, tol=1e-12):
        return all(
            abs(x - y) <= tol for x, y in zip(self.as_tuple(), other.as_tuple())
        )

    def proportional_to(self, other, tol=1e-10):
        v, w = np.array(self.as_tuple()), np.array(other.as_tuple())
        if np.linalg.norm(v) == 0 or np.linalg.norm(w) == 0:
            return False
        k = (v @ w) / (w @ w)
        return bool(np.linalg.norm(v - k * w) <= tol * max(1.0, np.linalg.norm(v)))


class InteractionClass:
    QMA_COMPLETE = "QMA-complete"
    STOQMA = "StoqMA"
    STOQMA_COMPLETE = "StoqMA-complete"
    P = "P"
    ALL = (QMA_COMPLETE, STOQMA, STOQMA_COMPLETE, P)


def tilde(c: XYZCoupling) -> XYZCoupling:
    """Componentwise alpha^2/(beta+gamma), etc.

    Defined only when all pairwise sums are strictly positive.
    """
    ab, ag, bg = c.pairwise_sums()
    if not c.pairwise_sums_positive():
        raise ValueError(f"pairwise sums must be positive, got {c.pairwise_sums()}")
    return XYZCoupling(c.alpha**2 / bg, c.beta**2 / ag, c.gamma**2 / ab)


def tilde_bilinear(left: XYZCoupling, right: XYZCoupling, heavy: XYZCoupling):
    """Mixed second-order coupling: two legs of types left/right mediated
    by a pair held in the ground state of ``heavy``."""
    ab, ag, bg = heavy.pairwise_sums()
    if not heavy.pairwise_sums_positive():
        raise ValueError("heavy coupling must have positive pairwise sums")
    return XYZCoupling(
        left.alpha * right.alpha / bg,
        left.beta * right.beta / ag,
        left.gamma * right.gamma / ab,
    )


def tilde_sum(leg: XYZCoupling, heavy: XYZCoupling) -> float:
    """Energy-shift rate of one leg of type ``leg`` through ``heavy``."""
    t = tilde_bilinear(leg, leg, heavy)
    return t.alpha + t.beta + t.gamma


def prime(c: XYZCoupling) -> XYZCoupling:
    """Third-order chain coupling alpha^3/(beta+gamma)^2, etc."""
    ab, ag, bg = c.pairwise_sums()
    if not c.pairwise_sums_positive():
        raise ValueError("pairwise sums must be positive")
    return XYZCoupling(c.alpha**3 / bg**2, c.beta**3 / ag**2, c.gamma**3 / ab**2)


# -- classifier ---------------------------------------------------------------


def _permutations(c):
    return {p for p in itertools.permutations(c.as_tuple())}


def classify(c: XYZCoupling) -> str:
    """Theorem-2 region of the positive-weights interaction problem."""
    if c.pairwise_sums_positive():
        return InteractionClass.QMA_COMPLETE
    for a, b, g in _permutations(c):
        if a == -b and a != 0 and a + g > 0 and b + g > 0:
            return InteractionClass.STOQMA_COMPLETE
    for a, b, g in _permutations(c):
        if a == b and g <= -abs(a):
            return InteractionClass.P
    return InteractionClass.STOQMA


_AXES = ("X", "Y", "Z")


def stoquastic_witness(c: XYZCoupling, tol=1e-12):
    """Axis relabeling under which the 4x4 matrix of the interaction has
    all off-diagonal entries <= tol, or None.

    The matrix in the (relabeled) Z basis has off-diagonal entries
    alpha' - beta' and alpha' + beta', so a relabeling witnesses
    stoquasticity iff both are <= tol.
    """
    coeffs = dict(zip(_AXES, c.as_tuple()))
    for perm in itertools.permutations(_AXES):
        relabeling = dict(zip(_AXES, perm))  # original axis -> new axis
        new = {relabeling[ax]: coeffs[ax] for ax in _AXES}
        a, b = new["X"], new["Y"]
        if a - b <= tol and a + b <= tol:
            return relabeling
    return None


# -- operator builders --------------------------------------------------------


def coupling_operator(c: XYZCoupling, n, i, j) -> PauliOperator:
    """alpha XiXj + beta YiYj + gamma ZiZj on an n-qubit register."""
    terms = []
    for coeff, letter in zip(c.as_tuple(), "XYZ"):
        if coeff != 0.0:
            terms.append(
                (coeff, PauliString.from_map(n, {i: letter, j: letter}))
            )
    return PauliOperator(n, terms)


def pair_h0(c: XYZCoupling, n, a, b) -> PauliOperator:
    """Heavy pair Hamiltonian (1/2)[H_ab + (alpha+beta+gamma) I].

    Its ground state is the singlet at energy zero; the excited energies
    are the pairwise sums of the coupling.
    """
    const = (c.alpha + c.beta + c.gamma) / 2.0
    return 0.5 * coupling_operator(c, n, a, b) + identity(n, const)


def bell_psi_minus():
    """(|01> - |10>)/sqrt2 on a 2-qubit sub-register (bit0 = first qubit)."""
    v = np.zeros(4, dtype=complex)
    v[2] = 1 / np.sqrt(2)  # qubit0=0, qubit1=1
    v[1] = -1 / np.sqrt(2)
    return v


def _antisym_op(n, a, i) -> PauliOperator:
    """X_a Z_i - Z_a X_i."""
    return two_body(n, a, i, "XZ") - two_body(n, a, i, "ZX")


def _antisym_ground():
    """|psi0> = (|00> + |01> - |10> + |11>)/2 on (a, b) with bit0 = a."""
    v = np.zeros(4, dtype=complex)
    v[0] = 0.5  # |a=0 b=0>
    v[2] = 0.5  # |a=0 b=1>
    v[1] = -0.5  # |a=1 b=0>
    v[3] = 0.5
    return v


def _logical_size(qubits, n_logical=None):
    need = max(qubits) + 1
    if n_logical is None:
        return need
    if n_logical < need:
        raise ValueError("n_logical too small for the given target qubits")
    return n_logical


# -- named gadgets ------------------------------------------------------------


def basic_gadget(
    c: XYZCoupling,
    side_A,
    side_B,
    delta,
    n_logical=None,
    ancilla_start=None,
    n_total=None,
    name="basic",
) -> GadgetInstance:
    """Mediator-pair gadget of the paper's second-order workhorse form.

    side_A/side_B are lists of (qubit, weight); A-side qubits couple to
    ancilla a, B-side to ancilla b. Opposite-side pairs acquire +w w'
    tilde interactions, same-side pairs -w w'. ``ancilla_start`` and
    ``n_total`` allow placing several gadgets on one register for
    parallel composition.
    """
    if not c.pairwise_sums_positive():
        raise ValueError("basic gadget requires all pairwise sums positive")
    side_A, side_B = list(side_A), list(side_B)
    qubits = [q for q, _ in side_A + side_B]
    if len(set(qubits)) != len(qubits):
        raise ValueError("target qubits must be distinct")
    nl = _logical_size(qubits, n_logical)
    a = nl if ancilla_start is None else ancilla_start
    b = a + 1
    n = max(nl + 2, b + 1) if n_total is None else n_total
    if a < nl or b >= n:
        raise ValueError("ancillas must sit above the logical register")
    h0 = pair_h0(c, n, a, b)
    s = 1 / np.sqrt(2)
    v_main = PauliOperator(n, [])
    for q, w in side_A:
        v_main = v_main + (w * s) * coupling_operator(c, n, q, a)
    for q, w in side_B:
        v_main = v_main + (w * s) * coupling_operator(c, n, q, b)

    t = tilde(c)
    target = PauliOperator(nl, [])
    for (qi, wi), (qj, wj) in itertools.product(side_A, side_B):
        target = target + (wi * wj) * coupling_operator(t, nl, qi, qj)
    for (qi, wi), (qj, wj) in itertools.combinations(side_A, 2):
        target = target - (wi * wj) * coupling_operator(t, nl, qi, qj)
    for (qi, wi), (qj, wj) in itertools.combinations(side_B, 2):
        target = target - (wi * wj) * coupling_operator(t, nl, qi, qj)
    rate = tilde_sum(c, c)
    shift = -(rate / 2.0) * sum(w * w for _, w in side_A + side_B)

    passthrough = [q for q in range(n) if q not in (a, b)]
    enc = Encoding.passthrough(n, passthrough, bell_psi_minus(), [a, b])
    return GadgetInstance(
        name=name,
        h0=h0,
        v_main=v_main,
        v_extra=PauliOperator(n, []),
        v_extra_tilde=PauliOperator(n, []),
        delta=delta,
        order=2,
        encoding=enc,
        predicted_target=target,
        predicted_shift=shift,
        ancillas=(a, b),
        meta={"coupling": c.as_tuple()},
    )


def antisym_gadget(side_A, side_B, delta, n_logical=None) -> GadgetInstance:
    """Second-order gadget for the antisymmetric interaction XZ - ZX."""
    side_A, side_B = list(side_A), list(side_B)
    qubits = [q for q, _ in side_A + side_B]
    nl = _logical_size(qubits, n_logical)
    n = nl + 2
    a, b = nl, nl + 1
    h0 = 0.5 * (_antisym_op(n, a, b)) + identity(n, 1.0)
    s = 1 / np.sqrt(2)
    v_main = PauliOperator(n, [])
    for q, w in side_A:
        v_main = v_main + (w * s) * _antisym_op(n, a, q)
    for q, w in side_B:
        v_main = v_main + (w * s) * _antisym_op(n, b, q)

    target = PauliOperator(nl, [])
    for (qi, wi), (qj, wj) in itertools.product(side_A, side_B):
        target = target + (wi * wj) * (
            two_body(nl, qi, qj, "XZ") - two_body(nl, qi, qj, "ZX")
        )
    for side in (side_A, side_B):
        for (qi, wi), (qj, wj) in itertools.combinations(side, 2):
            target = target - (wi * wj) * (
                two_body(nl, qi, qj, "XX") + two_body(nl, qi, qj, "ZZ")
            )
    shift = -float(sum(w * w for _, w in side_A + side_B))

    enc = Encoding.passthrough(n, list(range(nl)), _antisym_ground(), [a, b])
    return GadgetInstance(
        name="antisym",
        h0=h0,
        v_main=v_main,
        v_extra=PauliOperator(n, []),
        v_extra_tilde=PauliOperator(n, []),
        delta=delta,
        order=2,
        encoding=enc,
        predicted_target=target,
        predicted_shift=shift,
        ancillas=(a, b),
    )


def tim_gadget(lam: dict, mu: dict, delta) -> GadgetInstance:
    """Antiferromagnetic transverse-Ising gadget over ZZ pair encodings.

    lam maps logical pairs (i, j) to signed XX weights; mu maps logical
    qubits to transverse weights. Each logical qubit i is encoded in
    physical qubits (2i, 2i+1) with |0L> = |Psi->.

    Second-order perturbation theory pushes the |1L> level down, so the
    transverse part of the simulated target is -2 mu_i^2 (I - Z_i): a
    positive multiple of Z_i up to an energy shift.
    """
    logicals = sorted(
        {q for pair in lam for q in pair} | set(mu.keys())
    )
    if logicals != list(range(len(logicals))):
        raise ValueError("logical qubits must be 0..m-1")
    m = len(logicals)
    n = 2 * m
    qa = lambda i: 2 * i
    qb = lambda i: 2 * i + 1

    h0 = PauliOperator(n, [])
    for i in range(m):
        h0 = h0 + 0.5 * two_body(n, qa(i), qb(i), "ZZ") + identity(n, 0.5)
    v_extra = PauliOperator(n, [])
    target = PauliOperator(m, [])
    for (i, j), w in lam.items():
        if w > 0:
            v_extra = v_extra + w * two_body(n, qa(i), qa(j), "ZZ")
        elif w < 0:
            v_extra = v_extra + (-w) * two_body(n, qa(i), qb(j), "ZZ")
        target = target + w * two_body(m, i, j, "XX")
    v_main = PauliOperator(n, [])
    shift = 0.0
    for i, w in mu.items():
        if w == 0:
            continue
        v_main = v_main + w * (
            PauliOperator(n, [(1.0, PauliString.from_map(n, {qa(i): "X"}))])
            + PauliOperator(n, [(1.0, PauliString.from_map(n, {qb(i): "X"}))])
        )
        # -2 mu^2 (I - Z_i): traceless part +2 mu^2 Z_i, shift -2 mu^2
        target = target + PauliOperator(
            m, [(2 * w * w, PauliString.from_map(m, {i: "Z"}))]
        )
        shift += -2 * w * w

    enc = Encoding.bell_pairs(n, [(qa(i), qb(i)) for i in range(m)])
    return GadgetInstance(
        name="tim",
        h0=h0,
        v_main=v_main,
        v_extra=v_extra,
        v_extra_tilde=PauliOperator(n, []),
        delta=delta,
        order=2,
        encoding=enc,
        predicted_target=target,
        predicted_shift=shift,
        ancillas=tuple(range(n)),  # every physical qubit carries encoding
    )


def xxyy_gamma_gadget(gamma, lam: dict, mu: dict, delta) -> GadgetInstance:
    """Gadget over the interaction XX - YY + gamma ZZ for gamma > 1.

    lam maps logical pairs to signed XX weights (first order); mu maps
    ordered logical pairs (i, j) to weights whose second-order effect is
    -mu^2/(gamma(gamma^2-1)) (Z - (2 gamma^2 - 1) I)_i (Z - I)_j.

    The off-block of v_extra is nonzero (the physical interaction itself
    excites the pairs); its contribution enters at O(1/delta) and the
    block check is therefore relaxed for this gadget.
    """
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    c = XYZCoupling(1.0, -1.0, gamma)
    logicals = sorted({q for pair in lam for q in pair} | {q for pair in mu for q in pair})
    if logicals != list(range(len(logicals))):
        raise ValueError("logical qubits must be 0..m-1")
    m = len(logicals)
    n = 2 * m
    qa = lambda i: 2 * i
    qb = lambda i: 2 * i + 1

    h0 = PauliOperator(n, [])
    for i in range(m):
        h0 = h0 + 0.5 * coupling_operator(c, n, qa(i), qb(i)) + identity(n, gamma / 2)

    v_extra = PauliOperator(n, [])
    target = PauliOperator(m, [])
    for (i, j), w in lam.items():
        if w > 0:
            v_extra = v_extra + (w / gamma) * coupling_operator(c, n, qa(i), qa(j))
        elif w < 0:
            v_extra = v_extra + (-w / gamma) * coupling_operator(c, n, qa(i), qb(j))
        target = target + w * two_body(m, i, j, "XX")

    v_main = PauliOperator(n, [])
    shift = 0.0
    f = 1.0 / (gamma * (gamma**2 - 1.0))
    for (i, j), w in mu.items():
        if w == 0:
            continue
        v_main = (
            v_main
            + w * coupling_operator(c, n, qa(i), qa(j))
            + w * coupling_operator(c, n, qa(i), qb(j))
        )
        # -(w^2 f) (Z - (2g^2-1) I)_i (Z - I)_j expanded into Paulis
        g2 = 2 * gamma**2 - 1
        target = target + PauliOperator(
            m,
            [
                (-w * w * f, PauliString.from_map(m, {i: "Z", j: "Z"})),
                (w * w * f, PauliString.from_map(m, {i: "Z"})),
                (w * w * f * g2, PauliString.from_map(m, {j: "Z"})),
            ],
        )
        shift += -w * w * f * g2

    enc = Encoding.bell_pairs(n, [(qa(i), qb(i)) for i in range(m)])
    return GadgetInstance(
        name="xxyy-gamma",
        h0=h0,
        v_main=v_main,
        v_extra=v_extra,
        v_extra_tilde=PauliOperator(n, []),
        delta=delta,
        order=2,
        encoding=enc,
        predicted_target=target,
        predicted_shift=shift,
        strict_blocks=False,
        ancillas=tuple(range(n)),
        meta={"gamma": gamma},
    )


def mediator_gadget(kind, c: XYZCoupling, targets, delta, weights=None):
    """Subdivision, fork and crossing gadgets over a mediator pair.

    The fork/crossing correction terms are emitted in tilde units so the
    cancellation is exact for any admissible coupling; for the XY and
    Heisenberg interactions these corrections are proportional to the
    physical interaction itself.
    """
    targets = list(targets)
    arity = {"subdivide_pos": 2, "subdivide_neg": 2, "fork": 3, "crossing": 4}
    if kind not in arity:
        raise ValueError(f"unknown mediator gadget kind {kind!r}")
    if len(targets) != arity[kind]:
        raise ValueError(f"{kind} expects {arity[kind]} targets")
    if weights is None:
        weights = [1.0] * len(targets)
    t = tilde(c)
    nl = max(targets) + 1

    if kind == "subdivide_pos":
        (t1, t2), (w1, w2) = targets, weights
        return basic_gadget(
            c, [(t1, w1)], [(t2, w2)], delta, n_logical=nl, name="subdivide+"
        )
    if kind == "subdivide_neg":
        (t1, t2), (w1, w2) = targets, weights
        return basic_gadget(
            c, [(t1, w1), (t2, w2)], [], delta, n_logical=nl, name="subdivide-"
        )
    if kind == "fork":
        (t1, t2, t3), (w1, w2, w3) = targets, weights
        g = basic_gadget(
            c, [(t1, w1), (t2, w2)], [(t3, w3)], delta, n_logical=nl, name="fork"
        )
        extra = (w1 * w2) * coupling_operator(t, g.n_qubits, t1, t2)
        g.v_extra = extra
        g.predicted_target = g.predicted_target + (w1 * w2) * coupling_operator(
            t, nl, t1, t2
        )
        return g
    # crossing
    (t1, t2, t3, t4), (w1, w2, w3, w4) = targets, weights
    g = basic_gadget(
        c,
        [(t1, w1), (t2, w2)],
        [(t3, w3), (t4, w4)],
        delta,
        n_logical=nl,
        name="crossing",
    )
    n = g.n_qubits
    extra = (
        (w1 * w2) * coupling_operator(t, n, t1, t2)
        + (w3 * w4) * coupling_operator(t, n, t3, t4)
        - (w1 * w3) * coupling_operator(t, n, t1, t3)
        - (w2 * w4) * coupling_operator(t, n, t2, t4)
    )
    g.v_extra = extra
    g.predicted_target = g.predicted_target + (
        (w1 * w2) * coupling_operator(t, nl, t1, t2)
        + (w3 * w4) * coupling_operator(t, nl, t3, t4)
        - (w1 * w3) * coupling_operator(t, nl, t1, t3)
        - (w2 * w4) * coupling_operator(t, nl, t2, t4)
    )
    return g


def third_order_chain_gadget(c: XYZCoupling, delta, leg_weight=1.0) -> GadgetInstance:
    """Six-qubit chain whose third-order physics is the prime coupling.

    Register layout: targets 0 and 5; heavy pairs (1,2) and (3,4); legs
    0-1, 2-3, 4-5 at a common weight w. The effective interaction between
    the targets is w^3 (alpha^3/(beta+gamma)^2 XX + ...); the second-order
    part is proportional to the identity and is cancelled by the
    Delta^(1/3) counterterm, so the predicted energy shift is zero.
    """
    if not c.pairwise_sums_positive():
        raise ValueError("chain gadget requires positive pairwise sums")
    n = 6
    w = leg_weight
    const = 2.0 * (c.alpha + c.beta + c.gamma)
    h0 = (
        coupling_operator(c, n, 1, 2)
        + coupling_operator(c, n, 3, 4)
        + identity(n, const)
    )
    v_main = w * (
        coupling_operator(c, n, 0, 1)
        + coupling_operator(c, n, 2, 3)
        + coupling_operator(c, n, 4, 5)
    )
    # second-order part of v_main is proportional to the identity on the
    # ground sector; compute its rate numerically and cancel it exactly
    sp = ground_split(h0)
    vm_pm = sp.block(v_main, "+", "-")
    inv = 1.0 / sp.plus_eigenvalues
    second = vm_pm.conj().T @ (inv[:, None] * vm_pm)
    s_rate = float(np.real(np.trace(second)) / second.shape[0])
    if np.linalg.norm(second - s_rate * np.eye(second.shape[0]), 2) > 1e-9 * max(
        1.0, abs(s_rate)
    ):
        raise RuntimeError("chain second-order term is unexpectedly non-scalar")
    v_extra_tilde = identity(n, s_rate)

    p = prime(c)
    anc_state = np.kron(bell_psi_minus(), bell_psi_minus())
    enc = Encoding.passthrough(n, [0, 5], anc_state, [1, 2, 3, 4])
    target = (w**3) * coupling_operator(p, 2, 0, 1)
    # the third-order product carries an identity component of its own on
    # top of the prime interaction; extract it exactly from the blocks
    rot = enc.matrix.conj().T @ sp.projector_minus  # minus-eigenbasis -> logical
    vpp = sp.block(v_main, "+", "+")
    third = vm_pm.conj().T @ (inv[:, None] * (vpp @ (inv[:, None] * vm_pm)))
    third_logical = rot @ third @ rot.conj().T
    shift = float(np.real(np.trace(third_logical)) / third_logical.shape[0])
    eff3 = operator_from_matrix(third_logical)
    resid = (eff3.traceless() - target).to_dense(cap=2)
    if np.linalg.norm(resid, 2) > 1e-9 * max(1.0, abs(w) ** 3):
        raise RuntimeError("chain third-order term deviates from the prime coupling")
    return GadgetInstance(
        name="triangular-chain",
        h0=h0,
        v_main=v_main,
        v_extra=PauliOperator(n, []),
        v_extra_tilde=v_extra_tilde,
        delta=delta,
        order=3,
        encoding=enc,
        predicted_target=target,
        predicted_shift=shift,
        ancillas=(1, 2, 3, 4),
        meta={"coupling": c.as_tuple(), "leg_weight": w},
    )


# -- triangular family --------------------------------------------------------


@dataclass
class TriangularFamily:
    """Closed forms around the two-path triangular-lattice gadget."""

    coupling: XYZCoupling
    h_prime: XYZCoupling
    h1: XYZCoupling
    h2: XYZCoupling
    mu_alpha: float
    mu_beta: float
    mu_gamma: float

    def interpolate(self, mu) -> XYZCoupling:
        """-H1 + mu (H1 + H2), componentwise."""
        a = -self.h1.alpha + mu * (self.h1.alpha + self.h2.alpha)
        b = -self.h1.beta + mu * (self.h1.beta + self.h2.beta)
        g = -self.h1.gamma + mu * (self.h1.gamma + self.h2.gamma)
        return XYZCoupling(a, b, g)

    def intermediate_gadget(self, lam, mu, delta) -> GadgetInstance:
        """Six-qubit intermediate simulated by the full two-path gadget.

        Heavy pairs carry the prime and tilde interactions directly; the
        legs carry tilde interactions with weights (lam, -1) on the prime
        path and (mu, +1) on the tilde path, so the predicted target is
        -lam H1 + mu H2 between the two endpoint qubits.
        """
        c, t, p = self.coupling, tilde(self.coupling), self.h_prime
        n = 6
        h0 = pair_h0(p, n, 1, 2) + pair_h0(t, n, 3, 4)
        s = 1 / np.sqrt(2)
        v_main = (
            (lam * s) * coupling_operator(t, n, 0, 1)
            + (-1.0 * s) * coupling_operator(t, n, 2, 5)
            + (mu * s) * coupling_operator(t, n, 0, 3)
            + (1.0 * s) * coupling_operator(t, n, 4, 5)
        )
        target = (-lam) * coupling_operator(self.h1, 2, 0, 1) + mu * coupling_operator(
            self.h2, 2, 0, 1
        )
        shift = -(lam * lam + 1.0) * tilde_sum(t, p) / 2.0
        shift += -(mu * mu + 1.0) * tilde_sum(t, t) / 2.0
        anc_state = np.kron(bell_psi_minus(), bell_psi_minus())
        enc = Encoding.passthrough(n, [0, 5], anc_state, [1, 2, 3, 4])
        return GadgetInstance(
            name="triangular",
            h0=h0,
            v_main=v_main,
            v_extra=PauliOperator(n, []),
            v_extra_tilde=PauliOperator(n, []),
            delta=delta,
            order=2,
            encoding=enc,
            predicted_target=target,
            predicted_shift=shift,
            ancillas=(1, 2, 3, 4),
        )


def triangular_family(c: XYZCoupling) -> TriangularFamily:
    """Closed-form data for the two-path gadget: H', H1, H2 and the
    interpolation zeros mu_alpha, mu_beta, mu_gamma."""
    if not c.pairwise_sums_positive():
        raise ValueError("pairwise sums must be positive")
    if abs(c.alpha - c.beta) < 1e-12 and abs(c.beta - c.gamma) < 1e-12:
        raise ValueError(
            "Heisenberg-proportional couplings make the two paths degenerate"
        )
    t = tilde(c)
    p = prime(c)
    if not p.pairwise_sums_positive():
        raise ValueError("prime coupling has non-positive pairwise sums")
    h1 = tilde_bilinear(t, t, p)
    h2 = tilde_bilinear(t, t, t)

    def crossing(x1, x2):
        tot = x1 + x2
        return x1 / tot if tot != 0 else float("nan")

    return TriangularFamily(
        coupling=c,
        h_prime=p,
        h1=h1,
        h2=h2,
        mu_alpha=crossing(h1.alpha, h2.alpha),
        mu_beta=crossing(h1.beta, h2.beta),
        mu_gamma=crossing(h1.gamma, h2.gamma),
    )


# -- two-round numerical extraction of the path interactions -----------------


def _frozen_pairs_passthrough(n, logical, pairs):
    ancillas = []
    state = np.ones(1, dtype=complex)
    for qa, qb in pairs:
        ancillas.extend([qa, qb])
        state = np.kron(bell_psi_minus(), state)
    return Encoding.passthrough(n, logical, state, ancillas)


def _fit_xyz(op: PauliOperator):
    """Coefficients of XX/YY/ZZ between the two logical qubits, plus the
    operator-norm of whatever remains."""
    fit = XYZCoupling(
        op.coefficient(((0, "X"), (1, "X"))),
        op.coefficient(((0, "Y"), (1, "Y"))),
        op.coefficient(((0, "Z"), (1, "Z"))),
    )
    rest = op.traceless() - coupling_operator(fit, 2, 0, 1)
    junk = float(np.linalg.norm(rest.to_dense(cap=2), 2))
    return fit, junk


def extract_h2_numeric(c: XYZCoupling, delta_inner=3e8, delta_outer=3e4):
    """Two-round pipeline measuring the tilde-of-tilde interaction.

    Inner round: three parallel mediator-pair gadgets build the heavy
    tilde interaction of the outer pair and the two tilde legs; outer
    round: the resulting second-order gadget couples the endpoints.
    Returns (fitted XYZCoupling, off-family operator norm, eta).
    """
    from .sw import sw_numerical_effective

    n = 10
    u = math.sqrt(delta_outer) / 2.0
    v = delta_outer**0.25 / 2.0**0.75
    t = tilde(c)
    h = PauliOperator(n, [])
    for a, b in ((4, 5), (6, 7), (8, 9)):
        h = h + delta_inner * pair_h0(c, n, a, b)
    root = math.sqrt(delta_inner)
    legs = (
        u * (coupling_operator(c, n, 2, 4) + coupling_operator(c, n, 3, 5))
        + v * (coupling_operator(c, n, 0, 6) + coupling_operator(c, n, 2, 7))
        + v * (coupling_operator(c, n, 3, 8) + coupling_operator(c, n, 1, 9))
    )
    h = h + root * legs
    h = h + identity(n, delta_outer * (t.alpha + t.beta + t.gamma) / 2.0)
    enc = _frozen_pairs_passthrough(
        n, [0, 1], [(2, 3), (4, 5), (6, 7), (8, 9)]
    )
    eff, eta = sw_numerical_effective(h, enc)
    fit, junk = _fit_xyz(eff)
    return fit, junk, eta


def extract_h1_numeric(c: XYZCoupling, delta_inner=3e8, delta_outer=3e4):
    """Two-round pipeline measuring the prime-mediated tilde interaction.

    The heavy interaction of the outer pair is built by the six-qubit
    third-order chain; the tilde legs by mediator-pair gadgets.
    Returns (fitted XYZCoupling, off-family operator norm, eta).
    """
    from .sw import sw_numerical_effective

    n = 12
    w = (delta_outer / 2.0) ** (1.0 / 3.0)
    v = delta_outer**0.25 / 2.0**0.75
    p = prime(c)
    # unit-leg counterterm rate of the chain, scaled by w^2
    s_unit = third_order_chain_gadget(c, 1.0).v_extra_tilde.identity_coefficient
    h = PauliOperator(n, [])
    h = h + delta_inner * (
        coupling_operator(c, n, 3, 4)
        + coupling_operator(c, n, 5, 6)
        + identity(n, 2.0 * (c.alpha + c.beta + c.gamma))
    )
    for a, b in ((8, 9), (10, 11)):
        h = h + delta_inner * pair_h0(c, n, a, b)
    h = h + delta_inner ** (2.0 / 3.0) * w * (
        coupling_operator(c, n, 2, 3)
        + coupling_operator(c, n, 4, 5)
        + coupling_operator(c, n, 6, 7)
    )
    h = h + identity(n, delta_inner ** (1.0 / 3.0) * w**2 * s_unit)
    root = math.sqrt(delta_inner)
    h = h + root * v * (
        coupling_operator(c, n, 0, 8)
        + coupling_operator(c, n, 2, 9)
        + coupling_operator(c, n, 7, 10)
        + coupling_operator(c, n, 1, 11)
    )
    h = h + identity(n, delta_outer * (p.alpha + p.beta + p.gamma) / 2.0)
    enc = _frozen_pairs_passthrough(
        n, [0, 1], [(2, 7), (3, 4), (5, 6), (8, 9), (10, 11)]
    )
    eff, eta = sw_numerical_effective(h, enc)
    fit, junk = _fit_xyz(eff)
    return fit, junk, eta


# -- one-local cancellation ---------------------------------------------------


def _split_two_qubit(op: PauliOperator):
    """Decompose a 2-qubit operator into (M, a_left, a_right, ident)."""
    if op.n_qubits != 2:
        raise ValueError("expected a 2-qubit operator")
    letters = "XYZ"
    m = np.zeros((3, 3))
    a_l = np.zeros(3)
    a_r = np.zeros(3)
    ident = 0.0
    for coeff, s in op.terms:
        f = dict(s.factors)
        if len(f) == 2:
            m[letters.index(f[0]), letters.index(f[1])] = coeff
        elif len(f) == 1:
            (q, p), = f.items()
            if q == 0:
                a_l[letters.index(p)] = coeff
            else:
                a_r[letters.index(p)] = coeff
        else:
            ident = coeff
    return m, a_l, a_r, ident


def one_local_cancel_gadget(full_interaction: PauliOperator, delta=1.0):
    """First-order square gadget cancelling a 1-local term.

    The input must be in a symmetric (alpha XX + beta YY + gamma ZZ
    + AI + IA) or antisymmetric (t(XZ - ZX) + AI - IA) normal form. Four
    ancillas a,b,c,d on qubits 1..4 are frozen into the unique ground
    state of H_ab - H_cb + H_cd - H_ad, whose single-qubit marginals are
    maximally mixed, so the first-order effect of -H_full on (target, d)
    is exactly -A on the target qubit 0.
    """
    m, a_l, a_r, ident = _split_two_qubit(full_interaction)
    sym = np.allclose(a_l, a_r, atol=1e-12) and np.allclose(
        m, np.diag(np.diag(m)), atol=1e-12
    )
    asym_m = np.allclose(m + m.T, 0, atol=1e-12) and np.allclose(
        np.diag(m), 0, atol=1e-12
    )
    antisym = np.allclose(a_l, -a_r, atol=1e-12) and asym_m
    if not (sym or antisym):
        raise ValueError("interaction is outside the supported normal forms")

    n = 5
    target_q = 0
    anc = (1, 2, 3, 4)

    def h_full(x, y):
        return full_interaction.embed(n, {0: x, 1: y})

    a, b, cq, d = anc
    h0 = h_full(a, b) - h_full(cq, b) + h_full(cq, d) - h_full(a, d)
    v_main = -1.0 * h_full(target_q, d)

    # ancilla-register ground state, uniqueness and marginal checks
    anc_h0 = full_interaction.embed(4, {0: 0, 1: 1}) - full_interaction.embed(
        4, {0: 2, 1: 1}
    ) + full_interaction.embed(4, {0: 2, 1: 3}) - full_interaction.embed(
        4, {0: 0, 1: 3}
    )
    from .spectra import eig_dense

    res = eig_dense(anc_h0, want_vectors=True)
    if res.eigenvalues[1] - res.eigenvalues[0] < 1e-9:
        raise ValueError("H0 ground state is degenerate; input outside normal forms")
    omega = res.eigenvectors[0]
    h0 = h0 + identity(n, -float(res.eigenvalues[0]))
    for q in range(4):
        marg = _single_qubit_marginal(omega, 4, q)
        if not np.allclose(marg, np.eye(2) / 2, atol=1e-9):
            raise ValueError(f"ancilla {q} marginal is not maximally mixed")

    letters = "XYZ"
    target = PauliOperator(
        1,
        [
            (-a_l[k], PauliString.from_map(1, {0: letters[k]}))
            for k in range(3)
            if a_l[k] != 0.0
        ],
    )
    enc = Encoding.passthrough(n, [target_q], omega, list(anc))
    return GadgetInstance(
        name="cancel1local",
        h0=h0,
        v_main=v_main,
        v_extra=PauliOperator(n, []),
        v_extra_tilde=PauliOperator(n, []),
        delta=delta,
        order=1,
        encoding=enc,
        predicted_target=target,
        predicted_shift=-ident,
        ancillas=anc,
        meta={"form": "symmetric" if sym else "antisymmetric"},
    )


def _single_qubit_marginal(state, n_qubits, q):
    """Reduced 2x2 density matrix of qubit q in a pure n-qubit state."""
    psi = np.asarray(state).reshape([2] * n_qubits, order="C")
    # axis for qubit q in little-endian C-order reshape
    axis = n_qubits - 1 - q
    psi = np.moveaxis(psi, axis, 0).reshape(2, -1)
    return psi @ psi.conj().T


# -- square-lattice sign assignment -------------------------------------------


@dataclass
class SignAssignment:
    mu: dict  # (vertex, neighbor) -> +-1 for lattice vertices (i, j)
    flagged_boundary: list  # vertices with nonzero residual 1-local sum
    rows: int
    cols: int

    def residual(self, v):
        return sum(s for (a, _), s in self.mu.items() if a == v)


def assign_signs(lam_row, lam_col=None) -> SignAssignment:
    """Inductive sign assignment on a rectangular grid of target weights.

    lam_row[i][j] is the weight on the edge (i,j)-(i,j+1); lam_col[i][j]
    on (i,j)-(i+1,j). Every edge weight must be nonzero. The returned map
    satisfies mu[u->v] * mu[v->u] = sgn(lambda_uv) on every edge and sums
    to zero around every interior vertex; boundary vertices with a
    leftover 1-local contribution are flagged.
    """
    lam_row = [list(r) for r in lam_row]
    rows = len(lam_row)
    if lam_col is None and rows == 1:
        lam_col = []
    lam_col = [list(r) for r in (lam_col or [])]
    cols = len(lam_row[0]) + 1 if lam_row and lam_row[0] else (
        len(lam_col[0]) if lam_col else 0
    )
    for r in lam_row:
        if any(w == 0 for w in r):
            raise ValueError("edge weights must be nonzero")
    for r in lam_col:
        if any(w == 0 for w in r):
            raise ValueError("edge weights must be nonzero")

    mu = {}

    def line(vertices, weights):
        if len(vertices) < 2:
            return
        mu[(vertices[0], vertices[1])] = +1
        for k in range(len(vertices) - 1):
            u, v = vertices[k], vertices[k + 1]
            sgn = 1 if weights[k] > 0 else -1
            mu[(v, u)] = sgn * mu[(u, v)]
            if k + 2 < len(vertices):
                mu[(v, vertices[k + 2])] = -mu[(v, u)]

    for i in range(rows):
        line([(i, j) for j in range(cols)], lam_row[i])
    for j in range(cols):
        if rows > 1:
            line([(i, j) for i in range(rows)], [lam_col[i][j] for i in range(rows - 1)])

    out = SignAssignment(mu=mu, flagged_boundary=[], rows=rows, cols=cols)
    for i in range(rows):
        for j in range(cols):
            interior = 0 < i < rows - 1 and 0 < j < cols - 1
            r = out.residual((i, j))
            if interior and r != 0:
                raise AssertionError(f"interior vertex {(i, j)} has residual {r}")
            if not interior and r != 0:
                out.flagged_boundary.append((i, j))
    return out
