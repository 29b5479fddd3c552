"""Pauli-string algebra and matrix-free Hamiltonian application.

Conventions (bit-exact, relied on by file I/O and all tests):

* qubit indices are 0-based;
* basis states are little-endian: basis index ``i`` assigns qubit ``q``
  the bit ``(i >> q) & 1``;
* coefficients are real (all Hamiltonians here are real combinations of
  Pauli strings), state amplitudes are complex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PauliString",
    "PauliOperator",
    "DENSE_CAP",
    "identity",
    "single",
    "two_body",
    "state_vector",
    "basis_state",
]

DENSE_CAP = 14

_PAULI_LETTERS = ("X", "Y", "Z")

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def state_vector(n_qubits, data=None):
    """Return a complex state vector of length 2**n_qubits (zeros by default)."""
    dim = 1 << n_qubits
    if data is None:
        return np.zeros(dim, dtype=complex)
    v = np.asarray(data, dtype=complex)
    if v.shape != (dim,):
        raise ValueError(f"state vector must have length {dim}, got {v.shape}")
    return v


def basis_state(n_qubits, index):
    """Computational basis state |index> as a state vector."""
    v = state_vector(n_qubits)
    v[index] = 1.0
    return v


@dataclass(frozen=True)
class PauliString:
    """A single Pauli string: a map qubit -> X/Y/Z, identity elsewhere."""

    n_qubits: int
    factors: tuple  # sorted tuple of (qubit, letter)

    def __post_init__(self):
        if self.n_qubits <= 0:
            raise ValueError("n_qubits must be positive")
        seen = set()
        for q, p in self.factors:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit index {q} out of range for n={self.n_qubits}")
            if q in seen:
                raise ValueError(f"duplicate qubit index {q}")
            if p not in _PAULI_LETTERS:
                raise ValueError(f"unknown Pauli letter {p!r}")
            seen.add(q)
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @classmethod
    def from_map(cls, n_qubits, factors):
        return cls(n_qubits, tuple(factors.items()))

    @property
    def weight(self):
        return len(self.factors)

    def masks(self):
        """Bit masks (flip, phase) for the string's permutation action.

        The string maps |i> to phase(i) |i ^ flip> with
        phase(i) = (i)**nY * (-1)**popcount(i & phase_mask).
        """
        flip = 0
        phase = 0
        n_y = 0
        for q, p in self.factors:
            bit = 1 << q
            if p == "X":
                flip |= bit
            elif p == "Y":
                flip |= bit
                phase |= bit
                n_y += 1
            else:
                phase |= bit
        return flip, phase, n_y

    def __str__(self):
        if not self.factors:
            return "I"
        return " ".join(f"{p}@{q}" for q, p in self.factors)


def _string_key(factors):
    return tuple(sorted(factors))


class PauliOperator:
    """Weighted real sum of Pauli strings on a fixed number of qubits.

    Instances are immutable; construction canonicalises by merging
    duplicate strings and dropping exactly-zero coefficients.
    """

    __slots__ = ("n_qubits", "terms", "_plan")

    def __init__(self, n_qubits, terms=()):
        merged = {}
        for coeff, string in terms:
            if string.n_qubits != n_qubits:
                raise ValueError("all strings must share n_qubits")
            coeff = float(coeff)
            if not np.isfinite(coeff):
                raise ValueError("coefficients must be finite")
            key = string.factors
            merged[key] = merged.get(key, 0.0) + coeff
        canon = tuple(
            (c, PauliString(n_qubits, k)) for k, c in sorted(merged.items()) if c != 0.0
        )
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(self, "terms", canon)
        object.__setattr__(self, "_plan", None)

    def __setattr__(self, name, value):
        raise AttributeError("PauliOperator is immutable")

    # -- algebra ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, PauliOperator):
            if other.n_qubits != self.n_qubits:
                raise ValueError("qubit count mismatch")
            return PauliOperator(self.n_qubits, self.terms + other.terms)
        return NotImplemented

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return PauliOperator(
            self.n_qubits, tuple((scalar * c, s) for c, s in self.terms)
        )

    def __mul__(self, scalar):
        return self.__rmul__(scalar)

    def __neg__(self):
        return (-1.0) * self

    @property
    def n_terms(self):
        return len(self.terms)

    def coefficient(self, factors):
        """Coefficient of the string with the given (qubit, letter) factors."""
        key = _string_key(factors)
        for c, s in self.terms:
            if s.factors == key:
                return c
        return 0.0

    @property
    def identity_coefficient(self):
        return self.coefficient(())

    def traceless(self):
        """Drop the identity component."""
        return PauliOperator(
            self.n_qubits, tuple((c, s) for c, s in self.terms if s.factors)
        )

    def support(self):
        """Set of qubits on which some term acts nontrivially."""
        qs = set()
        for _, s in self.terms:
            qs.update(q for q, _ in s.factors)
        return qs

    def coeff_norm(self):
        """Sum of |coefficients|; an upper bound on the operator norm."""
        return float(sum(abs(c) for c, _ in self.terms))

    def embed(self, n_qubits, mapping=None):
        """Re-index the operator onto a larger register.

        mapping maps old qubit index -> new index (identity by default).
        """
        if mapping is None:
            mapping = {q: q for q in range(self.n_qubits)}
        terms = []
        for c, s in self.terms:
            terms.append(
                (c, PauliString(n_qubits, tuple((mapping[q], p) for q, p in s.factors)))
            )
        return PauliOperator(n_qubits, terms)

    # -- application ------------------------------------------------------

    def _compiled(self):
        plan = self._plan
        if plan is None:
            dim = 1 << self.n_qubits
            idx = np.arange(dim, dtype=np.uint64)
            plan = []
            for c, s in self.terms:
                flip, phase_mask, n_y = s.masks()
                src = idx ^ np.uint64(flip)
                signs = 1.0 - 2.0 * (
                    np.bitwise_count(src & np.uint64(phase_mask)) & 1
                ).astype(np.float64)
                phases = (c * (1j**n_y)) * signs
                plan.append((src, phases))
            object.__setattr__(self, "_plan", plan)
        return plan

    def apply(self, v):
        """Matrix-free H @ v; no dense matrix is allocated."""
        v = np.asarray(v)
        if v.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"state has wrong dimension {v.shape}, expected {1 << self.n_qubits}"
            )
        out = np.zeros(1 << self.n_qubits, dtype=complex)
        for src, phases in self._compiled():
            out += phases * v[src]
        return out

    def to_dense(self, cap=DENSE_CAP):
        """Dense Hermitian matrix; refuses above the qubit cap."""
        if self.n_qubits > cap:
            raise ValueError(
                f"n_qubits={self.n_qubits} exceeds dense cap {cap}; "
                "use the matrix-free apply path"
            )
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        rows = np.arange(dim)
        for src, phases in self._compiled():
            mat[rows, src] += phases
        return mat

    # -- serialization ----------------------------------------------------

    def to_text(self):
        """One term per line: ``coeff pauli@site [pauli@site ...]``."""
        lines = []
        for c, s in self.terms:
            lines.append(f"{format(c, '.12g')} {s}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text, n_qubits):
        terms = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                coeff = float(parts[0])
            except ValueError as exc:
                raise ValueError(f"line {ln}: bad coefficient {parts[0]!r}") from exc
            factors = {}
            for tok in parts[1:]:
                if tok == "I":
                    continue
                try:
                    p, q = tok.split("@")
                    factors[int(q)] = p
                except ValueError as exc:
                    raise ValueError(f"line {ln}: bad factor token {tok!r}") from exc
            terms.append((coeff, PauliString.from_map(n_qubits, factors)))
        return cls(n_qubits, terms)

    def __repr__(self):
        body = " + ".join(f"{c:g}*{s}" for c, s in self.terms[:4])
        more = "" if self.n_terms <= 4 else f" + ... ({self.n_terms} terms)"
        return f"PauliOperator({self.n_qubits}q: {body or '0'}{more})"

    def __eq__(self, other):
        return (
            isinstance(other, PauliOperator)
            and self.n_qubits == other.n_qubits
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n_qubits, self.terms))


# -- constructors ----------------------------------------------------------


def identity(n_qubits, coeff=1.0):
    return PauliOperator(n_qubits, [(coeff, PauliString(n_qubits, ()))])


def single(n_qubits, qubit, letter, coeff=1.0):
    return PauliOperator(
        n_qubits, [(coeff, PauliString.from_map(n_qubits, {qubit: letter}))]
    )


def two_body(n_qubits, i, j, letters, coeff=1.0):
    """coeff * P@i Q@j for a two-letter string like "XX"."""
    p, q = letters
    return PauliOperator(
        n_qubits, [(coeff, PauliString.from_map(n_qubits, {i: p, j: q}))]
    )


def pauli_rank(op, tol=1e-10):
    """Rank of the 3x3 coefficient matrix of the strictly 2-local part.

    The operator must act on exactly 2 qubits.
    """
    if op.n_qubits != 2:
        raise ValueError("pauli_rank is defined for 2-qubit operators only")
    m = np.zeros((3, 3))
    for c, s in op.terms:
        if len(s.factors) == 2:
            (q0, p0), (q1, p1) = s.factors
            m[_PAULI_LETTERS.index(p0), _PAULI_LETTERS.index(p1)] = c
    sv = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(sv > tol))


def dense_single(letter):
    """2x2 matrix for a single-qubit Pauli letter (testing helper)."""
    return _SINGLE[letter].copy()
