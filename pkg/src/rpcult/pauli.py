"""Pauli-string algebra over an indexed qubit set.

A Pauli string is stored as X/Z incidence vectors plus a phase in {1, i, -1,
-i}, encoded as an exponent of i. This is the shared currency for
stabilizers, logical operators and error frames throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PHASES = {0: "+", 1: "+i", 2: "-", 3: "-i"}


class PauliError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    """Phase times a tensor product of single-qubit Paulis.

    ``x`` and ``z`` are uint8 vectors of equal length n; qubit q carries
    X^x[q] Z^z[q] (so x=z=1 encodes XZ = -iY). ``phase`` is the exponent e in
    i^e multiplying the whole string.
    """

    x: np.ndarray
    z: np.ndarray
    phase: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.uint8) % 2)
        object.__setattr__(self, "z", np.asarray(self.z, dtype=np.uint8) % 2)
        object.__setattr__(self, "phase", int(self.phase) % 4)
        if self.x.shape != self.z.shape or self.x.ndim != 1:
            raise PauliError("x/z vectors must be 1-d and equal length")

    @property
    def n_qubits(self) -> int:
        return len(self.x)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_label(cls, label: str, n: int | None = None,
                   sites: dict[int, str] | None = None) -> "PauliString":
        """Build from a dense label like "+XIZY" or from a sparse site map."""
        if sites is not None:
            if n is None:
                raise PauliError("sparse construction needs n")
            x = np.zeros(n, dtype=np.uint8)
            z = np.zeros(n, dtype=np.uint8)
            phase = 0
            for q, p in sites.items():
                px, pz, ph = _LETTER[p]
                x[q], z[q] = px, pz
                phase += ph
            return cls(x, z, phase)
        phase = 0
        if label and label[0] in "+-":
            if label.startswith("-"):
                phase = 2
            label = label.lstrip("+-")
        x = np.zeros(len(label), dtype=np.uint8)
        z = np.zeros(len(label), dtype=np.uint8)
        for q, p in enumerate(label):
            px, pz, ph = _LETTER[p]
            x[q], z[q] = px, pz
            phase += ph
        return cls(x, z, phase)

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x | self.z)

    def letter(self, q: int) -> str:
        return "IXZY"[self.x[q] + 2 * self.z[q]]

    def label(self) -> str:
        # Each XZ site is -iY, so fold the i's back into the display sign.
        ph = (self.phase - int(np.count_nonzero(self.x & self.z))) % 4
        body = "".join(self.letter(q) for q in range(self.n_qubits))
        return PHASES[ph] + body

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise PauliError("length mismatch in Pauli product")
        # (X^a Z^b)(X^c Z^d) = (-1)^(b.c) X^(a+c) Z^(b+d) per site.
        phase = self.phase + other.phase + 2 * int(np.count_nonzero(self.z & other.x))
        return PauliString(self.x ^ other.x, self.z ^ other.z, phase)

    def commutes(self, other: "PauliString") -> bool:
        if self.n_qubits != other.n_qubits:
            raise PauliError("length mismatch in commutation check")
        form = int(np.count_nonzero(self.x & other.z)) + int(np.count_nonzero(self.z & other.x))
        return form % 2 == 0

    def hadamard_conjugate(self) -> "PauliString":
        """Conjugation by transversal H on the string's own support.

        X and Z swap everywhere; each Y site (XZ) picks up a sign, since
        H X Z H = Z X = -XZ.
        """
        phase = self.phase + 2 * int(np.count_nonzero(self.x & self.z))
        return PauliString(self.z.copy(), self.x.copy(), phase)

    def permuted(self, perm: np.ndarray) -> "PauliString":
        """Move the letter at qubit q to qubit perm[q]."""
        x = np.zeros_like(self.x)
        z = np.zeros_like(self.z)
        x[perm] = self.x
        z[perm] = self.z
        return PauliString(x, z, self.phase)

    def sign(self) -> int:
        """+1 or -1 for Hermitian strings; raises on i-phases."""
        ph = (self.phase - int(np.count_nonzero(self.x & self.z))) % 4
        if ph == 0:
            return 1
        if ph == 2:
            return -1
        raise PauliError("string has imaginary phase")

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"


_LETTER = {"I": (0, 0, 0), "X": (1, 0, 0), "Z": (0, 1, 0), "Y": (1, 1, 1)}
# Y = i XZ, so storing x=z=1 with an extra +1 phase exponent makes labels honest.


def multiply(a: PauliString, b: PauliString) -> PauliString:
    return a * b


def commutes(a: PauliString, b: PauliString) -> bool:
    return a.commutes(b)


def hadamard_conjugate(p: PauliString) -> PauliString:
    return p.hadamard_conjugate()


@dataclass(frozen=True)
class Folding:
    """An order-2 permutation of qubit indices with its fixed-point set."""

    permutation: np.ndarray
    fold_line: frozenset[int] = field(init=False)

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        object.__setattr__(self, "permutation", perm)
        if not np.array_equal(perm[perm], np.arange(len(perm))):
            raise PauliError("folding must be an order-2 permutation")
        object.__setattr__(
            self, "fold_line", frozenset(int(i) for i in np.flatnonzero(perm == np.arange(len(perm))))
        )

    def orbits(self) -> list[tuple[int, int]]:
        return [(i, int(self.permutation[i]))
                for i in range(len(self.permutation)) if self.permutation[i] > i]


def conjugate_by_folding(p: PauliString, f: Folding) -> PauliString:
    if len(f.permutation) != p.n_qubits:
        raise PauliError("folding defined on a different qubit set")
    return p.permuted(f.permutation)
