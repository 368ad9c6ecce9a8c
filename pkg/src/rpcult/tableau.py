"""Aaronson-Gottesman stabilizer tableau with symbolic measurement outcomes.

Generator signs are affine GF(2) forms over the collapse randomness: each
random measurement mints a fresh variable, and every later outcome is stored
as (constant XOR subset-of-variables). That single mechanism serves three
jobs at once:

* reference simulation (assign variables from a seeded RNG),
* detector validation (a record set is a detector iff the XOR of its forms
  is variable-free),
* detector completion (solve for earlier records that cancel the variables
  of a new one).

Forms are plain ints: bit 0 is the constant, bit v+1 is variable v.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString

CONST_ONE = 1


def form_const(form: int) -> int:
    return form & 1


def form_vars(form: int) -> int:
    return form >> 1


def form_is_const(form: int) -> bool:
    return form >> 1 == 0


class NonCliffordError(ValueError):
    pass


class StabilizerTableau:
    """2n-generator tableau (destabilizers then stabilizers) with affine signs."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=bool)
        self.z = np.zeros((2 * n, n), dtype=bool)
        self.x[np.arange(n), np.arange(n)] = True          # destabilizers X_i
        self.z[n + np.arange(n), np.arange(n)] = True      # stabilizers Z_i
        self.r = [0] * (2 * n)
        self.n_vars = 0

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = list(self.r)
        t.n_vars = self.n_vars
        return t

    # -- gates ------------------------------------------------------------

    def h(self, q: int) -> None:
        flip = self.x[:, q] & self.z[:, q]
        self._rflip(flip)
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self._rflip(self.x[:, q] & self.z[:, q])
        self.z[:, q] ^= self.x[:, q]

    def s_dag(self, q: int) -> None:
        self._rflip(self.x[:, q])
        self.s(q)

    def x_gate(self, q: int) -> None:
        self._rflip(self.z[:, q])

    def z_gate(self, q: int) -> None:
        self._rflip(self.x[:, q])

    def y_gate(self, q: int) -> None:
        self._rflip(self.x[:, q] ^ self.z[:, q])

    def cnot(self, c: int, t: int) -> None:
        self._rflip(self.x[:, c] & self.z[:, t] & (~(self.x[:, t] ^ self.z[:, c])))
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def swap(self, a: int, b: int) -> None:
        self.x[:, [a, b]] = self.x[:, [b, a]]
        self.z[:, [a, b]] = self.z[:, [b, a]]

    def pauli(self, p: PauliString, control_form: int = CONST_ONE) -> None:
        """Apply a Pauli (optionally conditioned on an affine record form)."""
        if control_form == 0:
            return
        anti = np.zeros(2 * self.n, dtype=bool)
        xs = np.flatnonzero(p.x)
        zs = np.flatnonzero(p.z)
        for q in xs:
            anti ^= self.z[:, q]
        for q in zs:
            anti ^= self.x[:, q]
        for i in np.flatnonzero(anti):
            self.r[i] ^= control_form

    def _rflip(self, mask: np.ndarray) -> None:
        for i in np.flatnonzero(mask):
            self.r[i] ^= CONST_ONE

    # -- measurement ------------------------------------------------------

    def _rowsum(self, h: int, i: int) -> None:
        g = _g_sum(self.x[i], self.z[i], self.x[h], self.z[h])
        if g % 2:
            raise AssertionError("tableau invariant broken")
        self.r[h] ^= self.r[i] ^ ((g % 4) // 2)
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def measure_z(self, q: int, forced_form: int | None = None) -> tuple[int, bool]:
        """Measure Z_q. Returns (affine outcome form, was_random)."""
        n = self.n
        ps = [p for p in range(n, 2 * n) if self.x[p, q]]
        if ps:
            p = ps[0]
            for i in range(2 * n):
                if i != p and self.x[i, q]:
                    self._rowsum(i, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = False
            self.z[p] = False
            self.z[p, q] = True
            if forced_form is None:
                form = 1 << (self.n_vars + 1)
                self.n_vars += 1
            else:
                form = forced_form
            self.r[p] = form
            return form, True
        # Deterministic: combine stabilizers indicated by destabilizer hits.
        sx = np.zeros(self.n, dtype=bool)
        sz = np.zeros(self.n, dtype=bool)
        form = 0
        phase = 0
        for i in range(n):
            if self.x[i, q]:
                g = _g_sum(self.x[i + n], self.z[i + n], sx, sz)
                phase += g
                form ^= self.r[i + n]
                sx ^= self.x[i + n]
                sz ^= self.z[i + n]
        if phase % 4 == 2:
            form ^= CONST_ONE
        elif phase % 4 != 0:
            raise AssertionError("deterministic outcome has imaginary phase")
        return form, False

    def measure_x(self, q: int, forced_form: int | None = None) -> tuple[int, bool]:
        self.h(q)
        out = self.measure_z(q, forced_form)
        self.h(q)
        return out

    def measure_pauli(self, p: PauliString, forced_form: int | None = None) -> tuple[int, bool]:
        """Measure a Hermitian Pauli product via basis-change conjugation."""
        support = p.support()
        if len(support) == 0:
            return (CONST_ONE if p.sign() < 0 else 0), False
        q0 = int(support[0])
        undo: list[tuple[str, int, int]] = []
        for q in support:
            q = int(q)
            letter = p.letter(q)
            if letter == "X":
                self.h(q)
                undo.append(("h", q, 0))
            elif letter == "Y":
                self.s_dag(q)
                self.h(q)
                undo.append(("h", q, 0))
                undo.append(("s", q, 0))
        for q in support[1:]:
            self.cnot(int(q), q0)
            undo.append(("cnot", int(q), q0))
        form, was_random = self.measure_z(q0, forced_form)
        for kind, a, b in reversed(undo):
            if kind == "h":
                self.h(a)
            elif kind == "s":
                self.s(a)
            else:
                self.cnot(a, b)
        if p.sign() < 0:
            form ^= CONST_ONE
        return form, was_random

    def reset_z(self, q: int, value: int = 0) -> None:
        form, _ = self.measure_z(q, forced_form=0)
        self.pauli(PauliString.from_label("X", self.n, sites={q: "X"}),
                   control_form=form ^ (CONST_ONE if value else 0))

    def reset_x(self, q: int, value: int = 0) -> None:
        self.h(q)
        self.reset_z(q, value)
        self.h(q)

    # -- inspection --------------------------------------------------------

    def stabilizer_rows(self) -> list[PauliString]:
        out = []
        for i in range(self.n, 2 * self.n):
            out.append(PauliString(self.x[i].astype(np.uint8), self.z[i].astype(np.uint8),
                                   2 * form_const(self.r[i])))
        return out

    def expectation(self, p: PauliString) -> int | None:
        """+1/-1 if p is (plus or minus) a stabilizer with a constant sign, else None."""
        t = self.copy()
        form, was_random = t.measure_pauli(p)
        if was_random or not form_is_const(form):
            return None
        return -1 if form_const(form) else 1


def _g_sum(x1: np.ndarray, z1: np.ndarray, x2: np.ndarray, z2: np.ndarray) -> int:
    x1i = x1.astype(np.int8)
    z1i = z1.astype(np.int8)
    x2i = x2.astype(np.int8)
    z2i = z2.astype(np.int8)
    g = np.where(x1 & z1, z2i - x2i,
                 np.where(x1 & ~z1, z2i * (2 * x2i - 1),
                          np.where(~x1 & z1, x2i * (1 - 2 * z2i), 0)))
    return int(g.sum())
