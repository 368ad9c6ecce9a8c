"""CSS code constructions and verification.

Covers the full code zoo: RP2-d, rotated surface codes, the [[4,2,2]] and
[[6,4,2]] inner codes, the fold-dual-to-self-dual concatenation, and the
SRP-3/SRP-5 codes built from it. Distances are computed exactly by coset
enumeration; nothing here is sampled or heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2, layout
from .pauli import Folding, PauliString


class CodeError(ValueError):
    pass


@dataclass
class CssCode:
    n: int
    x_stabilizers: list[PauliString]
    z_stabilizers: list[PauliString]
    logical_x: list[PauliString]
    logical_z: list[PauliString]
    coords: dict[int, tuple[float, float]] = field(default_factory=dict)
    name: str = ""

    @property
    def k(self) -> int:
        return len(self.logical_x)

    def x_matrix(self) -> np.ndarray:
        if not self.x_stabilizers:
            return np.zeros((0, self.n), dtype=np.uint8)
        return np.array([s.x for s in self.x_stabilizers], dtype=np.uint8)

    def z_matrix(self) -> np.ndarray:
        if not self.z_stabilizers:
            return np.zeros((0, self.n), dtype=np.uint8)
        return np.array([s.z for s in self.z_stabilizers], dtype=np.uint8)

    def verify(self) -> None:
        """Commutation, logical pairing and rank bookkeeping for [[n,k,d]]."""
        for sx in self.x_stabilizers:
            for sz in self.z_stabilizers:
                if not sx.commutes(sz):
                    raise CodeError(f"stabilizers anticommute: {sx} vs {sz}")
        for i, lx in enumerate(self.logical_x):
            for s in self.x_stabilizers + self.z_stabilizers:
                if not lx.commutes(s):
                    raise CodeError(f"logical X{i} anticommutes with a stabilizer")
        for i, lz in enumerate(self.logical_z):
            for s in self.x_stabilizers + self.z_stabilizers:
                if not lz.commutes(s):
                    raise CodeError(f"logical Z{i} anticommutes with a stabilizer")
        for i, lx in enumerate(self.logical_x):
            for j, lz in enumerate(self.logical_z):
                want = i == j
                if lx.commutes(lz) == want:
                    raise CodeError(f"logical pairing broken at ({i},{j})")
        rank = gf2.rank(self.x_matrix()) + gf2.rank(self.z_matrix())
        if self.n - rank != self.k:
            raise CodeError(f"k mismatch: n-rank={self.n - rank}, logicals={self.k}")

    def parity_check_text(self) -> str:
        lines = []
        for row in self.x_matrix():
            lines.append("X " + "".join(str(int(v)) for v in row))
        for row in self.z_matrix():
            lines.append("Z " + "".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"


def _pauli(n: int, sites: dict[int, str]) -> PauliString:
    return PauliString.from_label("", n, sites=sites)


def _code_from_tiles(d: int, tiles: list[layout.Tile], name: str) -> CssCode:
    coords = layout.data_coords(d)
    index = {c: i for i, c in enumerate(coords)}
    xs, zs = [], []
    for t in tiles:
        p = _pauli(len(coords), {index[q]: t.basis for q in t.data})
        (xs if t.basis == "X" else zs).append(p)
    lx = _pauli(len(coords), {index[q]: "X" for q in layout.logical_x_row(d)})
    lz = _pauli(len(coords), {index[q]: "Z" for q in layout.logical_z_column(d)})
    code = CssCode(len(coords), xs, zs, [lx], [lz],
                   {i: c for c, i in index.items()}, name)
    code.verify()
    return code


def build_rp2(d: int) -> CssCode:
    if d < 3 or d % 2 == 0:
        raise CodeError("RP2 patch parameter must be odd and >= 3")
    return _code_from_tiles(d, layout.rp2_tiles(d), f"rp2-{d}")


def build_rotated_surface(d: int) -> CssCode:
    if d < 3 or d % 2 == 0:
        raise CodeError("rotated surface code distance must be odd and >= 3")
    return _code_from_tiles(d, layout.rotated_tiles(d), f"surface-{d}")


def rp2_folding(d: int) -> Folding:
    coords = layout.data_coords(d)
    index = {c: i for i, c in enumerate(coords)}
    perm = np.zeros(len(coords), dtype=np.int64)
    for c, i in index.items():
        perm[i] = index[layout.reflect_fold(c)]
    return Folding(perm)


def build_422() -> CssCode:
    """[[4,2,2]]: qubits (1,2) are the morphed data pair, (3,4) the ancillas.

    The logical basis is the one induced by the encoding circuit and satisfies
    the transversal-H pairing exactly.
    """
    n = 4
    xs = [_pauli(n, {0: "X", 1: "X", 2: "X", 3: "X"})]
    zs = [_pauli(n, {0: "Z", 1: "Z", 2: "Z", 3: "Z"})]
    lx = [_pauli(n, {0: "X", 1: "X"}), _pauli(n, {1: "X", 3: "X"})]
    lz = [_pauli(n, {2: "Z", 0: "Z"}), _pauli(n, {0: "Z", 1: "Z"})]
    code = CssCode(n, xs, zs, lx, lz, name="[[4,2,2]]")
    code.verify()
    return code


def build_642() -> CssCode:
    """[[6,4,2]]: blocks {1,2,5} and {3,4,6}; logical pairs (1,2) and (3,4)."""
    n = 6
    xs = [_pauli(n, {q: "X" for q in range(6)})]
    zs = [_pauli(n, {q: "Z" for q in range(6)})]
    lx = [_pauli(n, {1: "X", 4: "X"}), _pauli(n, {0: "X", 1: "X"}),
          _pauli(n, {3: "X", 5: "X"}), _pauli(n, {2: "X", 3: "X"})]
    lz = [_pauli(n, {0: "Z", 1: "Z"}), _pauli(n, {1: "Z", 4: "Z"}),
          _pauli(n, {2: "Z", 3: "Z"}), _pauli(n, {3: "Z", 5: "Z"})]
    code = CssCode(n, xs, zs, lx, lz, name="[[6,4,2]]")
    code.verify()
    return code


# -- duality checks ------------------------------------------------------------


def check_self_dual(code: CssCode) -> bool:
    hx = code.x_matrix()
    hz = code.z_matrix()
    for s in code.x_stabilizers:
        if not gf2.in_span(hz, s.x):
            return False
    for s in code.z_stabilizers:
        if not gf2.in_span(hx, s.z):
            return False
    return True


def check_even_distance_self_dual(code: CssCode) -> bool:
    if not check_self_dual(code):
        raise CodeError("even-distance check requires a self-dual code")
    if code.k == 0:
        return False
    for l in code.logical_x + code.logical_z:
        if l.weight() % 2:
            return False
    return True


def verify_folding(code: CssCode, fold: Folding) -> bool:
    hx = code.x_matrix()
    hz = code.z_matrix()
    for s in code.x_stabilizers:
        img = s.permuted(fold.permutation).hadamard_conjugate()
        if not gf2.in_span(hz, img.z):
            return False
    for s in code.z_stabilizers:
        img = s.permuted(fold.permutation).hadamard_conjugate()
        if not gf2.in_span(hx, img.x):
            return False
    return True


def verify_lemma1_pairing(code: CssCode, report: bool = False):
    """Check h(Lx[2i]) = Lz[2i+1] and h(Lz[2i]) = Lx[2i+1] modulo stabilizers.

    Logical indices are 0-based here, so pair i holds logicals (2i, 2i+1).
    """
    if not check_even_distance_self_dual(code):
        return (False, "not an even-distance self-dual code") if report else False
    if code.n % 2 or code.k % 2:
        return (False, "odd n or k") if report else False
    hx = code.x_matrix()
    hz = code.z_matrix()
    for i in range(code.k // 2):
        a, b = 2 * i, 2 * i + 1
        if not gf2.in_span(hz, code.logical_x[a].x ^ code.logical_z[b].z):
            return (False, f"h(Lx{a}) != Lz{b}") if report else False
        if not gf2.in_span(hx, code.logical_z[a].z ^ code.logical_x[b].x):
            return (False, f"h(Lz{a}) != Lx{b}") if report else False
    return (True, "") if report else True


# -- concatenation ---------------------------------------------------------------


@dataclass
class ConcatenationAssignment:
    outer: CssCode
    fold: Folding
    inner_codes: list[CssCode]
    pair_map: dict[tuple[int, int], tuple[int, int]]
    """Maps each size-2 fold orbit (i, sigma(i)) with i < sigma(i) to
    (inner code index, logical pair index within that code)."""

    def validate(self) -> None:
        orbits = set(self.fold.orbits())
        if set(self.pair_map) != orbits:
            raise CodeError("pair_map must cover every non-fixed orbit exactly once")
        budget = sum(c.k for c in self.inner_codes)
        if self.outer.n - len(self.fold.fold_line) != budget:
            raise CodeError("counting condition n - |inv(sigma)| = sum k_a violated")
        used: set[tuple[int, int]] = set()
        for (a, p) in self.pair_map.values():
            if not 0 <= a < len(self.inner_codes):
                raise CodeError("pair_map references a missing inner code")
            if not 0 <= p < self.inner_codes[a].k // 2:
                raise CodeError("pair_map references a missing logical pair")
            if (a, p) in used:
                raise CodeError("pair_map reuses a logical pair")
            used.add((a, p))


def concatenate(assignment: ConcatenationAssignment) -> CssCode:
    assignment.validate()
    outer, fold = assignment.outer, assignment.fold
    fixed = sorted(fold.fold_line)
    slot: dict[int, int] = {q: i for i, q in enumerate(fixed)}
    offsets = []
    n_total = len(fixed)
    for inner in assignment.inner_codes:
        offsets.append(n_total)
        n_total += inner.n

    def enc(p: PauliString) -> PauliString:
        x = np.zeros(n_total, dtype=np.uint8)
        z = np.zeros(n_total, dtype=np.uint8)
        for q in p.support():
            q = int(q)
            letter = p.letter(q)
            if letter == "Y":
                raise CodeError("encoding map is defined on X/Z strings")
            sq = int(fold.permutation[q])
            if sq == q:
                if letter == "X":
                    x[slot[q]] ^= 1
                else:
                    z[slot[q]] ^= 1
            else:
                key = (q, sq) if q < sq else (sq, q)
                a, pair = assignment.pair_map[key]
                member = 0 if q == key[0] else 1
                inner = assignment.inner_codes[a]
                rep = inner.logical_x[2 * pair + member] if letter == "X" \
                    else inner.logical_z[2 * pair + member]
                off = offsets[a]
                if letter == "X":
                    x[off:off + inner.n] ^= rep.x
                else:
                    z[off:off + inner.n] ^= rep.z
        return PauliString(x, z)

    def lift(a: int, p: PauliString) -> PauliString:
        x = np.zeros(n_total, dtype=np.uint8)
        z = np.zeros(n_total, dtype=np.uint8)
        off = offsets[a]
        x[off:off + p.n_qubits] = p.x
        z[off:off + p.n_qubits] = p.z
        return PauliString(x, z)

    xs = [lift(a, s) for a, inner in enumerate(assignment.inner_codes)
          for s in inner.x_stabilizers]
    xs += [enc(s) for s in outer.x_stabilizers]
    zs = [lift(a, s) for a, inner in enumerate(assignment.inner_codes)
          for s in inner.z_stabilizers]
    zs += [enc(s) for s in outer.z_stabilizers]
    lx = [enc(l) for l in outer.logical_x]
    lz = [enc(l) for l in outer.logical_z]
    code = CssCode(n_total, xs, zs, lx, lz, name=f"concat({outer.name})")
    code.verify()
    return code


def _srp(d: int) -> CssCode:
    outer = build_rp2(d)
    fold = rp2_folding(d)
    coords = layout.data_coords(d)
    index = {c: i for i, c in enumerate(coords)}
    anc_y = layout.morph_ancilla_row((d - 1) / 2)
    faces = layout.srp3_faces(anc_y) if d == 3 else layout.srp5_faces(anc_y)
    inner_proto = build_422() if d == 3 else build_642()
    inners = [inner_proto for _ in faces]
    pair_map: dict[tuple[int, int], tuple[int, int]] = {}
    for fi, face in enumerate(faces):
        for pi, (top, bot) in enumerate(face.pairs):
            a, b = index[top], index[bot]
            pair_map[(a, b) if a < b else (b, a)] = (fi, pi)
    assignment = ConcatenationAssignment(outer, fold, inners, pair_map)
    code = concatenate(assignment)
    code.name = f"srp-{d}"
    # Coordinates: outer fold line first, then per-face inner qubits.
    fixed = sorted(fold.fold_line)
    cmap: dict[int, tuple[float, float]] = {}
    for i, q in enumerate(fixed):
        cmap[i] = coords[q]
    off = len(fixed)
    for fi, face in enumerate(faces):
        for pi, (top, bot) in enumerate(face.pairs):
            cmap[off + 2 * pi] = top
            cmap[off + 2 * pi + 1] = bot
        cmap[off + inner_proto.n - 2] = face.anc_top
        cmap[off + inner_proto.n - 1] = face.anc_bot
        off += inner_proto.n
    code.coords = cmap
    return code


def build_srp3() -> CssCode:
    return _srp(3)


def build_srp5() -> CssCode:
    return _srp(5)


# -- exact distance -----------------------------------------------------------------


def _pack(rows: np.ndarray) -> list[int]:
    return [int.from_bytes(np.packbits(r, bitorder="little").tobytes(), "little")
            for r in rows]


def _min_weight_coset(stab_rows: np.ndarray, logical_rows: np.ndarray,
                      budget: int = 1 << 26) -> int:
    """Minimum weight over (nontrivial logical class) x (stabilizer group)."""
    stabs, _ = gf2.row_reduce(stab_rows)
    r = len(stabs)
    # Extend the stabilizer basis to the full centralizer span so that every
    # nonzero combination of the extension rows is a genuine logical class.
    current = np.asarray(stabs, dtype=np.uint8)
    if current.size == 0:
        current = np.zeros((0, stab_rows.shape[1] or logical_rows.shape[1]), dtype=np.uint8)
    extra: list[np.ndarray] = []
    for row in logical_rows:
        if not gf2.in_span(current, row):
            extra.append(np.asarray(row, dtype=np.uint8))
            current = np.vstack([current, row[None, :]])
    if (1 << (r + len(extra))) > budget:
        raise CodeError("distance search exceeds the configured budget")
    packed_stabs = _pack(np.asarray(stabs)) if r else []
    packed_logs = _pack(np.asarray(extra))
    best = None
    for lmask in range(1, 1 << len(extra)):
        base = 0
        for j in range(len(extra)):
            if lmask >> j & 1:
                base ^= packed_logs[j]
        # Gray-code walk over the stabilizer group.
        word = base
        best = min(best, word.bit_count()) if best is not None else word.bit_count()
        prev = 0
        for i in range(1, 1 << r):
            gray = i ^ (i >> 1)
            word ^= packed_stabs[(gray ^ prev).bit_length() - 1]
            prev = gray
            w = word.bit_count()
            if w < best:
                best = w
    return int(best)


def code_distance(code: CssCode, budget: int = 1 << 26) -> int:
    dx = _min_weight_coset(code.x_matrix(),
                           np.array([l.x for l in code.logical_x], dtype=np.uint8),
                           budget)
    dz = _min_weight_coset(code.z_matrix(),
                           np.array([l.z for l in code.logical_z], dtype=np.uint8),
                           budget)
    return min(dx, dz)
