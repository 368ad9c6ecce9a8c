"""Circuit fragments for every protocol stage.

All emitters work in global centered coordinates on a ProtocolBuilder. The
detector cascade tries, in order: comparison with the previous record at the
same check position, antipodal-split completion (half + partner half + the
previous merged record), an absolute single-record detector, and an
antipodal-pair product; checks whose outcome stays variable-dependent get no
detector this round and seed comparisons later.
"""

from __future__ import annotations

import numpy as np

from .. import layout
from ..circuit import Instruction
from ..layout import Coord, Tile, antipode
from ..pauli import PauliString
from ..tableau import form_is_const
from .builder import ProtocolBuilder


def stab_pauli(b: ProtocolBuilder, tile: Tile) -> PauliString:
    return PauliString.from_label(
        "", b.circuit.n_qubits, sites={b.q(q): tile.basis for q in tile.data})


def se_layers(tiles: list[Tile], sched: dict[Coord, list[tuple[int, Coord]]]
              ) -> list[list[tuple[Coord, Coord, str]]]:
    n_layers = max(layer for entries in sched.values() for layer, _ in entries)
    layers: list[list[tuple[Coord, Coord, str]]] = [[] for _ in range(n_layers)]
    basis = {t.center: t.basis for t in tiles}
    for center, entries in sched.items():
        for layer, data in entries:
            layers[layer - 1].append((center, data, basis[center]))
    return layers


def se_cnot_instructions(b: ProtocolBuilder, layer: list[tuple[Coord, Coord, str]]
                         ) -> list[Instruction]:
    out = []
    for center, data, basis in sorted(layer):
        if basis == "X":
            out.append(Instruction("CNOT", (b.q(center), b.q(data))))
        else:
            out.append(Instruction("CNOT", (b.q(data), b.q(center))))
    return out


def reset_checks(b: ProtocolBuilder, tiles: list[Tile]) -> list[Instruction]:
    xs = [t.center for t in tiles if t.basis == "X"]
    zs = [t.center for t in tiles if t.basis == "Z"]
    return [b.gate("R_X", sorted(xs)), b.gate("R_Z", sorted(zs))]


def measure_checks(b: ProtocolBuilder, tiles: list[Tile], exempt: set[Coord] | None = None
                   ) -> list[Instruction]:
    out: list[Instruction] = []
    for t in sorted(tiles, key=lambda t: t.center):
        kind = "M_X" if t.basis == "X" else "M_Z"
        out += b.measure(kind, [t.center], exempt)
    return out


def probe_random_checks(b: ProtocolBuilder, tiles: list[Tile]) -> set[Coord]:
    """Which check outcomes would be random if measured right now."""
    out: set[Coord] = set()
    for t in sorted(tiles, key=lambda t: t.center):
        tab = b.tableau.copy()
        p = stab_pauli(b, t)
        _, was_random = tab.measure_pauli(p, forced_form=0)
        if was_random:
            out.add(t.center)
    return out


def declare_check_detectors(
    b: ProtocolBuilder,
    tiles: list[Tile],
    prev: dict[Coord, int],
    split_parent: dict[Coord, Coord] | None = None,
    time_coord: float = 0.0,
) -> None:
    """Run the detector cascade over freshly measured checks."""
    split_parent = split_parent or {}
    recs = b.records_from_last_step()
    done_pairs: set[frozenset[Coord]] = set()
    for t in sorted(tiles, key=lambda t: t.center):
        pos = t.center
        rec = recs[pos]
        coords = (pos[0], pos[1], time_coord)
        if pos in prev and b.try_detector([rec, prev[pos]]) is not None:
            b.emit_detector([rec, prev[pos]], coords, t.basis, "check")
            continue
        if pos in split_parent:
            parent = split_parent[pos]
            partner = antipode(pos)
            if partner in recs and parent in prev:
                cand = [rec, recs[partner], prev[parent]]
                if frozenset((pos, partner)) not in done_pairs and \
                        b.try_detector(cand) is not None:
                    b.emit_detector(cand, coords, t.basis, "split",
                                    halves=(pos, partner))
                    done_pairs.add(frozenset((pos, partner)))
                    continue
        if b.try_detector([rec]) is not None:
            b.emit_detector([rec], coords, t.basis, "check")
            continue
        partner = antipode(pos)
        if partner in recs and frozenset((pos, partner)) not in done_pairs:
            if b.try_detector([rec, recs[partner]]) is not None:
                b.emit_detector([rec, recs[partner]], coords, t.basis, "check")
                done_pairs.add(frozenset((pos, partner)))
                continue
    b.note_records(recs)


# -- plain SE round ------------------------------------------------------------


def emit_se_round(b: ProtocolBuilder, tiles: list[Tile],
                  sched: dict[Coord, list[tuple[int, Coord]]],
                  label: str, time_coord: float,
                  split_parent: dict[Coord, Coord] | None = None,
                  own_round: bool = True) -> None:
    if own_round:
        b.begin_round(label, 1.0)
    prev = dict(b.last_record)
    b.ts(reset_checks(b, tiles))
    for layer in se_layers(tiles, sched):
        b.ts(se_cnot_instructions(b, layer))
    b.ts(measure_checks(b, tiles))
    declare_check_detectors(b, tiles, prev, split_parent, time_coord)
    if own_round:
        b.end_round()


# -- injection ------------------------------------------------------------------


def emit_injection(b: ProtocolBuilder, tiles3: list[Tile], sched3, time_coord: float,
                   z_targets: dict[Coord, int]) -> None:
    """T-state (Clifford variant: S|+>) injection into RP2-3."""
    b.begin_round("inject", 1.0)
    prev = dict(b.last_record)
    pairs = layout.injection_bell_pairs()
    center = (0.0, 0.0)
    b.ts([b.gate("R_X", [c for c, _ in pairs] + [center]),
          b.gate("R_Z", [t for _, t in pairs])])
    b.ts(b.cnots(pairs) + [b.gate("S", [center])])
    b.ts(reset_checks(b, tiles3))
    for layer in se_layers(tiles3, sched3):
        b.ts(se_cnot_instructions(b, layer))
    _measure_fix_declare(b, tiles3, z_targets, prev, None, time_coord)
    b.end_round()


def _measure_fix_declare(b: ProtocolBuilder, tiles: list[Tile],
                         z_targets: dict[Coord, int], prev: dict[Coord, int],
                         split_parent: dict[Coord, Coord] | None,
                         time_coord: float,
                         extra_meas: list[Instruction] | None = None,
                         exempt: set[Coord] | None = None) -> None:
    """Measure all checks, apply feed-forward Z-sign fixes, declare detectors."""
    data_qubits = sorted({q for t in tiles for q in t.data})
    z_tiles = [t for t in tiles if t.basis == "Z"]
    b.ts(measure_checks(b, tiles, exempt) + (extra_meas or []))
    recs = b.records_from_last_step()
    b.note_records(recs)
    z_checks = [(t.center, stab_pauli(b, t), z_targets[t.center]) for t in z_tiles]
    logical_z = PauliString.from_label(
        "", b.circuit.n_qubits,
        sites={b.q(c): "Z" for c in data_qubits if c[0] == 0.0})
    fixed, controlled = b.solve_sign_corrections(z_checks, data_qubits, [logical_z])
    corr = b.emit_corrections(fixed, controlled)
    if corr:
        b.ts(corr)
    for pos, stab, want in z_checks:
        got = b.stabilizer_sign(stab)
        assert got is not None and (got < 0) == bool(want), \
            f"sign fixing failed at {pos}: got {got}, want {'-' if want else '+'}"
    declare_check_detectors(b, tiles, prev, split_parent, time_coord)


# -- morphing -------------------------------------------------------------------


def face_slots(face: layout.Face) -> list[Coord]:
    """Slot order (q1, q2, q3, q4, ..., anc_top, anc_bot)."""
    out: list[Coord] = []
    for top, bot in face.pairs:
        out += [top, bot]
    return out + [face.anc_top, face.anc_bot]


def morph_encode_layers(face: layout.Face) -> list[list[tuple[Coord, Coord]]]:
    at, ab = face.anc_top, face.anc_bot
    if len(face.pairs) == 1:
        (t0, b0), = face.pairs
        return [[(at, ab)], [(at, t0), (b0, ab)], [(t0, b0)]]
    (t0, b0), (t1, b1) = face.pairs
    return [[(at, ab)], [(t0, at), (t1, ab)], [(at, b0), (ab, b1)],
            [(b0, t0), (b1, t1)]]


def emit_morph_encode(b: ProtocolBuilder, faces: list[layout.Face], label: str) -> None:
    b.begin_round(label, 0.5)
    inner_642 = len(faces[0].pairs) == 2
    bot_kind = "R_Z_MINUS" if inner_642 else "R_Z"
    b.ts([b.gate("R_X", [f.anc_top for f in faces]),
          b.gate(bot_kind, [f.anc_bot for f in faces])])
    n_layers = len(morph_encode_layers(faces[0]))
    for li in range(n_layers):
        step = []
        for f in faces:
            step += b.cnots(morph_encode_layers(f)[li])
        b.ts(step)
    b.end_round()


def morph_decode_layers(face: layout.Face) -> list[list[tuple[Coord, Coord]]]:
    return [list(reversed(layer)) for layer in reversed(morph_encode_layers(face))]


def emit_morph_decode_standalone(b: ProtocolBuilder, faces: list[layout.Face],
                                 time_coord: float) -> None:
    b.begin_round("morph-back", 0.5)
    layers = [morph_decode_layers(f) for f in faces]
    for li in range(len(layers[0])):
        step = []
        for fl in layers:
            step += b.cnots(fl[li])
        b.ts(step)
    _measure_morph_flags(b, faces, time_coord)
    b.end_round()


def _measure_morph_flags(b: ProtocolBuilder, faces: list[layout.Face],
                         time_coord: float) -> None:
    b.ts(b.measure("M_X", [f.anc_top for f in faces]) +
         b.measure("M_Z", [f.anc_bot for f in faces]))
    recs = b.records_from_last_step()
    b.note_records(recs)
    for f in faces:
        b.emit_detector([recs[f.anc_top]],
                        (f.anc_top[0], f.anc_top[1], time_coord), "X",
                        kind="flag", halves=(f.anc_top, f.anc_bot))
        b.emit_detector([recs[f.anc_bot]],
                        (f.anc_bot[0], f.anc_bot[1], time_coord), "Z",
                        kind="flag", halves=(f.anc_top, f.anc_bot))


# -- logical double-checking ------------------------------------------------------


def dc_shadow_map(d: int) -> dict[Coord, Coord]:
    """shadow position -> shadowed data qubit."""
    out: dict[Coord, Coord] = {}
    if d == 3:
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                out[(i - 0.5, j - 0.5)] = (float(i), float(j))
        return out
    for i in (-2, -1, 0, 1, 2):
        if i == -1:
            out[(-1.5, 0.5)] = (-1.0, 1.0)
            out[(-0.5, 0.5)] = (0.0, 1.0)
        elif i == 0:
            out[(-1.5, 1.5)] = (-1.0, 2.0)
            out[(-0.5, 1.5)] = (0.0, 2.0)
        else:
            out[(i - 0.5, 0.5)] = (float(i), 1.0)
            out[(i - 0.5, 1.5)] = (float(i), 2.0)
    for i in (-2, -1, 0, 1, 2):
        out[(i - 0.5, -0.5)] = (float(i), 0.0)
    return out


def dc_ladder(d: int, faces: list[layout.Face]) -> list[list[tuple[Coord, Coord]]]:
    """Contraction layers pulling X^(x)n onto the center qubit."""
    if d == 3:
        tops = [f.pairs[0][0] for f in faces]
        bots = [f.pairs[0][1] for f in faces]
        ats = [f.anc_top for f in faces]
        abs_ = [f.anc_bot for f in faces]
        fold = [(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]
        return [
            list(zip(bots, abs_)),
            list(zip(tops, ats)) + list(zip(fold, bots)),
            list(zip(fold, tops)),
            [((0.0, 0.0), (-1.0, 0.0))],
            [((0.0, 0.0), (1.0, 0.0))],
        ]
    fold = [(float(i), 0.0) for i in (-2, -1, 0, 1, 2)]
    q1 = [f.pairs[0][0] for f in faces]
    q2 = [f.pairs[0][1] for f in faces]
    q3 = [f.pairs[1][0] for f in faces]
    q4 = [f.pairs[1][1] for f in faces]
    a1 = [f.anc_top for f in faces]
    a2 = [f.anc_bot for f in faces]
    return [
        list(zip(fold, q3)) + list(zip(q2, a1)) + list(zip(q4, a2)),
        list(zip(fold, q4)) + list(zip(q1, q2)),
        list(zip(fold, q1)),
        [((0.0, 0.0), (2.0, 0.0))],
        [((0.0, 0.0), (1.0, 0.0)), ((-1.0, 0.0), (-2.0, 0.0))],
        [((0.0, 0.0), (-1.0, 0.0))],
    ]


def emit_double_check(b: ProtocolBuilder, d: int, faces: list[layout.Face],
                      time_coord: float) -> None:
    b.begin_round(f"double-check-{d}", 1.0)
    srp_qubits = sorted({c for f in faces for c in face_slots(f)}
                        | {(float(i), 0.0) for i in range(-(d // 2), d // 2 + 1)})
    shadows = dc_shadow_map(d)
    center = (0.0, 0.0)
    first_layer = "S" if d == 3 else "S_DAG"
    last_layer = "S_DAG" if d == 3 else "S"
    b.ts([b.gate(first_layer, srp_qubits)])
    b.ts([b.gate("R_X", sorted(shadows))])
    couple = sorted(shadows.items())
    b.ts(b.cnots(couple))
    ladder = dc_ladder(d, faces)
    for layer in ladder:
        b.ts(b.cnots(layer))
    b.ts(b.measure("M_X", [center]))
    check_rec = b.records_from_last_step()[center]
    pool = list(range(check_rec))
    completed = b.complete_detector([check_rec], pool)
    if completed is None:
        raise ValueError("logical double-check record cannot be completed")
    b.emit_detector(completed, (0.0, 0.0, time_coord), "X", kind="check")
    b.ts([b.gate("R_X", [center])])
    for layer in reversed(ladder):
        b.ts(b.cnots([(c, t) for c, t in reversed(layer)]))
    b.ts(b.cnots(couple))
    b.ts(b.measure("M_X", sorted(shadows)))
    recs = b.records_from_last_step()
    b.note_records(recs)
    b.ts([b.gate(last_layer, srp_qubits)])
    for pos in sorted(shadows):
        b.emit_detector([recs[pos]], (pos[0], pos[1], time_coord), "X", kind="flag")
    b.end_round()


# -- growth and expansion -----------------------------------------------------------


def emit_growth_bundle(
    b: ProtocolBuilder,
    faces: list[layout.Face],
    bells: list[tuple[Coord, Coord]],
    zero_blocks: list[Coord],
    plus_blocks: list[Coord],
    new_tiles: list[Tile],
    new_sched: dict[Coord, list[tuple[int, Coord]]],
    split_parent: dict[Coord, Coord],
    label: str,
    time_coord: float,
    z_targets: dict[Coord, int] | None = None,
    exempt: set[Coord] | None = None,
) -> None:
    """Backwards morph run concurrently with patch growth or expansion."""
    b.begin_round(label, 1.5)
    prev = dict(b.last_record)
    dec = [morph_decode_layers(f) for f in faces]
    n_dec = len(dec[0])

    def dec_layer(i: int) -> list[Instruction]:
        out: list[Instruction] = []
        for fl in dec:
            out += b.cnots(fl[i])
        return out

    init_after = 1 if n_dec == 3 else 2
    se = se_layers(new_tiles, new_sched)
    li = 0
    while li < init_after:
        b.ts(dec_layer(li))
        li += 1
    b.ts([b.gate("R_X", sorted(plus_blocks + [c for c, _ in bells]))] +
         ([b.gate("R_Z", sorted(zero_blocks + [t for _, t in bells]))]
          if zero_blocks or bells else []) + reset_checks(b, new_tiles))
    b.ts(dec_layer(li) + b.cnots(bells))
    li += 1
    se_i = 0
    while li < n_dec:
        b.ts(dec_layer(li) + se_cnot_instructions(b, se[se_i]))
        li += 1
        se_i += 1
    _measure_morph_flags(b, faces, time_coord)
    while se_i < len(se):
        b.ts(se_cnot_instructions(b, se[se_i]))
        se_i += 1
    if z_targets is None:
        b.ts(measure_checks(b, new_tiles))
        b.note_records(b.records_from_last_step())
        declare_check_detectors(b, new_tiles, prev, split_parent, time_coord)
    else:
        _measure_fix_declare(b, new_tiles, z_targets, prev, split_parent,
                             time_coord, exempt=exempt)
    b.end_round()


# -- perfect benchmarking tail ---------------------------------------------------------


def emit_perfect_tail(b: ProtocolBuilder, tiles: list[Tile],
                      logical_y: PauliString, time_coord: float) -> None:
    b.begin_round("perfect-readout", 1.0, noise_exempt=True)
    prev = dict(b.last_record)
    tile_rec: dict[Coord, int] = {}
    for t in sorted(tiles, key=lambda t: t.center):
        body = tuple(sorted((b.q(q), t.basis) for q in t.data))
        b.ts([Instruction("MPP", pauli=body)])
        tile_rec[t.center] = b.circuit.n_records - 1
    b.note_records(tile_rec)
    for t in sorted(tiles, key=lambda t: t.center):
        rec = tile_rec[t.center]
        cand = [rec, prev[t.center]] if t.center in prev else [rec]
        if b.try_detector(cand) is None:
            cand = b.complete_detector(cand, list(range(min(cand))))
            if cand is None:
                raise ValueError(f"perfect-round check at {t.center} not completable")
        b.emit_detector(cand, (t.center[0], t.center[1], time_coord), t.basis, "check")
    body = tuple(sorted((int(q), logical_y.letter(int(q)))
                        for q in logical_y.support()))
    b.ts([Instruction("MPP", pauli=body)])
    obs_rec = b.circuit.n_records - 1
    b.observable([obs_rec])
    b.end_round()
