"""Protocol assembly: cultivation prefixes, full MSC variants, memory circuits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import codes, layout
from ..circuit import Circuit
from ..layout import Coord, Tile
from ..pauli import PauliString
from .builder import BuildState, DetectorInfo, ProtocolBuilder
from . import fragments as frag


@dataclass
class ProtocolSpec:
    variant: str = "msc3"                      # msc3 | msc5
    rounds_after_expansion: int = 2
    benchmarking_tail: str = "perfect"         # perfect | none


@dataclass
class ProtocolCircuit:
    circuit: Circuit
    state: BuildState
    coords: list[Coord]
    final_tiles: list[Tile]
    logical_y: PauliString
    fold_axis: str = "y"
    name: str = ""

    @property
    def detectors(self) -> list[DetectorInfo]:
        return self.state.detectors


def _universe(grid_half: int, tiles: list[list[Tile]], anc_rows: list[Coord]) -> list[Coord]:
    seen: set[Coord] = set()
    out: list[Coord] = []

    def add(c: Coord):
        if c not in seen:
            seen.add(c)
            out.append(c)

    for c in layout.data_coords(2 * grid_half + 1):
        add(c)
    for ts in tiles:
        for t in ts:
            for h in t.halves:
                add(h)
    for c in anc_rows:
        add(c)
    return out


def _logical_y(n: int, index: dict[Coord, int], d: int) -> PauliString:
    x = np.zeros(n, dtype=np.uint8)
    z = np.zeros(n, dtype=np.uint8)
    for c in layout.logical_x_row(d):
        x[index[c]] ^= 1
    for c in layout.logical_z_column(d):
        z[index[c]] ^= 1
    return PauliString(x, z, 1)


def srp_sign_targets(d: int) -> dict[Coord, int]:
    """Wanted Z-check outcome bits before morphing: the morphed stabilizer must
    sit in the -1 eigenspace iff its encoded weight is singly even."""
    inner = codes.build_422() if d == 3 else codes.build_642()
    faces = layout.srp3_faces(99.0) if d == 3 else layout.srp5_faces(99.0)
    member_of: dict[Coord, tuple[int, int, int]] = {}
    for fi, f in enumerate(faces):
        for pi, (top, bot) in enumerate(f.pairs):
            member_of[top] = (fi, pi, 0)
            member_of[bot] = (fi, pi, 1)
    slotmaps = [frag.face_slots(f) for f in faces]
    targets: dict[Coord, int] = {}
    for t in layout.rp2_tiles(d):
        if t.basis != "Z":
            continue
        supp: set[tuple] = set()
        for q in t.data:
            if q[1] == 0.0:
                supp ^= {("fold", q)}
            else:
                fi, pi, mem = member_of[q]
                rep = inner.logical_z[2 * pi + mem]
                for iq in rep.support():
                    supp ^= {(fi, slotmaps[fi][int(iq)])}
        if len(supp) % 2:
            raise ValueError("encoded Z stabilizer has odd weight")
        targets[t.center] = 1 if len(supp) % 4 == 2 else 0
    return targets


def _split_parent(tiles: list[Tile]) -> dict[Coord, Coord]:
    out: dict[Coord, Coord] = {}
    for t in tiles:
        if t.merged:
            for h in t.halves:
                out[h] = t.center
    return out


def build_cultivation(variant: str = "msc3",
                      exempt3: set[Coord] | None = None,
                      exempt5: set[Coord] | None = None,
                      logical_y: PauliString | None = None) -> ProtocolCircuit:
    """Cultivation-only benchmark: grow S|+> on the small RP2 code, then a
    noiseless stabilizer + logical readout block. Every detector, including
    the tail's, is post-selected in this variant."""
    d_small = 3 if variant == "msc3" else 5
    tiles3 = layout.rp2_tiles(3)
    sched3 = layout.schedule_rp2(tiles3)
    anc_y = d_small // 2 + 2.0
    faces3 = layout.srp3_faces(anc_y)
    tile_sets = [tiles3]
    if variant == "msc5":
        tiles5 = layout.rp2_tiles(5)
        sched5 = layout.schedule_rp2(tiles5)
        faces5 = layout.srp5_faces(anc_y)
        tile_sets.append(tiles5)
    anc_rows = sorted({c for fs in ([faces3, faces5] if variant == "msc5" else [faces3])
                       for f in fs for c in (f.anc_top, f.anc_bot)})
    coords = _universe(d_small // 2, tile_sets, anc_rows)
    index = {c: i for i, c in enumerate(coords)}
    b = ProtocolBuilder(coords)
    b.cultivation_stage = True
    t = 0
    frag.emit_injection(b, tiles3, sched3, t, srp_sign_targets(3))
    t += 1
    frag.emit_se_round(b, tiles3, sched3, "se-rp3", t)
    t += 1
    frag.emit_morph_encode(b, faces3, "morph-to-srp3")
    t += 1
    frag.emit_double_check(b, 3, faces3, t)
    t += 1
    if variant == "msc5":
        frag.emit_growth_bundle(
            b, faces3, layout.grow_bell_pairs(), [], [], tiles5, sched5,
            _split_parent(tiles3), "morphback+grow", t,
            z_targets=srp_sign_targets(5), exempt=exempt5)
        t += 1
        frag.emit_se_round(b, tiles5, sched5, "se-rp5", t)
        t += 1
        frag.emit_morph_encode(b, faces5, "morph-to-srp5")
        t += 1
        frag.emit_double_check(b, 5, faces5, t)
        t += 1
        frag.emit_morph_decode_standalone(b, faces5, t)
        t += 1
        final_tiles = tiles5
    else:
        frag.emit_morph_decode_standalone(b, faces3, t)
        t += 1
        final_tiles = tiles3
    y_l = logical_y if logical_y is not None else _logical_y(len(coords), index, d_small)
    frag.emit_perfect_tail(b, final_tiles, y_l, t)
    return ProtocolCircuit(b.circuit, b.state, coords, final_tiles, y_l,
                           name=f"{variant}-cultivation")


def assemble(spec: ProtocolSpec,
             exempt3: set[Coord] | None = None,
             exempt5: set[Coord] | None = None,
             logical_y: PauliString | None = None) -> ProtocolCircuit:
    """Full protocol: cultivation, expansion to the rotated surface code,
    stabilization rounds, and the benchmarking tail."""
    variant = spec.variant
    d_out = 7 if variant == "msc3" else 11
    tiles3 = layout.rp2_tiles(3)
    sched3 = layout.schedule_rp2(tiles3)
    tiles_out = layout.rotated_tiles(d_out)
    sched_out = layout.schedule_rotated(tiles_out)
    anc_y = d_out // 2 + 1.0
    faces3 = layout.srp3_faces(anc_y)
    tile_sets: list[list[Tile]] = [tiles3, tiles_out]
    if variant == "msc5":
        tiles5 = layout.rp2_tiles(5)
        sched5 = layout.schedule_rp2(tiles5)
        faces5 = layout.srp5_faces(anc_y)
        tile_sets.insert(1, tiles5)
    anc_rows = sorted({c for fs in ([faces3, faces5] if variant == "msc5" else [faces3])
                       for f in fs for c in (f.anc_top, f.anc_bot)})
    coords = _universe(d_out // 2, tile_sets, anc_rows)
    index = {c: i for i, c in enumerate(coords)}
    b = ProtocolBuilder(coords)
    b.cultivation_stage = True
    t = 0
    frag.emit_injection(b, tiles3, sched3, t, srp_sign_targets(3))
    t += 1
    frag.emit_se_round(b, tiles3, sched3, "se-rp3", t)
    t += 1
    frag.emit_morph_encode(b, faces3, "morph-to-srp3")
    t += 1
    frag.emit_double_check(b, 3, faces3, t)
    t += 1
    if variant == "msc5":
        frag.emit_growth_bundle(
            b, faces3, layout.grow_bell_pairs(), [], [], tiles5, sched5,
            _split_parent(tiles3), "morphback+grow", t,
            z_targets=srp_sign_targets(5), exempt=exempt5)
        t += 1
        frag.emit_se_round(b, tiles5, sched5, "se-rp5", t)
        t += 1
        frag.emit_morph_encode(b, faces5, "morph-to-srp5")
        t += 1
        frag.emit_double_check(b, 5, faces5, t)
        t += 1
        b.cultivation_stage = False
        zeros, plus = layout.expansion_blocks(5, 11)
        frag.emit_growth_bundle(
            b, faces5, layout.ring_bell_pairs(3), zeros, plus, tiles_out,
            sched_out, _split_parent(tiles5), "morphback+expand", t)
        t += 1
        d_in = 5
    else:
        b.cultivation_stage = False
        zeros, plus = layout.expansion_blocks(3, 7)
        frag.emit_growth_bundle(
            b, faces3, layout.ring_bell_pairs(2), zeros, plus, tiles_out,
            sched_out, _split_parent(tiles3), "morphback+expand", t)
        t += 1
        d_in = 3
    del d_in
    for _ in range(spec.rounds_after_expansion):
        frag.emit_se_round(b, tiles_out, sched_out, f"se-surface-{d_out}", t)
        t += 1
    y_l = logical_y if logical_y is not None else _logical_y(len(coords), index, d_out)
    if spec.benchmarking_tail == "perfect":
        frag.emit_perfect_tail(b, tiles_out, y_l, t)
    return ProtocolCircuit(b.circuit, b.state, coords, tiles_out, y_l,
                           name=f"{variant}-end-to-end")


# -- memory circuits (for circuit-distance checks) ----------------------------------


def build_memory(kind: str, d: int, rounds: int, basis: str = "Z") -> ProtocolCircuit:
    tiles = layout.rp2_tiles(d) if kind == "rp2" else layout.rotated_tiles(d)
    sched = layout.schedule_rp2(tiles) if kind == "rp2" else layout.schedule_rotated(tiles)
    coords = _universe(d // 2, [tiles], [])
    index = {c: i for i, c in enumerate(coords)}
    b = ProtocolBuilder(coords)
    b.cultivation_stage = False
    data = layout.data_coords(d)
    b.begin_round("init", 1.0)
    b.ts([b.gate("R_Z" if basis == "Z" else "R_X", data)])
    prev = dict(b.last_record)
    b.ts(frag.reset_checks(b, tiles))
    for layer in frag.se_layers(tiles, sched):
        b.ts(frag.se_cnot_instructions(b, layer))
    b.ts(frag.measure_checks(b, tiles))
    frag.declare_check_detectors(b, tiles, prev, None, 0.0)
    b.end_round()
    for r in range(1, rounds):
        frag.emit_se_round(b, tiles, sched, "se", float(r))
    b.begin_round("readout", 1.0)
    b.ts([b.gate("M_Z" if basis == "Z" else "M_X", data)])
    recs = b.records_from_last_step()
    for t in sorted(tiles, key=lambda t: t.center):
        if t.basis != basis:
            continue
        cand = [recs[q] for q in t.data] + [b.record_of(t.center)]
        b.emit_detector(cand, (t.center[0], t.center[1], float(rounds)), t.basis, "check")
    logical = layout.logical_z_column(d) if basis == "Z" else layout.logical_x_row(d)
    b.observable([recs[c] for c in logical])
    b.end_round()
    n = len(coords)
    y = _logical_y(n, index, d)
    return ProtocolCircuit(b.circuit, b.state, coords, tiles, y,
                           name=f"{kind}-{d}-memory-{basis}")
