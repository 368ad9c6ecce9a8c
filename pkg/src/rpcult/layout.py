"""Lattice geometry for RP2 and rotated surface codes.

Data qubits sit on integer coordinates of a centered grid, check tiles on
half-integer coordinates. A tile is Z-type iff (tx - ty) is odd. The RP2
tiling is closed: every fringe tile (corners included) is antipodally
identified with its point reflection, giving (d-1)^2 bulk tiles plus 2d
merged fringe tiles, each measured by a single ancilla. The product of all X
(and all Z) checks is identity, so two checks are redundant; they are kept
and measured anyway.

The fold used everywhere is the reflection (x, y) -> (x, -y); its fold line
is the central row.
"""

from __future__ import annotations

from dataclasses import dataclass

Coord = tuple[float, float]


def is_z_tile(center: Coord) -> bool:
    return int(round(center[0] - center[1])) % 2 == 1


def tile_data(center: Coord) -> list[Coord]:
    tx, ty = center
    return [(tx + dx, ty + dy) for dx in (-0.5, 0.5) for dy in (-0.5, 0.5)]


def antipode(c: Coord) -> Coord:
    return (-c[0], -c[1])


def reflect_fold(c: Coord) -> Coord:
    return (c[0], -c[1])


@dataclass(frozen=True)
class Tile:
    center: Coord                 # representative position (hosts the ancilla)
    basis: str                    # "X" or "Z"
    data: tuple[Coord, ...]       # data qubits, merged tiles include both halves
    halves: tuple[Coord, ...]     # one center for bulk, two for merged tiles

    @property
    def merged(self) -> bool:
        return len(self.halves) == 2


def data_coords(d: int) -> list[Coord]:
    c = (d - 1) // 2
    return [(float(x), float(y)) for y in range(-c, c + 1) for x in range(-c, c + 1)]


def rp2_tiles(d: int) -> list[Tile]:
    if d < 3 or d % 2 == 0:
        raise ValueError("patch parameter must be an odd integer >= 3")
    c = (d - 1) // 2
    grid = set(data_coords(d))
    tiles: list[Tile] = []
    for ix in range(-c - 1, c + 1):
        for iy in range(-c - 1, c + 1):
            center = (ix + 0.5, iy + 0.5)
            inside = [q for q in tile_data(center) if q in grid]
            if len(inside) == 4:
                tiles.append(Tile(center, "Z" if is_z_tile(center) else "X",
                                  tuple(inside), (center,)))
    # Fringe representatives: full top row of tile positions, plus the left
    # column without its corners; partners are the point reflections.
    reps: list[Coord] = [(x + 0.5, -c - 0.5) for x in range(-c - 1, c + 1)]
    reps += [(-c - 0.5, y + 0.5) for y in range(-c, c)]
    for rep in reps:
        part = antipode(rep)
        inside = tuple(q for q in tile_data(rep) if q in grid) + \
            tuple(q for q in tile_data(part) if q in grid)
        tiles.append(Tile(rep, "Z" if is_z_tile(rep) else "X", inside, (rep, part)))
    return tiles


def rotated_tiles(d: int) -> list[Tile]:
    """Open-boundary rotated surface code: Z fringe on top/bottom, X on the
    sides, matching the coloring of the embedded RP2 patch."""
    c = (d - 1) // 2
    grid = set(data_coords(d))
    tiles: list[Tile] = []
    for ix in range(-c - 1, c + 1):
        for iy in range(-c - 1, c + 1):
            center = (ix + 0.5, iy + 0.5)
            inside = [q for q in tile_data(center) if q in grid]
            basis = "Z" if is_z_tile(center) else "X"
            if len(inside) == 4:
                tiles.append(Tile(center, basis, tuple(inside), (center,)))
            elif len(inside) == 2:
                on_top_bottom = abs(center[1]) == c + 0.5
                if (on_top_bottom and basis == "Z") or (not on_top_bottom and basis == "X"):
                    tiles.append(Tile(center, basis, tuple(inside), (center,)))
    return tiles


def fold_orbits(d: int) -> tuple[list[Coord], list[tuple[Coord, Coord]]]:
    """Fixed row and the (top, bottom) orbit pairs of the fold reflection."""
    c = (d - 1) // 2
    fixed = [(float(x), 0.0) for x in range(-c, c + 1)]
    pairs = [((float(x), float(-y)), (float(x), float(y)))
             for y in range(1, c + 1) for x in range(-c, c + 1)]
    return fixed, pairs


def logical_x_row(d: int) -> list[Coord]:
    c = (d - 1) // 2
    return [(float(x), 0.0) for x in range(-c, c + 1)]


def logical_z_column(d: int) -> list[Coord]:
    c = (d - 1) // 2
    return [(0.0, float(y)) for y in range(-c, c + 1)]


# -- morph faces -------------------------------------------------------------


@dataclass(frozen=True)
class Face:
    """One inner-code patch of the concatenation.

    ``pairs`` lists the fold orbits hosted by this face as (top, bottom)
    coordinate pairs; ``anc_top``/``anc_bot`` are the two ancillas introduced
    by the encoding circuit. [[4,2,2]] faces host one orbit, [[6,4,2]] two.
    """

    pairs: tuple[tuple[Coord, Coord], ...]
    anc_top: Coord
    anc_bot: Coord


def morph_ancilla_row(ymax: float) -> float:
    return ymax + 1.0


def srp3_faces(anc_y: float) -> list[Face]:
    return [Face((((float(i), -1.0), (float(i), 1.0)),),
                 (float(i), -anc_y), (float(i), anc_y)) for i in (-1, 0, 1)]


def srp5_faces(anc_y: float) -> list[Face]:
    faces = [Face((((-2.0, -2.0), (-2.0, 2.0)), ((-2.0, -1.0), (-2.0, 1.0))),
                  (-2.0, -anc_y), (-2.0, anc_y))]
    faces.append(Face((((-1.0, -1.0), (-1.0, 1.0)), ((0.0, -1.0), (0.0, 1.0))),
                      (-1.0, -anc_y), (-1.0, anc_y)))
    faces.append(Face((((-1.0, -2.0), (-1.0, 2.0)), ((0.0, -2.0), (0.0, 2.0))),
                      (0.0, -anc_y), (0.0, anc_y)))
    for i in (1, 2):
        faces.append(Face((((float(i), -2.0), (float(i), 2.0)), ((float(i), -1.0), (float(i), 1.0))),
                          (float(i), -anc_y), (float(i), anc_y)))
    return faces


# -- growth geometry -----------------------------------------------------------


def injection_bell_pairs() -> list[tuple[Coord, Coord]]:
    """Antipodal Bell pairs covering the eight non-center qubits of RP2-3."""
    pairs = [((float(i), -1.0), (float(-i), 1.0)) for i in (-1, 0, 1)]
    pairs.append(((-1.0, 0.0), (1.0, 0.0)))
    return pairs


def ring_bell_pairs(radius: int) -> list[tuple[Coord, Coord]]:
    """Antipodal Bell pairs on the square ring at the given radius."""
    r = radius
    pairs = [((float(x), float(-r)), (float(-x), float(r))) for x in range(-r, r)]
    pairs += [((float(-r), float(y)), (float(r), float(-y))) for y in range(-r + 1, r + 1)]
    return pairs


def grow_bell_pairs() -> list[tuple[Coord, Coord]]:
    pairs = [((float(i), -2.0), (float(-i), 2.0)) for i in (-2, -1, 0, 1, 2)]
    pairs += [((2.0, float(j)), (-2.0, float(-j))) for j in (-1, 0, 1)]
    return pairs


def expansion_blocks(d_in: int, d_out: int) -> tuple[list[Coord], list[Coord]]:
    """(|0>-initialized, |+>-initialized) data blocks outside the Bell ring."""
    y1 = d_in // 2 + 1
    zeros: list[Coord] = []
    plus: list[Coord] = []
    for y in range(y1 + 1, d_out // 2 + 1):
        for x in range(-y, y):
            zeros.append((float(x), float(-y)))
            zeros.append((float(-x), float(y)))
    for x in range(y1 + 1, d_out // 2 + 1):
        for y in range(-x + 1, x + 1):
            plus.append((float(-x), float(y)))
            plus.append((float(x), float(-y)))
    return zeros, plus


# -- syndrome-extraction schedules ------------------------------------------------

X_SLOTS_ALIGNED = {(0.5, -0.5): 1, (-0.5, -0.5): 2, (0.5, 0.5): 3, (-0.5, 0.5): 4}
Z_SLOTS_ALIGNED = {(0.5, -0.5): 1, (0.5, 0.5): 2, (-0.5, -0.5): 3, (-0.5, 0.5): 4}
# Rotated-code variants: hooks perpendicular to the co-aligned logicals.
X_SLOTS_SAFE = {(-0.5, -0.5): 1, (-0.5, 0.5): 2, (0.5, -0.5): 3, (0.5, 0.5): 4}
Z_SLOTS_SAFE = {(-0.5, -0.5): 1, (0.5, -0.5): 2, (-0.5, 0.5): 3, (0.5, 0.5): 4}


def schedule_rotated(tiles: list[Tile]) -> dict[Coord, list[tuple[int, Coord]]]:
    """Four-layer schedule for open rotated codes via the direction rule."""
    sched: dict[Coord, list[tuple[int, Coord]]] = {}
    for t in tiles:
        slots = X_SLOTS_SAFE if t.basis == "X" else Z_SLOTS_SAFE
        entries = []
        for q in t.data:
            off = (q[0] - t.center[0], q[1] - t.center[1])
            entries.append((slots[off], q))
        sched[t.center] = sorted(entries)
    _check_schedule(sched)
    return sched


def schedule_rp2(tiles: list[Tile], n_layers: int = 5) -> dict[Coord, list[tuple[int, Coord]]]:
    """Depth-5 schedule: bulk tiles use the aligned direction rule on layers
    1-4; merged-tile edges are placed by backtracking with each merged tile's
    halves kept time-contiguous (side A strictly before side B), which keeps
    ancilla hooks equivalent to single-location errors."""
    sched: dict[Coord, list[tuple[int, Coord]]] = {}
    busy: dict[tuple[Coord, int], bool] = {}
    for t in tiles:
        if t.merged:
            continue
        slots = X_SLOTS_ALIGNED if t.basis == "X" else Z_SLOTS_ALIGNED
        entries = []
        for q in t.data:
            off = (q[0] - t.center[0], q[1] - t.center[1])
            layer = slots[off]
            entries.append((layer, q))
            busy[(q, layer)] = True
        sched[t.center] = sorted(entries)

    merged = [t for t in tiles if t.merged]

    def half_edges(t: Tile) -> tuple[list[Coord], list[Coord]]:
        a = [q for q in tile_data(t.halves[0]) if q in t.data]
        b = [q for q in t.data if q not in a]
        return a, b

    def place(i: int) -> bool:
        if i == len(merged):
            return True
        t = merged[i]
        side_a, side_b = half_edges(t)
        for assign in _merged_assignments(len(side_a), len(side_b), n_layers):
            layers_a, layers_b = assign
            combo = list(zip(layers_a, side_a)) + list(zip(layers_b, side_b))
            if any((q, layer) in busy for layer, q in combo):
                continue
            for layer, q in combo:
                busy[(q, layer)] = True
            sched[t.center] = sorted(combo)
            if place(i + 1):
                return True
            for layer, q in combo:
                del busy[(q, layer)]
            del sched[t.center]
        return False

    if not place(0):
        raise RuntimeError("no valid merged-tile schedule found")
    _check_schedule(sched, n_layers)
    return sched


def _merged_assignments(na: int, nb: int, n_layers: int):
    """Candidate layer tuples with side A finishing before side B starts."""
    import itertools
    for la in itertools.combinations(range(1, n_layers + 1), na):
        for lb in itertools.combinations(range(la[-1] + 1, n_layers + 1), nb):
            yield la, lb
    # Fallback orientation: side B first.
    for lb in itertools.combinations(range(1, n_layers + 1), nb):
        for la in itertools.combinations(range(lb[-1] + 1, n_layers + 1), na):
            yield la, lb


def _check_schedule(sched: dict[Coord, list[tuple[int, Coord]]], n_layers: int = 4) -> None:
    seen: set[tuple[Coord, int]] = set()
    for center, entries in sched.items():
        anc_layers = [layer for layer, _ in entries]
        if len(set(anc_layers)) != len(anc_layers):
            raise RuntimeError(f"ancilla at {center} double-booked")
        for layer, q in entries:
            if layer > n_layers:
                raise RuntimeError("schedule exceeds layer budget")
            if (q, layer) in seen:
                raise RuntimeError(f"data {q} double-booked in layer {layer}")
            seen.add((q, layer))
