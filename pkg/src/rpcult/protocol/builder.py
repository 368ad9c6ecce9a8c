"""Incremental circuit builder with live detector bookkeeping.

The builder keeps a symbolic tableau in sync with the circuit as timesteps
are appended. Measurement outcomes are affine forms over collapse
variables, so deciding whether a candidate record set is a valid detector
(variable-free parity) is a constant-time check, and missing context can be
solved for by GF(2) elimination over a pool of earlier records.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import gf2
from ..circuit import Circuit, Instruction
from ..pauli import PauliString
from ..reference import _apply_symbolic
from ..tableau import StabilizerTableau, form_const, form_is_const

Coord = tuple[float, float]


@dataclass
class DetectorInfo:
    index: int
    coords: tuple[float, ...]
    basis: str
    cultivation: bool
    round_index: int
    records: tuple[int, ...]
    kind: str = "plain"          # plain | split | flag | check
    halves: tuple[Coord, Coord] | None = None   # antipodal clusters if split


@dataclass
class BuildState:
    """What the sampler and decoder need to know beyond the raw circuit."""
    detectors: list[DetectorInfo] = field(default_factory=list)
    observable_records: tuple[int, ...] = ()
    round_labels: list[tuple[str, float]] = field(default_factory=list)


class ProtocolBuilder:
    def __init__(self, coords: list[Coord]):
        self.coord_index: dict[Coord, int] = {c: i for i, c in enumerate(coords)}
        self.circuit = Circuit(len(coords), {i: c for c, i in self.coord_index.items()})
        self.tableau = StabilizerTableau(len(coords))
        self.outcomes: list[int] = []
        self.state = BuildState()
        self.last_record: dict[Coord, int] = {}
        self.record_coord: dict[int, Coord] = {}
        self._round_index = -1
        self.cultivation_stage = True

    def q(self, c: Coord) -> int:
        return self.coord_index[c]

    # -- structure ---------------------------------------------------------

    def begin_round(self, label: str, length: float, noise_exempt: bool = False) -> None:
        self.circuit.begin_round(label, length, noise_exempt)
        self.state.round_labels.append((label, length))
        self._round_index += 1

    def end_round(self) -> None:
        self.circuit.end_round()

    def ts(self, instrs: list[Instruction]) -> None:
        before = self.circuit.n_records
        self.circuit.append_timestep(instrs)
        for ins in self.circuit.timesteps[-1]:
            _apply_symbolic(self.tableau, ins, self.outcomes)
        for ins in self.circuit.timesteps[-1]:
            if ins.kind in ("M_Z", "M_X"):
                for k, qi in enumerate(ins.targets):
                    self.record_coord[ins.records[k]] = self.circuit.coords[qi]
            elif ins.kind == "MPP":
                self.record_coord[ins.records[0]] = self.circuit.coords[ins.pauli[0][0]]
        assert self.circuit.n_records == len(self.outcomes), \
            f"record bookkeeping out of sync ({self.circuit.n_records} vs {len(self.outcomes)})"
        del before

    # -- gates helpers -------------------------------------------------------

    def gate(self, kind: str, targets: list[Coord]) -> Instruction:
        return Instruction(kind, tuple(self.q(c) for c in targets))

    def cnots(self, pairs: list[tuple[Coord, Coord]]) -> list[Instruction]:
        return [Instruction("CNOT", (self.q(c), self.q(t))) for c, t in pairs]

    def measure(self, kind: str, targets: list[Coord], exempt: set[Coord] | None = None
                ) -> list[Instruction]:
        exempt = exempt or set()
        out = []
        for c in targets:
            out.append(Instruction(kind, (self.q(c),),
                                   exempt_meas_noise=c in exempt))
        return out

    def record_of(self, coord: Coord) -> int:
        return self.last_record[coord]

    def note_records(self, step_records: dict[Coord, int]) -> None:
        self.last_record.update(step_records)

    def records_from_last_step(self) -> dict[Coord, int]:
        got: dict[Coord, int] = {}
        for ins in self.circuit.timesteps[-1]:
            if ins.kind in ("M_Z", "M_X"):
                for k, qi in enumerate(ins.targets):
                    got[self.circuit.coords[qi]] = ins.records[k]
            elif ins.kind == "MPP":
                got[self.circuit.coords[ins.pauli[0][0]]] = ins.records[0]
        return got

    # -- detectors ------------------------------------------------------------

    def parity_form(self, recs) -> int:
        f = 0
        for r in recs:
            f ^= self.outcomes[r]
        return f

    def try_detector(self, recs: list[int]) -> int | None:
        f = self.parity_form(recs)
        return form_const(f) if form_is_const(f) else None

    def emit_detector(self, recs: list[int], coords: tuple[float, ...], basis: str,
                      kind: str = "plain", halves=None) -> DetectorInfo:
        f = self.parity_form(recs)
        if not form_is_const(f):
            raise ValueError(f"detector at {coords} is not deterministic")
        ins = Instruction("DETECTOR", records=tuple(recs), coords=coords,
                          cultivation=self.cultivation_stage, basis=basis,
                          expected=form_const(f))
        self.ts([ins])
        info = DetectorInfo(len(self.state.detectors), coords, basis,
                            self.cultivation_stage, self._round_index,
                            tuple(recs), kind, halves)
        self.state.detectors.append(info)
        return info

    def complete_detector(self, recs: list[int], pool: list[int]) -> list[int] | None:
        """Augment ``recs`` with pool records so the parity is deterministic."""
        f = self.parity_form(recs)
        if form_is_const(f):
            return list(recs)
        target = f >> 1
        forms = [self.outcomes[r] >> 1 for r in pool]
        nbits = max([target.bit_length()] + [g.bit_length() for g in forms] + [1])
        mat = np.zeros((nbits, len(pool)), dtype=np.uint8)
        for j, g in enumerate(forms):
            for b in range(nbits):
                mat[b, j] = (g >> b) & 1
        rhs = np.array([(target >> b) & 1 for b in range(nbits)], dtype=np.uint8)
        sol = gf2.solve(mat, rhs)
        if sol is None:
            return None
        return list(recs) + [pool[j] for j in np.flatnonzero(sol)]

    # -- feed-forward sign fixing ------------------------------------------------

    def solve_sign_corrections(
        self,
        z_checks: list[tuple[Coord, PauliString, int]],
        allowed: list[Coord],
        protect: list[PauliString],
    ) -> tuple[np.ndarray, dict[int, np.ndarray]]:
        """Find Pauli-X corrections driving every Z check to its target sign.

        z_checks: (tile position, Z stabilizer, wanted outcome bit) triples,
        measured in the immediately preceding step. Returns the fixed X
        support and, for each controlling record, its controlled X support.
        Controls are the just-measured records of checks whose outcome is
        still variable-dependent. ``protect`` operators must commute with
        every correction (the logical must not be kicked).
        """
        n = self.circuit.n_qubits
        recs = {pos: self.record_of(pos) for pos, _, _ in z_checks}
        forms = {pos: self.outcomes[recs[pos]] for pos, _, _ in z_checks}
        control_positions = [pos for pos, _, _ in z_checks if not form_is_const(forms[pos])]
        var_union = 0
        for pos in control_positions:
            var_union |= forms[pos] >> 1
        var_list = [b for b in range(var_union.bit_length()) if (var_union >> b) & 1]
        g_list = [pos for pos, _, _ in z_checks]
        n_g, n_r = len(g_list), len(control_positions)
        # Unknown w[g, r] = <u_r, Z_g>, w0[g] = <u_fix, Z_g>; match variable
        # coefficients and constants of f_g + sum_r f_r w[g,r] + w0[g] = want_g.
        rows = []
        rhs = []
        for gi, (pos, _, want) in enumerate(z_checks):
            fg = forms[pos]
            for vb in var_list:
                row = np.zeros(n_g * n_r + n_g, dtype=np.uint8)
                for rj, cpos in enumerate(control_positions):
                    if (forms[cpos] >> (vb + 1)) & 1:
                        row[gi * n_r + rj] = 1
                rows.append(row)
                rhs.append((fg >> (vb + 1)) & 1)
            row = np.zeros(n_g * n_r + n_g, dtype=np.uint8)
            for rj, cpos in enumerate(control_positions):
                if form_const(forms[cpos]):
                    row[gi * n_r + rj] = 1
            row[n_g * n_r + gi] = 1
            rows.append(row)
            rhs.append(form_const(fg) ^ want)
        sol = gf2.solve(np.array(rows, dtype=np.uint8), np.array(rhs, dtype=np.uint8))
        if sol is None:
            raise ValueError("no consistent sign-fixing correction exists")
        w = sol[: n_g * n_r].reshape(n_g, n_r)
        w0 = sol[n_g * n_r:]
        allowed_idx = [self.q(c) for c in allowed]
        constraint = np.zeros((n_g + len(protect), len(allowed_idx)), dtype=np.uint8)
        for gi, (_, stab, _) in enumerate(z_checks):
            constraint[gi] = stab.z[allowed_idx]
        for pi, p in enumerate(protect):
            constraint[n_g + pi] = p.z[allowed_idx]

        def realize(targets: np.ndarray) -> np.ndarray:
            rhs_full = np.concatenate([targets, np.zeros(len(protect), dtype=np.uint8)])
            u = gf2.solve(constraint, rhs_full)
            if u is None:
                raise ValueError("correction support not realizable")
            sup = np.zeros(n, dtype=np.uint8)
            sup[np.array(allowed_idx)[np.flatnonzero(u)]] = 1
            return sup

        fixed = realize(w0)
        controlled = {recs[cpos]: realize(w[:, rj])
                      for rj, cpos in enumerate(control_positions)}
        controlled = {r: s for r, s in controlled.items() if s.any()}
        return fixed, controlled

    def emit_corrections(self, fixed: np.ndarray, controlled: dict[int, np.ndarray]
                         ) -> list[Instruction]:
        out: list[Instruction] = []
        for q in np.flatnonzero(fixed):
            out.append(Instruction("X", (int(q),)))
        per_qubit: dict[int, list[int]] = {}
        for rec, sup in controlled.items():
            for q in np.flatnonzero(sup):
                per_qubit.setdefault(int(q), []).append(rec)
        for q, rl in sorted(per_qubit.items()):
            out.append(Instruction("CLASSICAL_X", (q,), records=tuple(sorted(rl))))
        return out

    # -- final checks -------------------------------------------------------------

    def stabilizer_sign(self, p: PauliString) -> int | None:
        return self.tableau.expectation(p)

    def observable(self, recs: list[int]) -> None:
        f = self.parity_form(recs)
        if not form_is_const(f):
            raise ValueError("observable is not deterministic noiselessly")
        self.state.observable_records = tuple(recs)
        self.ts([Instruction("OBSERVABLE", records=tuple(recs), expected=form_const(f))])
