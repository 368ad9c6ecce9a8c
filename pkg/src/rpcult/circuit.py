"""Circuit intermediate representation.

A circuit is an ordered list of timesteps, each holding instructions that act
on disjoint qubits. Detectors and observables reference absolute measurement
record indices internally and serialize as rec[-k] back-references. Rounds
are explicit metadata (timestep span, length in {0.5, 1.0, 1.5}, label) set
by the protocol builders; nothing about rounds is inferred.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .pauli import PauliString

GATES_1Q = ("H", "S", "S_DAG", "T", "T_DAG")
GATES_2Q = ("CNOT", "SWAP")
PAULI_FRAME = ("X", "Z")
RESETS = ("R_Z", "R_X", "R_Z_MINUS", "R_X_MINUS")
MEASURES = ("M_Z", "M_X")
NOISE = ("NOISE_1Q_DEPOL", "NOISE_2Q_DEPOL", "FLIP_X", "FLIP_Z", "MEAS_FLIP")
CLASSICAL = ("CLASSICAL_X", "CLASSICAL_Z")
MARKERS = ("DETECTOR", "OBSERVABLE")


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Instruction:
    kind: str
    targets: tuple[int, ...] = ()
    records: tuple[int, ...] = ()          # absolute measurement indices
    arg: float | None = None               # noise probability
    pauli: tuple[tuple[int, str], ...] = ()  # MPP body: (qubit, letter)
    coords: tuple[float, ...] = ()         # DETECTOR annotation
    cultivation: bool = False              # DETECTOR post-selection class
    basis: str = ""                        # DETECTOR side: "X" or "Z"
    exempt_meas_noise: bool = False        # measurement skipped by noise pass
    expected: int = 0                      # noiseless parity of records

    def occupied(self) -> tuple[int, ...]:
        """Qubits this instruction physically occupies within its timestep."""
        if self.kind in GATES_1Q or self.kind in GATES_2Q or self.kind in RESETS \
                or self.kind in MEASURES:
            return self.targets
        if self.kind == "MPP":
            return tuple(q for q, _ in self.pauli)
        return ()


@dataclass
class Round:
    label: str
    length: float
    start_ts: int
    end_ts: int = -1          # exclusive; patched when the round closes
    noise_exempt: bool = False


class Circuit:
    def __init__(self, n_qubits: int, coords: dict[int, tuple[float, float]] | None = None):
        self.n_qubits = n_qubits
        self.timesteps: list[list[Instruction]] = []
        self.n_records = 0
        self.record_meta: list[tuple[int, str, int]] = []  # (qubit, basis, timestep)
        self.rounds: list[Round] = []
        self.coords = dict(coords or {})
        self.noisy = False

    # -- construction -------------------------------------------------------

    def append_timestep(self, instrs: list[Instruction]) -> None:
        seen: set[int] = set()
        ts_index = len(self.timesteps)
        staged: list[Instruction] = []
        for ins in instrs:
            for q in ins.occupied():
                if q in seen:
                    raise CircuitError(f"qubit {q} targeted twice in timestep {ts_index}")
                if not 0 <= q < self.n_qubits:
                    raise CircuitError(f"qubit {q} out of range")
                seen.add(q)
            ins = self._assign_records(ins, ts_index)
            staged.append(ins)
        self.timesteps.append(staged)

    def _assign_records(self, ins: Instruction, ts_index: int) -> Instruction:
        if ins.kind in MEASURES:
            recs = []
            for q in ins.targets:
                recs.append(self.n_records)
                self.record_meta.append((q, "Z" if ins.kind == "M_Z" else "X", ts_index))
                self.n_records += 1
            return replace(ins, records=tuple(recs))
        if ins.kind == "MPP":
            rec = self.n_records
            self.record_meta.append((ins.pauli[0][0], "P", ts_index))
            self.n_records += 1
            return replace(ins, records=(rec,))
        for r in ins.records:
            if not 0 <= r < self.n_records:
                raise CircuitError(f"dangling record reference {r}")
        return ins

    def begin_round(self, label: str, length: float, noise_exempt: bool = False) -> None:
        if self.rounds and self.rounds[-1].end_ts < 0:
            raise CircuitError("previous round still open")
        self.rounds.append(Round(label, length, len(self.timesteps), noise_exempt=noise_exempt))

    def end_round(self) -> None:
        self.rounds[-1].end_ts = len(self.timesteps)

    # -- views ---------------------------------------------------------------

    def instructions(self):
        for ts, step in enumerate(self.timesteps):
            for ins in step:
                yield ts, ins

    def detectors(self) -> list[Instruction]:
        return [ins for _, ins in self.instructions() if ins.kind == "DETECTOR"]

    def activation_span(self) -> dict[int, tuple[int, int]]:
        """first-reset .. last-measurement timestep (inclusive) per qubit."""
        span: dict[int, tuple[int, int]] = {}
        for ts, ins in self.instructions():
            for q in ins.occupied():
                if q in span:
                    a, _ = span[q]
                    span[q] = (a, ts)
                else:
                    span[q] = (ts, ts)
        return span

    def active_sets(self) -> list[set[int]]:
        """Active qubits per timestep (active = inside the activation span)."""
        span = self.activation_span()
        out: list[set[int]] = [set() for _ in self.timesteps]
        for q, (a, b) in span.items():
            for ts in range(a, b + 1):
                out[ts].add(q)
        return out

    def footprint(self) -> int:
        return max((len(s) for s in self.active_sets()), default=0)

    def active_per_round(self) -> list[tuple[str, float, int]]:
        sets = self.active_sets()
        out = []
        for rnd in self.rounds:
            hi = max((len(sets[t]) for t in range(rnd.start_ts, rnd.end_ts)), default=0)
            out.append((rnd.label, rnd.length, hi))
        return out

    def noise_event_count(self) -> int:
        return sum(1 for _, ins in self.instructions() if ins.kind in NOISE)

    def round_of_timestep(self, ts: int) -> int:
        for i, rnd in enumerate(self.rounds):
            if rnd.start_ts <= ts < rnd.end_ts:
                return i
        return len(self.rounds) - 1

    # -- transforms ------------------------------------------------------------

    def clifford_variant(self) -> "Circuit":
        sub = {"T": "S", "T_DAG": "S_DAG"}
        return self._map_instructions(lambda ins: replace(ins, kind=sub.get(ins.kind, ins.kind)))

    def _map_instructions(self, fn) -> "Circuit":
        out = Circuit(self.n_qubits, self.coords)
        out.n_records = self.n_records
        out.record_meta = list(self.record_meta)
        out.rounds = [replace(r) for r in self.rounds]
        out.noisy = self.noisy
        out.timesteps = [[fn(ins) for ins in step] for step in self.timesteps]
        return out

    def with_noise(self, p: float) -> "Circuit":
        """Uniform depolarizing pass: gate/idle depolarization, init flips,
        measurement-record flips. Idle noise hits every active untouched qubit
        in every non-exempt timestep."""
        if not 0 <= p < 1:
            raise CircuitError("noise strength out of range")
        if self.noisy:
            raise CircuitError("circuit already carries noise")
        exempt_ts = set()
        for rnd in self.rounds:
            if rnd.noise_exempt:
                exempt_ts.update(range(rnd.start_ts, rnd.end_ts))
        active = self.active_sets()
        out = Circuit(self.n_qubits, self.coords)
        out.rounds = [replace(r) for r in self.rounds]
        for ts, step in enumerate(self.timesteps):
            staged: list[Instruction] = []
            touched: set[int] = set()
            real_op = False
            for ins in step:
                staged.append(ins)
                occ = ins.occupied()
                touched.update(occ)
                if occ:
                    real_op = True
                if ts in exempt_ts:
                    continue
                if ins.kind in GATES_1Q:
                    for q in ins.targets:
                        staged.append(Instruction("NOISE_1Q_DEPOL", (q,), arg=p))
                elif ins.kind in GATES_2Q:
                    staged.append(Instruction("NOISE_2Q_DEPOL", ins.targets, arg=p))
                elif ins.kind in ("R_Z", "R_Z_MINUS"):
                    for q in ins.targets:
                        staged.append(Instruction("FLIP_X", (q,), arg=p))
                elif ins.kind in ("R_X", "R_X_MINUS"):
                    for q in ins.targets:
                        staged.append(Instruction("FLIP_Z", (q,), arg=p))
                elif ins.kind in MEASURES and not ins.exempt_meas_noise:
                    m = len(ins.targets)
                    for k, q in enumerate(ins.targets):
                        staged.append(Instruction("MEAS_FLIP", (q,),
                                                  records=(k - m,), arg=p))
            if real_op and ts not in exempt_ts:
                for q in sorted(active[ts] - touched):
                    staged.append(Instruction("NOISE_1Q_DEPOL", (q,), arg=p))
            out.append_timestep_raw(staged)
        out.noisy = True
        return out

    def append_timestep_raw(self, instrs: list[Instruction]) -> None:
        """Append without conflict checks, re-assigning measurement records and
        resolving relative record references (used by the noise pass/parser)."""
        staged: list[Instruction] = []
        for ins in instrs:
            if ins.kind in MEASURES or ins.kind == "MPP":
                ins = self._assign_records(replace(ins, records=()), len(self.timesteps))
            elif ins.records and min(ins.records) < 0:
                ins = replace(ins, records=tuple(
                    r if r >= 0 else self.n_records + r for r in ins.records))
            staged.append(ins)
        self.timesteps.append(staged)

    # -- serialization -----------------------------------------------------------

    def to_text(self) -> str:
        lines: list[str] = []
        round_starts = {r.start_ts: r for r in self.rounds}
        emitted = 0
        for ts, step in enumerate(self.timesteps):
            if ts in round_starts:
                r = round_starts[ts]
                tag = " NOISELESS" if r.noise_exempt else ""
                lines.append(f"#ROUND {r.length} {r.label}{tag}")
            for ins in step:
                lines.append(self._line(ins, emitted))
                if ins.kind in MEASURES:
                    emitted += len(ins.targets)
                elif ins.kind == "MPP":
                    emitted += 1
            if ts != len(self.timesteps) - 1:
                lines.append("TICK")
        return "\n".join(lines) + "\n"

    def _line(self, ins: Instruction, emitted: int) -> str:
        def recs(records):
            return " ".join(f"rec[{r - emitted}]" for r in records)

        if ins.kind == "DETECTOR":
            coords = ",".join(repr(c) for c in ins.coords)
            cult = 1 if ins.cultivation else 0
            return f"DETECTOR({coords},{cult},{ins.basis}) {recs(ins.records)}"
        if ins.kind == "OBSERVABLE":
            return f"OBSERVABLE_INCLUDE(0) {recs(ins.records)}"
        if ins.kind == "MPP":
            body = " ".join(f"{letter}{q}" for q, letter in ins.pauli)
            return f"MPP {body}"
        if ins.kind in CLASSICAL:
            return f"{ins.kind} {ins.targets[0]} {recs(ins.records)}"
        if ins.kind == "MEAS_FLIP":
            return f"MEAS_FLIP({ins.arg}) {recs(ins.records)}"
        if ins.kind in NOISE:
            return f"{ins.kind}({ins.arg}) " + " ".join(str(q) for q in ins.targets)
        return f"{ins.kind} " + " ".join(str(q) for q in ins.targets)


def build_circuit(n_qubits: int, coords=None) -> Circuit:
    return Circuit(n_qubits, coords)
