"""Reference execution of circuits on the stabilizer tableau.

Two modes share one walker:

* symbolic - noise skipped, measurement randomness tracked as affine forms;
  used by the protocol builder to validate and complete detectors and by the
  golden noiseless checks.
* sampled - noise channels applied with an RNG and measurement randomness
  resolved on the fly; slow, used only to cross-check the frame sampler on
  small circuits.
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, Instruction
from .pauli import PauliString
from .tableau import NonCliffordError, StabilizerTableau, form_const, form_is_const


class SymbolicRun:
    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.tableau = StabilizerTableau(circuit.n_qubits)
        self.outcomes: list[int] = []
        for _, ins in circuit.instructions():
            _apply_symbolic(self.tableau, ins, self.outcomes)

    def record_form(self, rec: int) -> int:
        return self.outcomes[rec]

    def parity_form(self, recs) -> int:
        form = 0
        for r in recs:
            form ^= self.outcomes[r]
        return form

    def detector_ok(self, ins: Instruction) -> bool:
        form = self.parity_form(ins.records)
        return form_is_const(form) and form_const(form) == ins.expected

    def logical_expectation(self, p: PauliString) -> int | None:
        return self.tableau.expectation(p)


def _apply_symbolic(tab: StabilizerTableau, ins: Instruction, outcomes: list[int]) -> None:
    kind = ins.kind
    if kind in ("T", "T_DAG"):
        raise NonCliffordError("reference simulation is Clifford-only; "
                               "take the clifford_variant first")
    if kind == "H":
        for q in ins.targets:
            tab.h(q)
    elif kind == "S":
        for q in ins.targets:
            tab.s(q)
    elif kind == "S_DAG":
        for q in ins.targets:
            tab.s_dag(q)
    elif kind == "CNOT":
        tab.cnot(ins.targets[0], ins.targets[1])
    elif kind == "SWAP":
        tab.swap(ins.targets[0], ins.targets[1])
    elif kind == "X":
        for q in ins.targets:
            tab.x_gate(q)
    elif kind == "Z":
        for q in ins.targets:
            tab.z_gate(q)
    elif kind == "R_Z":
        for q in ins.targets:
            tab.reset_z(q, 0)
    elif kind == "R_Z_MINUS":
        for q in ins.targets:
            tab.reset_z(q, 1)
    elif kind == "R_X":
        for q in ins.targets:
            tab.reset_x(q, 0)
    elif kind == "R_X_MINUS":
        for q in ins.targets:
            tab.reset_x(q, 1)
    elif kind == "M_Z":
        for q in ins.targets:
            form, _ = tab.measure_z(q)
            outcomes.append(form)
    elif kind == "M_X":
        for q in ins.targets:
            form, _ = tab.measure_x(q)
            outcomes.append(form)
    elif kind == "MPP":
        p = PauliString.from_label("", tab.n, sites=dict(ins.pauli))
        form, _ = tab.measure_pauli(p)
        outcomes.append(form)
    elif kind == "CLASSICAL_X" or kind == "CLASSICAL_Z":
        form = 0
        for r in ins.records:
            form ^= outcomes[r]
        letter = "X" if kind == "CLASSICAL_X" else "Z"
        tab.pauli(PauliString.from_label("", tab.n, sites={ins.targets[0]: letter}),
                  control_form=form)
    # noise, DETECTOR and OBSERVABLE instructions are inert here


def run_symbolic(circuit: Circuit) -> SymbolicRun:
    return SymbolicRun(circuit)


def sample_shot(circuit: Circuit, rng: np.random.Generator):
    """Full tableau Monte Carlo of one noisy shot.

    Returns (detector bits, observable bit) relative to the noiseless
    reference, exactly like the frame sampler reports them.
    """
    tab = StabilizerTableau(circuit.n_qubits)
    outcomes: list[int] = []
    detectors: list[int] = []
    observable = 0

    def rand_bit() -> int:
        return int(rng.integers(0, 2))

    for _, ins in circuit.instructions():
        kind = ins.kind
        if kind == "NOISE_1Q_DEPOL":
            for q in ins.targets:
                if rng.random() < ins.arg:
                    _apply_pauli_index(tab, q, int(rng.integers(1, 4)))
        elif kind == "NOISE_2Q_DEPOL":
            if rng.random() < ins.arg:
                pp = int(rng.integers(1, 16))
                _apply_pauli_index(tab, ins.targets[0], pp & 3)
                _apply_pauli_index(tab, ins.targets[1], pp >> 2)
        elif kind == "FLIP_X":
            for q in ins.targets:
                if rng.random() < ins.arg:
                    tab.x_gate(q)
        elif kind == "FLIP_Z":
            for q in ins.targets:
                if rng.random() < ins.arg:
                    tab.z_gate(q)
        elif kind == "MEAS_FLIP":
            if rng.random() < ins.arg:
                outcomes[ins.records[0]] ^= 1
        elif kind == "M_Z":
            for q in ins.targets:
                form, was_random = tab.measure_z(q, forced_form=rand_bit() if _random_peek(tab, q, "Z") else None)
                outcomes.append(form_const(form))
        elif kind == "M_X":
            for q in ins.targets:
                form, was_random = tab.measure_x(q, forced_form=rand_bit() if _random_peek(tab, q, "X") else None)
                outcomes.append(form_const(form))
        elif kind == "MPP":
            p = PauliString.from_label("", tab.n, sites=dict(ins.pauli))
            t2 = tab.copy()
            _, was_random = t2.measure_pauli(p, forced_form=0)
            form, _ = tab.measure_pauli(p, forced_form=rand_bit() if was_random else None)
            outcomes.append(form_const(form))
        elif kind == "CLASSICAL_X" or kind == "CLASSICAL_Z":
            bit = 0
            for r in ins.records:
                bit ^= outcomes[r]
            if bit:
                letter = "X" if kind == "CLASSICAL_X" else "Z"
                for q in ins.targets:
                    if letter == "X":
                        tab.x_gate(q)
                    else:
                        tab.z_gate(q)
        elif kind == "DETECTOR":
            par = 0
            for r in ins.records:
                par ^= outcomes[r]
            detectors.append(par ^ ins.expected)
        elif kind == "OBSERVABLE":
            par = 0
            for r in ins.records:
                par ^= outcomes[r]
            observable ^= par ^ ins.expected
        else:
            _apply_symbolic(tab, ins, outcomes)
    return np.array(detectors, dtype=np.uint8), observable


def _random_peek(tab: StabilizerTableau, q: int, basis: str) -> bool:
    col = tab.x[:, q] if basis == "Z" else tab.z[:, q]
    return bool(col[tab.n:].any())


def _apply_pauli_index(tab: StabilizerTableau, q: int, idx: int) -> None:
    if idx == 1:
        tab.x_gate(q)
    elif idx == 2:
        tab.z_gate(q)
    elif idx == 3:
        tab.y_gate(q)
