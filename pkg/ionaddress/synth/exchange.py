"""JSON exchange of synthesized sequences.

A sequence document::

    {
      "duration_s": 2.12e-06,
      "ramp_s": 1.2e-07,
      "delay_s": 2e-06,
      "pulses": [{"amplitude": ..., "phase_rad": ...}, ...],
      "targets": [{"theta": ..., "phi": ..., "delta": ...}, ...],
      "a_pi": [...],
      "residual_cost": ...
    }
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Union

from ionaddress.rotor import TargetGate
from ionaddress.synth.optimize import TOLERANCE, SynthesisResult, cost, per_ion_distance
from ionaddress.synth.pulse import IonSet, Pulse, PulseSequence

Document = Dict[str, Any]


def to_document(result: SynthesisResult) -> Document:
    seq = result.sequence
    if not seq.pulses:
        raise ValueError("Cannot export an empty pulse sequence")
    first = seq.pulses[0]
    return {
        "duration_s": first.duration,
        "ramp_s": first.ramp_time,
        "delay_s": seq.inter_pulse_delay,
        "pulses": [{"amplitude": p.amplitude, "phase_rad": p.phase} for p in seq],
        "targets": [t._asdict() for t in result.targets],
        "a_pi": list(result.ions.a_pi),
        "residual_cost": result.residual_cost,
    }


def from_document(doc: Document, tol: float = TOLERANCE) -> SynthesisResult:
    """Rebuild a result; per-ion distances are recomputed, not trusted."""
    try:
        seq = PulseSequence(
            tuple(
                Pulse(p["amplitude"], p["phase_rad"], doc["duration_s"], doc["ramp_s"])
                for p in doc["pulses"]
            ),
            doc["delay_s"],
        )
        targets = tuple(TargetGate(**t) for t in doc["targets"])
        ions = IonSet(tuple(doc["a_pi"]))
    except KeyError as e:
        raise ValueError(f"Sequence document lacks field {e}") from e
    if not seq.pulses:
        raise ValueError("Sequence document has no pulses")
    residual = cost(seq, targets, ions)
    return SynthesisResult(
        sequence=seq,
        targets=targets,
        ions=ions,
        residual_cost=residual,
        per_ion_distance=per_ion_distance(seq, targets, ions),
        attempts=0,
        converged=residual < tol,
    )


def dumps(doc: Any) -> str:
    """Stable JSON text: fixed key order and a trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def dump_sequence(result: SynthesisResult, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(to_document(result)))


def load_sequence(path: Union[str, Path]) -> SynthesisResult:
    return from_document(json.loads(Path(path).read_text()))
