"""Photon-number-resolving detection.

Detection is modelled exactly: the state is split by the occupation pattern
on the measured modes, each block's squared norm is the pattern's
probability, and the measured columns are dropped from the renormalized
block.  Patterns outside the 0/1/2-photon subspace need no special handling;
for the inputs used here they simply never occur.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Sequence

from .fock import LabeledFockState, Occupation

ZERO_PROB_TOL = 1e-14


@dataclass(frozen=True)
class MeasurementOutcome:
    pattern: Occupation
    probability: float
    post_state: LabeledFockState

    @property
    def n_detected(self) -> int:
        return sum(self.pattern)


def _split_modes(s: LabeledFockState, measured_modes: Sequence[int]):
    measured = [s.mode_index(m) for m in measured_modes]
    if len(set(measured)) != len(measured):
        raise ValueError(f"repeated measured modes {list(measured_modes)}")
    keep = [i for i in range(len(s.mode_names)) if i not in measured]
    return measured, keep


def enumerate_outcomes(s: LabeledFockState, measured_modes: Sequence[int]
                       ) -> list[MeasurementOutcome]:
    """All detection patterns on ``measured_modes`` with nonzero probability.

    Outcomes are sorted by pattern.  The input need not be normalized; the
    probabilities are relative to ``s.norm()**2``.
    """
    if not s.terms:
        raise ValueError("cannot measure the empty state")
    measured, keep = _split_modes(s, measured_modes)
    total = s.norm() ** 2
    blocks: dict[Occupation, dict] = {}
    for (label, occ), amp in s.terms.items():
        pattern = tuple(occ[i] for i in measured)
        rest = tuple(occ[i] for i in keep)
        blocks.setdefault(pattern, {})[(label, rest)] = amp
    names = tuple(s.mode_names[i] for i in keep)
    out = []
    for pattern in sorted(blocks):
        block = LabeledFockState(names, blocks[pattern])
        p = block.norm() ** 2 / total
        if p <= ZERO_PROB_TOL:
            continue
        out.append(MeasurementOutcome(pattern, p, block.normalized()))
    return out


def apply_kraus(s: LabeledFockState,
                bra_terms: Sequence[tuple[Sequence[int], complex]],
                measured_modes: Sequence[int],
                ) -> tuple[float, Optional[LabeledFockState]]:
    """Contract ``measured_modes`` against ``sum_k c_k <<n_k|``.

    ``bra_terms`` lists ``(occupation on measured_modes, c_k)``; the
    coefficients are used as written, not conjugated.  Returns the outcome
    probability and the renormalized remainder, or ``(0.0, None)`` when the
    bra annihilates the state.
    """
    measured, keep = _split_modes(s, measured_modes)
    weights: dict[Occupation, complex] = {}
    for occ, c in bra_terms:
        occ = tuple(int(n) for n in occ)
        if len(occ) != len(measured):
            raise ValueError(
                f"bra occupation {occ} does not match {len(measured)} measured modes"
            )
        weights[occ] = weights.get(occ, 0j) + complex(c)
    out: dict = {}
    for (label, occ), amp in s.terms.items():
        c = weights.get(tuple(occ[i] for i in measured))
        if c is None:
            continue
        key = (label, tuple(occ[i] for i in keep))
        out[key] = out.get(key, 0j) + c * amp
    block = LabeledFockState(tuple(s.mode_names[i] for i in keep), out)
    p = block.norm() ** 2 / s.norm() ** 2
    if p <= ZERO_PROB_TOL:
        return 0.0, None
    return p, block.normalized()


def state_hash(s: LabeledFockState, length: int = 12) -> str:
    """Short digest of the canonical text form, for outcome tables."""
    text = s.to_text(header=True, digits=10)
    return hashlib.sha256(text.encode()).hexdigest()[:length]


def outcome_table(outcomes: Sequence[MeasurementOutcome]) -> str:
    """``pattern | probability | post-state-hash`` rows sorted by pattern."""
    rows = ["pattern | probability | post-state-hash"]
    for o in sorted(outcomes, key=lambda o: o.pattern):
        pat = "(" + ",".join(str(n) for n in o.pattern) + ")"
        rows.append(f"{pat} | {o.probability:.12f} | {state_hash(o.post_state)}")
    return "\n".join(rows)


def outcome_records(outcomes: Sequence[MeasurementOutcome]) -> list[dict]:
    """JSON-ready mirror of :func:`outcome_table` with full-precision floats."""
    return [
        {
            "pattern": list(o.pattern),
            "probability": o.probability,
            "post_state_hash": state_hash(o.post_state),
            "post_state": o.post_state.to_text(),
        }
        for o in sorted(outcomes, key=lambda o: o.pattern)
    ]
