"""Repeated-bleeding distillation of the two-photon outcomes.

After swapping modes 6 and 8 where needed, a two-distillable outcome reads

    (1/sqrt3) |L0>|0_2 0_3 2_6 2_8>  +/-  (sqrt2/sqrt3) |L1>|1_2 1_3 0_6 2_8>

on modes (2, 3, 6, 8).  Each stage weakly taps the pair in mode 6 with
transmission ``t`` (intensity: ``t = 1/2`` is a balanced splitter) and
matches the tap against the lone photon in mode 3.  A stage acts on the two
branches through a fixed instrument:

    branch   continue   one-photon herald   fail
    L0       t^2        2 t (1 - t)         (1 - t)^2                 (two photons tapped)
    L1       t^2        t (1 - t)           1 - t                     (photon lost to mode 3)

The herald equalizes the branches and leaves ``(|L0>|0_2 1_6> +/- |L1>|1_2
0_6>)/sqrt2``; continuing preserves the input form, so the same stage can
be repeated.  Stage ``j`` therefore succeeds with unconditional probability
``(4/3) t^(2j-1) (1 - t)``, summing to ``4t(1 - t^(2k)) / (3(1 + t))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .fock import LabeledFockState, fidelity, swap_modes
from .fusion_boosted import EXACT_CLASS_PROBABILITIES, BoostedOutcome, OutcomeClass

Number = Union[float, Fraction]

# Cut-off for the unbounded protocol: stop once the continuing mass is negligible.
UNBOUNDED_MASS_TOL = 1e-16


class DistillStatus(enum.Enum):
    SUCCESS = "success"
    FAIL = "fail"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class DistillationParams:
    t: float
    k: Optional[int] = 1  # None = repeat until the continuing mass vanishes

    def __post_init__(self) -> None:
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"transmission t must lie in [0, 1], got {self.t}")
        if self.k is None:
            if self.t >= 1.0:
                raise ValueError("the unbounded protocol never terminates at t = 1")
        elif self.k < 1:
            raise ValueError(f"stage count k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class DistillationResult:
    status: DistillStatus
    stages_used: int
    probability: float
    post_state: Optional[LabeledFockState] = None
    sign: Optional[str] = None
    reason: str = ""


def p_dist(t: Number, k: Optional[int]) -> Number:
    """Conditional success ``4t(1 - t^(2k)) / (3(1 + t))``; ``k=None`` is the k -> inf limit.

    Exact when ``t`` is a :class:`~fractions.Fraction`.
    """
    if not 0 <= t <= 1:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if k is not None and (not isinstance(k, int) or k < 1):
        raise ValueError(f"k must be a positive integer or None, got {k!r}")
    if k is None:
        if t == 1:
            raise ValueError("the k -> inf limit is taken before t -> 1; use p_dist_limit()")
        return 4 * t / (3 * (1 + t))
    return 4 * t * (1 - t ** (2 * k)) / (3 * (1 + t))


def p_dist_limit() -> Fraction:
    """``lim_{t->1} lim_{k->inf} p_dist`` = 2/3."""
    return Fraction(2, 3)


def stage_success(t: Number, j: int) -> Number:
    """Unconditional success probability of stage ``j`` (1-based)."""
    return Fraction(4, 3) * t ** (2 * j - 1) * (1 - t)


def total_success_probability(variant: str) -> Fraction:
    """Gate success for ``direct``, ``one-stage`` (t = 1/2, k = 1) or ``full`` distillation."""
    cls = EXACT_CLASS_PROBABILITIES
    direct = cls[OutcomeClass.ODD] + cls[OutcomeClass.FOUR_SUCCESS]
    two = cls[OutcomeClass.TWO_DISTILLABLE]
    if variant == "direct":
        return direct
    if variant == "one-stage":
        return direct + two * p_dist(Fraction(1, 2), 1)
    if variant == "full":
        return direct + two * p_dist_limit()
    raise ValueError(f"unknown gate variant {variant!r}")


# -- branch-level protocol -----------------------------------------------------

_R2 = math.sqrt(2.0)
_PAIR_FORM = (0, 0, 2, 2)     # L0 term, modes (2, 3, 6, 8)
_SINGLE_FORM = (1, 1, 0, 2)   # L1 term after the 6 <-> 8 swap


def standard_form(o: BoostedOutcome) -> LabeledFockState:
    """The outcome's post-state with the photon pair of the L1 term in mode 8."""
    if o.outcome_class is not OutcomeClass.TWO_DISTILLABLE:
        raise ValueError(f"distillation needs a two-distillable outcome, got {o.outcome_class.value}")
    state = o.post_state.reordered((2, 3, 6, 8))
    if o.two_photon_form == "mode6":
        state = swap_modes(state, 6, 8)
    return state


def _branches(state: LabeledFockState):
    by_occ = {occ: (label, amp) for (label, occ), amp in state.terms.items()}
    if set(by_occ) != {_PAIR_FORM, _SINGLE_FORM} or len(state.terms) != 2:
        raise ValueError(f"state is not of the distillable form: {state!r}")
    return by_occ[_PAIR_FORM], by_occ[_SINGLE_FORM]


def distilled_target(sign: str, labels) -> LabeledFockState:
    """``(|L0>|0_2 1_6> +/- |L1>|1_2 0_6>)/sqrt2``."""
    s = 1.0 if sign == "+" else -1.0
    return LabeledFockState((2, 6), {(labels[0], (0, 1)): 1 / _R2, (labels[1], (1, 0)): s / _R2})


def distill(o: BoostedOutcome, p: DistillationParams) -> list[DistillationResult]:
    """All terminal branches of at most ``p.k`` stages.

    Probabilities are conditional on ``o``.  Results come per stage in the
    order success, fail; a final ``EXHAUSTED`` entry carries any mass still
    continuing after the last stage.
    """
    (l0, a0), (l1, a1) = _branches(standard_form(o))
    m0, m1 = abs(a0) ** 2, abs(a1) ** 2
    t = p.t
    cont = t * t
    herald = (2 * t * (1 - t), t * (1 - t))
    fail = ((1 - t) ** 2, 1 - t)
    results = []
    j = 0
    while p.k is None or j < p.k:
        j += 1
        # herald amplitudes: a0 sqrt(2t(1-t)), a1 sqrt(t(1-t)) -> equal when |a1|^2 = 2|a0|^2
        h0, h1 = a0 * math.sqrt(herald[0]), a1 * math.sqrt(herald[1])
        p_succ = abs(h0) ** 2 + abs(h1) ** 2
        if p_succ > 0:
            post = LabeledFockState((2, 6), {(l0, (0, 1)): h0, (l1, (1, 0)): h1}).normalized()
            ratio = (h1 / h0) if h0 != 0 else 0
            sign = "+" if ratio.real >= 0 else "-"
            results.append(DistillationResult(DistillStatus.SUCCESS, j, p_succ, post, sign))
        p_fail = m0 * fail[0] + m1 * fail[1]
        if p_fail > 0:
            results.append(DistillationResult(
                DistillStatus.FAIL, j, p_fail, reason="two photons tapped or photon lost"))
        a0, a1 = a0 * math.sqrt(cont), a1 * math.sqrt(cont)
        m0, m1 = abs(a0) ** 2, abs(a1) ** 2
        if p.k is None and m0 + m1 < UNBOUNDED_MASS_TOL:
            break
        if cont == 0.0:
            break
    rest = m0 + m1
    if rest > 0:
        state = LabeledFockState((2, 3, 6, 8), {(l0, _PAIR_FORM): a0, (l1, _SINGLE_FORM): a1}).normalized()
        results.append(DistillationResult(DistillStatus.EXHAUSTED, j, rest, state))
    return results


def mass(results: Sequence[DistillationResult], status: DistillStatus) -> float:
    return sum(r.probability for r in results if r.status is status)


def distill_contribution(outcomes: Sequence[BoostedOutcome], p: DistillationParams) -> float:
    """Unconditional success mass added by distilling every two-photon outcome."""
    total = 0.0
    for o in outcomes:
        if o.outcome_class is OutcomeClass.TWO_DISTILLABLE:
            total += o.probability * mass(distill(o, p), DistillStatus.SUCCESS)
    return total


def success_fidelity(r: DistillationResult, labels) -> float:
    return fidelity(r.post_state, distilled_target(r.sign, labels))
