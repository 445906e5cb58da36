"""Single-photon-boosted type-I fusion.

Part (I) turns four ancilla photons on modes 5-8 into two HOM pairs
``(|20> - |02>)/sqrt(2)`` on (5, 6) and (7, 8).  Part (II) interferes modes
1, 4, 5, 7 and detects them.  Because part (II) only mixes the measured
modes and conserves photon number, the total detected count ``n_d`` is fixed
by which input term a pattern came from: odd for ``A0B0``/``A1B1``, even for
``A0B1``/``A1B0``.

The gate is defined here by its class-level instrument: a list of effective
bras on the *pre-part-II* occupations of modes (1, 4, 5, 7), one per outcome
class and sign variant.  Their weights make the instrument complete on the
sixteen occupations the input can reach (see :func:`instrument_gram`), so all
class probabilities follow from contracting the actual state, not from a
lookup table.  Pattern-level structure only exists in circuit mode
(:mod:`boostfuse.calibration`).

Remaining modes after detection are ordered (2, 3, 6, 8).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .detection import apply_kraus, enumerate_outcomes
from .fock import LabeledFockState, discard_modes, fidelity, tensor
from .fusion_standard import (StandardFusionOutcome, StandardKind,
                              check_dual_rail_input)
from .interferometer import BeamSplitter, Circuit, PhaseShift, apply_circuit, apply_element

MEASURED = (1, 4, 5, 7)
OUTPUT_MODES = (2, 3, 6, 8)
ANCILLA_MODES = (5, 6, 7, 8)
ANCILLA_PHOTONS = 4
PART1_CIRCUIT = Circuit([BeamSplitter(5, 6), BeamSplitter(7, 8)])

FIDELITY_TOL = 1e-10
_R2 = math.sqrt(2.0)
_R3 = math.sqrt(3.0)


class OutcomeClass(enum.Enum):
    ODD = "odd"
    FOUR_SUCCESS = "four-success"
    FOUR_FAIL = "four-fail"
    TWO_DISTILLABLE = "two-distillable"
    ZERO_FAIL = "zero-fail"
    SIX_FAIL = "six-fail"


# Class totals for inputs of the dual-rail pair form.
EXACT_CLASS_PROBABILITIES = {
    OutcomeClass.ODD: Fraction(1, 2),
    OutcomeClass.FOUR_SUCCESS: Fraction(1, 8),
    OutcomeClass.FOUR_FAIL: Fraction(1, 16),
    OutcomeClass.TWO_DISTILLABLE: Fraction(3, 16),
    OutcomeClass.ZERO_FAIL: Fraction(1, 16),
    OutcomeClass.SIX_FAIL: Fraction(1, 16),
}
CLASS_PROBABILITIES = {c: float(p) for c, p in EXACT_CLASS_PROBABILITIES.items()}

FOUR_SUCCESS_WEIGHTS = (1 / _R2, 1 / 2, 1 / (2 * _R2))
TWO_DISTILLABLE_WEIGHTS = (_R3 / 2, _R3 / (2 * _R2))
ODD_PATTERN_WEIGHTS = (1 / 2, _R3 / 4, _R2 / 4, 1 / 4, math.sqrt(6) / 8, _R3 / 8, _R2 / 8)


@dataclass(frozen=True)
class KrausElement:
    """One effective bra ``weight * sum_k c_k <<n_k|`` on modes (1, 4, 5, 7)."""

    outcome_class: OutcomeClass
    variant: tuple[str, ...]
    weight: float
    bra: tuple[tuple[tuple[int, int, int, int], float], ...]
    two_photon_form: Optional[str] = None

    def scaled_bra(self) -> list[tuple[tuple[int, ...], float]]:
        return [(occ, self.weight * c) for occ, c in self.bra]


@dataclass(frozen=True)
class BoostedOutcome:
    outcome_class: OutcomeClass
    sign: Optional[str]
    weight: float
    probability: float
    post_state: LabeledFockState
    two_photon_form: Optional[str] = None
    coupling_sign: Optional[str] = None
    variant: tuple[str, ...] = ()
    rebalanced: bool = False
    n_detected: Optional[int] = None


def _pm(s: str) -> float:
    return 1.0 if s == "+" else -1.0


def kraus_family() -> list[KrausElement]:
    """The class-level instrument, in a fixed order.

    Odd events carry ``(<<10| +/- <<01|)`` on modes (1, 4) times a by-product
    bra on (5, 7).  The four-photon success bras use independent signs on
    their two halves: the tied-sign pair alone has a Gram matrix with
    eigenvalue 3/2, so it cannot reach probability 1/8 inside a valid
    instrument, while the four sign combinations tile the subspace exactly.
    The residual of that subspace is the four-photon failure.  The two
    two-photon families differ in which of modes 5/7 holds the photon pair.
    """
    els: list[KrausElement] = []
    r = 1 / _R2
    for ex in ((0, 0), (0, 2), (2, 0), (2, 2)):
        for s in "+-":
            els.append(KrausElement(
                OutcomeClass.ODD, (s, f"ex{ex[0]}{ex[1]}"), r,
                (((1, 0) + ex, 1.0), ((0, 1) + ex, _pm(s))),
            ))
    for s1 in "+-":
        for s2 in "+-":
            els.append(KrausElement(
                OutcomeClass.FOUR_SUCCESS, (s1, s2), 1 / _R2,
                (((1, 1, 2, 0), 0.5), ((1, 1, 0, 2), 0.5 * _pm(s1)),
                 ((0, 0, 2, 2), _pm(s2) / _R2)),
            ))
    for occ in ((1, 1, 2, 0), (1, 1, 0, 2)):
        els.append(KrausElement(OutcomeClass.FOUR_FAIL, (), 1 / _R2, ((occ, 1.0),)))
    for form, pair in (("mode6", (0, 0, 0, 2)), ("mode8", (0, 0, 2, 0))):
        for s in "+-":
            els.append(KrausElement(
                OutcomeClass.TWO_DISTILLABLE, (s,), _R3 / 2,
                ((pair, _R2 / _R3), ((1, 1, 0, 0), _pm(s) / _R3)),
                two_photon_form=form,
            ))
    els.append(KrausElement(OutcomeClass.ZERO_FAIL, (), 1.0, (((0, 0, 0, 0), 1.0),)))
    els.append(KrausElement(OutcomeClass.SIX_FAIL, (), 1.0, (((1, 1, 2, 2), 1.0),)))
    return els


def reachable_occupations() -> list[tuple[int, int, int, int]]:
    """Occupations of modes (1, 4, 5, 7) present in the pre-part-II state."""
    return sorted(
        (n1, n4, n5, n7)
        for n1, n4 in ((1, 0), (1, 1), (0, 0), (0, 1))
        for n5, n7 in ((2, 2), (2, 0), (0, 2), (0, 0))
    )


def instrument_gram(family: Sequence[KrausElement] | None = None) -> np.ndarray:
    """``sum_K K^dag K`` restricted to :func:`reachable_occupations`."""
    family = kraus_family() if family is None else family
    basis = reachable_occupations()
    index = {occ: k for k, occ in enumerate(basis)}
    g = np.zeros((len(basis), len(basis)), dtype=complex)
    for el in family:
        v = np.zeros(len(basis), dtype=complex)
        for occ, c in el.scaled_bra():
            v[index[tuple(occ)]] += c
        g += np.outer(v.conj(), v)
    return g


def prepare_ancilla() -> LabeledFockState:
    """Part (I): ``|1111>`` on modes 5-8 through ``BS(5,6)`` and ``BS(7,8)``."""
    return apply_circuit(LabeledFockState.basis(ANCILLA_MODES, (1, 1, 1, 1)), PART1_CIRCUIT)


def full_input(s: LabeledFockState, ancilla: Optional[LabeledFockState] = None) -> LabeledFockState:
    return tensor(s, prepare_ancilla() if ancilla is None else ancilla)


# -- post-state forms ---------------------------------------------------------


def _relative_signs(post: LabeledFockState, template, tol: float = FIDELITY_TOL):
    """Match ``post`` against ``sum_k s_k m_k |L_k, occ_k>`` with real signs.

    ``template`` lists ``(occupation, magnitude, label_group)``; terms in the
    same group must share a label and different groups must differ.  Returns
    the signs of terms 1.. relative to term 0, or ``None``.
    """
    if len(post.terms) != len(template):
        return None
    by_occ = {}
    for (label, occ), amp in post.terms.items():
        if occ in by_occ:
            return None
        by_occ[occ] = (label, amp)
    labels: dict[int, object] = {}
    ref = None
    signs = []
    for k, (occ, mag, group) in enumerate(template):
        if occ not in by_occ:
            return None
        label, amp = by_occ[occ]
        if abs(abs(amp) - mag) > 1e-9:
            return None
        if group in labels and labels[group] != label:
            return None
        labels[group] = label
        if ref is None:
            ref = amp
            continue
        ratio = amp / ref * (template[0][1] / mag)
        if abs(ratio.imag) > 1e-9 or abs(abs(ratio.real) - 1) > 1e-9:
            return None
        signs.append("+" if ratio.real > 0 else "-")
    if len(set(labels.values())) != len(labels):
        return None
    return tuple(signs)


def odd_factor(post: LabeledFockState, tol: float = 1e-9):
    """Split an odd-class post-state into ``(sign, by-product state on (6, 8))``.

    Succeeds when ``post = (|L0>|0_2 1_3> +/- |L1>|1_2 0_3>)/sqrt(2) (x) phi``
    for some normalized ``phi`` on modes 6 and 8.
    """
    post = post.reordered(OUTPUT_MODES)
    rows: dict = {}
    for (label, occ), amp in post.terms.items():
        rows.setdefault((label, occ[:2]), {})[occ[2:]] = amp
    zero = [k for k in rows if k[1] == (0, 1)]
    one = [k for k in rows if k[1] == (1, 0)]
    if len(rows) != 2 or len(zero) != 1 or len(one) != 1 or zero[0][0] == one[0][0]:
        return None
    r0, r1 = rows[zero[0]], rows[one[0]]
    if set(r0) != set(r1):
        return None
    cols = sorted(r0)
    v0 = np.array([r0[c] for c in cols])
    v1 = np.array([r1[c] for c in cols])
    if abs(np.linalg.norm(v0) ** 2 - 0.5) > tol or abs(np.linalg.norm(v1) ** 2 - 0.5) > tol:
        return None
    for sign in "+-":
        if np.allclose(v1, _pm(sign) * v0, atol=tol):
            phi = LabeledFockState((6, 8), {(None, c): _R2 * a for c, a in zip(cols, v0)})
            return sign, phi
    return None


def classify_post_state(n_detected: int, post: LabeledFockState):
    """Assign a post-state on (2, 3, 6, 8) to an outcome class.

    Returns ``(class, info)`` where ``info`` holds the signs and two-photon
    form, or ``(None, {})`` when the state matches none of the gate's forms.
    """
    post = post.reordered(OUTPUT_MODES)
    if n_detected % 2 == 1:
        found = odd_factor(post)
        if found is None:
            return None, {}
        return OutcomeClass.ODD, {"sign": found[0], "byproduct": found[1]}
    if n_detected == 0 and _single(post, (1, 1, 2, 2)):
        return OutcomeClass.ZERO_FAIL, {}
    if n_detected == 6 and _single(post, (0, 0, 0, 0)):
        return OutcomeClass.SIX_FAIL, {}
    if n_detected == 4:
        signs = _relative_signs(post, [
            ((0, 0, 0, 2), 0.5, 0), ((0, 0, 2, 0), 0.5, 0), ((1, 1, 0, 0), 1 / _R2, 1)])
        if signs is not None:
            return OutcomeClass.FOUR_SUCCESS, {"sign": signs[0], "coupling_sign": signs[1]}
        if len(post.labels()) == 1:
            return OutcomeClass.FOUR_FAIL, {}
    if n_detected == 2:
        for form, occ in (("mode6", (1, 1, 2, 0)), ("mode8", (1, 1, 0, 2))):
            signs = _relative_signs(post, [((0, 0, 2, 2), 1 / _R3, 0), (occ, _R2 / _R3, 1)])
            if signs is not None:
                return OutcomeClass.TWO_DISTILLABLE, {"sign": signs[0], "two_photon_form": form}
    return None, {}


def _single(post: LabeledFockState, occ) -> bool:
    return len(post.terms) == 1 and next(iter(post.terms))[1] == tuple(occ)


# -- gate ----------------------------------------------------------------------


def boosted_fuse(s: LabeledFockState, ancilla: Optional[LabeledFockState] = None,
                 ) -> list[BoostedOutcome]:
    """Apply the class-level instrument to ``s`` and the prepared ancilla.

    Zero-probability elements are omitted, so a wrong ``ancilla`` shows up as
    missing probability mass rather than an exception.
    """
    check_dual_rail_input(s)
    if tuple(s.mode_names) != (1, 2, 3, 4):
        raise ValueError(f"expected modes (1, 2, 3, 4), got {s.mode_names}")
    state = full_input(s, ancilla)
    outcomes = []
    for el in kraus_family():
        p, post = apply_kraus(state, el.scaled_bra(), MEASURED)
        if post is None:
            continue
        post = post.reordered(OUTPUT_MODES)
        n_d = sum(el.bra[0][0])
        cls, info = classify_post_state(n_d, post)
        if cls is not el.outcome_class:
            raise ValueError(
                f"{el.outcome_class.value} element {el.variant} produced a post-state "
                f"outside its class: {post!r}"
            )
        outcomes.append(BoostedOutcome(
            outcome_class=cls,
            sign=info.get("sign"),
            weight=el.weight,
            probability=p,
            post_state=post,
            two_photon_form=info.get("two_photon_form"),
            coupling_sign=info.get("coupling_sign"),
            variant=el.variant,
            n_detected=n_d,
        ))
    return outcomes


def class_totals(outcomes: Sequence[BoostedOutcome]) -> dict[OutcomeClass, float]:
    totals = {c: 0.0 for c in OutcomeClass}
    for o in outcomes:
        totals[o.outcome_class] += o.probability
    return totals


def direct_success_probability(outcomes: Sequence[BoostedOutcome]) -> float:
    t = class_totals(outcomes)
    return t[OutcomeClass.ODD] + t[OutcomeClass.FOUR_SUCCESS]


def strip_byproducts(o: BoostedOutcome) -> LabeledFockState:
    """Odd-class output on modes (2, 3) once the fixed modes 6, 8 are dropped."""
    if o.outcome_class is not OutcomeClass.ODD:
        raise ValueError("only odd-class outcomes have discardable by-products")
    return discard_modes(o.post_state, (6, 8))


# -- four-photon branch --------------------------------------------------------


def two_qubit_target(sign: str, labels) -> LabeledFockState:
    """``(|L0>|0011> +/- |L1>|1100>)/sqrt(2)`` on modes (2, 3, 6, 8)."""
    return LabeledFockState(OUTPUT_MODES, {
        (labels[0], (0, 0, 1, 1)): 1 / _R2,
        (labels[1], (1, 1, 0, 0)): _pm(sign) / _R2,
    })


def rebalance_four_photon(o: BoostedOutcome) -> BoostedOutcome:
    """Balanced BS on modes 6, 8, preceded by a pi/2 phase on mode 6 if needed.

    The BS maps ``|02> - |20>`` to ``-sqrt(2)|11>`` but leaves ``|02> + |20>``
    in the two-photon sector; the phase flips ``|20>`` to reach the former.
    """
    if o.outcome_class is not OutcomeClass.FOUR_SUCCESS:
        raise ValueError(f"rebalancing needs a four-success outcome, got {o.outcome_class.value}")
    if o.rebalanced:
        raise ValueError("outcome already rebalanced")
    state = o.post_state
    if o.sign == "+":
        state = apply_element(state, PhaseShift(6, math.pi / 2))
    state = apply_element(state, BeamSplitter(6, 8)).reordered(OUTPUT_MODES)
    signs = _relative_signs(state, [((0, 0, 1, 1), 1 / _R2, 0), ((1, 1, 0, 0), 1 / _R2, 1)])
    if signs is None:
        raise ValueError(f"rebalanced state is not a two-qubit output: {state!r}")
    return replace(o, post_state=state, sign=signs[0], coupling_sign=None, rebalanced=True)


def convert_two_qubit_to_fusion(o: BoostedOutcome, measure_qubit: tuple[int, int] = (3, 8),
                                ) -> list[StandardFusionOutcome]:
    """Measure one output qubit in the X basis.

    The two dual-rail qubits of the rebalanced output are modes (2, 6) and
    (3, 8).  Measuring either leaves a single fused qubit on the other pair;
    both X results herald success, each with half of ``o.probability``.
    """
    if o.outcome_class is not OutcomeClass.FOUR_SUCCESS or not o.rebalanced:
        raise ValueError("conversion needs a rebalanced four-success outcome")
    pair = tuple(measure_qubit)
    if pair not in ((2, 6), (3, 8)):
        raise ValueError(
            f"modes {pair} are not a dual-rail qubit of the output; use (2, 6) or (3, 8)"
        )
    check_dual_rail_input(o.post_state, qubits=(pair,))
    remaining = (2, 6) if pair == (3, 8) else (3, 8)
    state = apply_element(o.post_state, BeamSplitter(*pair))
    results = []
    for m in enumerate_outcomes(state, pair):
        post = m.post_state.reordered(remaining)
        signs = _relative_signs(post, [((0, 1), 1 / _R2, 0), ((1, 0), 1 / _R2, 1)])
        if sum(m.pattern) != 1 or signs is None:
            raise ValueError(f"unexpected X-measurement result {m.pattern}: {post!r}")
        results.append(StandardFusionOutcome(
            StandardKind.SUCCESS, signs[0], o.probability * m.probability, post, m.pattern))
    return results
