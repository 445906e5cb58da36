"""Acceptance gate: one test and one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from boostfuse.calibration import calibrate_part2_circuit, verify_circuit, verify_kraus_outcomes
from boostfuse.detection import enumerate_outcomes
from boostfuse.distillation import (DistillationParams, DistillStatus, distill,
                                    distill_contribution, mass, p_dist, success_fidelity,
                                    total_success_probability)
from boostfuse.fock import LabeledFockState, LabelPair, fidelity, make_dual_rail_pair
from boostfuse.fusion_boosted import (CLASS_PROBABILITIES, MEASURED, OutcomeClass, boosted_fuse,
                                      class_totals, convert_two_qubit_to_fusion, full_input,
                                      rebalance_four_photon, two_qubit_target)
from boostfuse.fusion_standard import (StandardKind, fused_pair_state, success_probability,
                                       type1_fuse, type1_fuse_kraus)
from boostfuse.interferometer import (BeamSplitter, Circuit, PhaseShift, apply_circuit,
                                      circuit_to_matrix)
from boostfuse.resources import PUBLISHED_TABLE, table_checks
from oracles import expand_polynomial, fock_basis

A0B0, A0B1, A1B0, A1B1 = LabelPair(0, 0), LabelPair(0, 1), LabelPair(1, 0), LabelPair(1, 1)


def _emit(line: str, capsys=None) -> None:
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)


def verdict(n: int, title: str, failures: list[str], capsys=None) -> bool:
    ok = not failures
    detail = "" if ok else ": " + "; ".join(failures)
    _emit(f"{'PASS' if ok else 'FAIL'} criterion {n} ({title}){detail}", capsys)
    return ok


# -- checks ---------------------------------------------------------------------


def check_1() -> list[str]:
    bad = []
    s = make_dual_rail_pair()
    circ, kraus = type1_fuse(s), type1_fuse_kraus(s)
    if abs(success_probability(circ) - 0.5) >= 1e-12:
        bad.append(f"success probability {success_probability(circ)!r}")
    for o in circ:
        if o.kind is StandardKind.SUCCESS:
            if fidelity(o.post_state, fused_pair_state(o.sign, (2, 3), (A0B0, A1B1))) <= 1 - 1e-10:
                bad.append(f"success {o.pattern} fidelity")
        else:
            # zero photons leave A1B0 with both photons; two photons leave A0B1 empty
            want = (LabeledFockState.basis((2, 3), (1, 1), A1B0) if o.kind is StandardKind.FAIL_ZERO
                    else LabeledFockState.basis((2, 3), (0, 0), A0B1))
            if fidelity(o.post_state, want) <= 1 - 1e-10:
                bad.append(f"failure remainder {o.pattern}")
    kinds = {k: sum(o.probability for o in circ if o.kind is k) for k in StandardKind}
    for k, want in ((StandardKind.FAIL_ZERO, 0.25), (StandardKind.FAIL_TWO, 0.25)):
        if abs(kinds[k] - want) >= 1e-12:
            bad.append(f"{k.value} total {kinds[k]}")
    kmap = {o.pattern: o for o in kraus}
    if {o.pattern for o in circ} != set(kmap):
        bad.append("circuit and Kraus paths list different patterns")
    for o in circ:
        other = kmap.get(o.pattern)
        if other is None or other.kind is not o.kind or abs(other.probability - o.probability) >= 1e-12 \
                or fidelity(other.post_state, o.post_state) <= 1 - 1e-12:
            bad.append(f"paths disagree on {o.pattern}")
    return bad


def check_2() -> list[str]:
    totals = class_totals(boosted_fuse(make_dual_rail_pair()))
    bad = [f"{c.value} = {totals[c]!r}, want {w}" for c, w in CLASS_PROBABILITIES.items()
           if abs(totals[c] - w) >= 1e-12]
    if abs(sum(totals.values()) - 1) >= 1e-12:
        bad.append(f"sum = {sum(totals.values())!r}")
    return bad


def check_3() -> list[str]:
    bad = []
    four = [o for o in boosted_fuse(make_dual_rail_pair()) if o.outcome_class is OutcomeClass.FOUR_SUCCESS]
    if len(four) != 4:
        bad.append(f"{len(four)} four-success branches")
    for o in four:
        r = rebalance_four_photon(o)
        if fidelity(r.post_state, two_qubit_target(r.sign, (A0B1, A1B0))) <= 1 - 1e-10:
            bad.append(f"rebalanced branch {o.variant} fidelity")
        conv = convert_two_qubit_to_fusion(r)
        if any(c.kind is not StandardKind.SUCCESS for c in conv):
            bad.append(f"conversion of {o.variant} produced a non-success outcome")
        total = sum(c.probability for c in conv) / r.probability
        if abs(total - 1) >= 1e-12:
            bad.append(f"conversion probability {total!r} for {o.variant}")
        for c in conv:
            if fidelity(c.post_state, fused_pair_state(c.sign, c.post_state.mode_names, (A0B1, A1B0))) <= 1 - 1e-10:
                bad.append(f"converted state {o.variant} fidelity")
    return bad


def check_4() -> list[str]:
    bad = []
    two = [o for o in boosted_fuse(make_dual_rail_pair()) if o.outcome_class is OutcomeClass.TWO_DISTILLABLE]
    for t in (0.25, 0.5, 0.75, 0.9):
        for k in (1, 2, 3, 5, 10):
            want = 4 * t * (1 - t ** (2 * k)) / (3 * (1 + t))
            for o in two:
                res = distill(o, DistillationParams(t, k))
                if abs(mass(res, DistillStatus.SUCCESS) - want) >= 1e-9:
                    bad.append(f"success mass at t={t}, k={k}")
                if any(success_fidelity(r, (A0B1, A1B0)) <= 1 - 1e-10
                       for r in res if r.status is DistillStatus.SUCCESS):
                    bad.append(f"success state at t={t}, k={k}")
    if Fraction(3, 16) * p_dist(Fraction(1, 2), 1) != Fraction(1, 16):
        bad.append("exact one-stage contribution is not 1/16")
    c = distill_contribution(two, DistillationParams(0.5, 1))
    if abs(c - 1 / 16) >= 1e-12:
        bad.append(f"enumerated one-stage contribution {c!r}")
    c = distill_contribution(two, DistillationParams(0.999, 200))
    if abs(c - 1 / 8) >= 0.002:
        bad.append(f"t=0.999, k=200 contribution {c:.6f} is {abs(c - 1 / 8):.4f} from 1/8 "
                   f"(closed form {3 / 16 * p_dist(0.999, 200):.6f}; t^(2k) = {0.999 ** 400:.3f})")
    for variant, want in (("direct", Fraction(5, 8)), ("one-stage", Fraction(11, 16)),
                          ("full", Fraction(3, 4))):
        if total_success_probability(variant) != want:
            bad.append(f"{variant} total {total_success_probability(variant)}")
    return bad


def check_5() -> list[str]:
    t0 = time.perf_counter()
    checks = table_checks()
    elapsed = time.perf_counter() - t0
    bad = [f"{c.scheme}/{c.gate}: {c.exact} = {float(c.exact):.4f} rounds to {c.rounded}, published {c.published}"
           for c in checks if not c.passed]
    if len(checks) != len(PUBLISHED_TABLE):
        bad.append("missing table cells")
    if elapsed >= 1.0:
        bad.append(f"runtime {elapsed:.2f} s")
    return bad


def _random_circuit(rng, n_modes):
    modes = list(range(1, n_modes + 1))
    els = []
    for _ in range(int(rng.integers(0, 9))):
        if n_modes > 1 and rng.random() < 0.7:
            i, j = rng.choice(modes, 2, replace=False)
            t = None if rng.random() < 0.5 else float(rng.uniform(0.01, 1))
            els.append(BeamSplitter(int(i), int(j), t))
        else:
            els.append(PhaseShift(int(rng.choice(modes)), float(rng.uniform(0, 2 * math.pi))))
    return Circuit(els)


def check_6() -> list[str]:
    bad = []
    rng = np.random.default_rng(2024)
    # (a) conservation and norm under random circuits
    for trial in range(1000):
        n_modes = int(rng.integers(1, 7))
        n = int(rng.integers(0, 5))
        occ = [0] * n_modes
        for m in rng.integers(0, n_modes, size=n):
            occ[m] += 1
        modes = tuple(range(1, n_modes + 1))
        s = LabeledFockState(modes, {(A0B0, tuple(occ)): 0.6, (A1B1, tuple(reversed(occ))): 0.8})
        out = apply_circuit(s, _random_circuit(rng, n_modes))
        if out.photon_numbers() - {n} or abs(out.norm() - 1) >= 1e-12:
            bad.append(f"(a) trial {trial}")
            break
    # (b) completeness of every measured scenario in the suite
    pair = make_dual_rail_pair()
    scenarios = {
        "standard": (apply_circuit(pair, Circuit([BeamSplitter(1, 4)])), (1, 4)),
        "boosted reference": (apply_circuit(full_input(pair), calibrate_part2_circuit().circuit), MEASURED),
        "boosted BS(1,4)": (apply_circuit(full_input(pair), Circuit([BeamSplitter(1, 4)])), MEASURED),
        "boosted unprepared": (apply_circuit(
            full_input(pair, LabeledFockState.basis((5, 6, 7, 8), (1, 1, 1, 1))),
            Circuit([BeamSplitter(1, 4)])), MEASURED),
    }
    for o in boosted_fuse(pair):
        if o.outcome_class is OutcomeClass.FOUR_SUCCESS:
            r = rebalance_four_photon(o)
            scenarios[f"X conversion {o.variant}"] = (
                apply_circuit(r.post_state, Circuit([BeamSplitter(3, 8)])), (3, 8))
    for name, (state, measured) in scenarios.items():
        total = sum(m.probability for m in enumerate_outcomes(state, measured))
        if abs(total - 1) >= 1e-10:
            bad.append(f"(b) {name} sums to {total!r}")
    if abs(sum(o.probability for o in boosted_fuse(pair)) - 1) >= 1e-10:
        bad.append("(b) Kraus instrument")
    # (c) brute-force oracle on all basis states up to 4 modes and 4 photons
    for n_modes in range(1, 5):
        modes = tuple(range(1, n_modes + 1))
        for _ in range(5):
            c = _random_circuit(rng, n_modes)
            u = circuit_to_matrix(c, modes)
            for n in range(5):
                for occ in fock_basis(n_modes, n):
                    got = apply_circuit(LabeledFockState.basis(modes, occ), c)
                    want = expand_polynomial(u, occ)
                    keys = {o for _, o in got.terms} | set(want)
                    if any(abs(got.amplitude(None, o) - want.get(o, 0)) >= 1e-12 for o in keys):
                        bad.append(f"(c) {n_modes} modes, {occ}")
    # (d) distillation bookkeeping
    two = [o for o in boosted_fuse(pair) if o.outcome_class is OutcomeClass.TWO_DISTILLABLE]
    for t in (0.25, 0.5, 0.75, 0.9):
        for k in (1, 2, 3, 5, 10):
            for o in two:
                res = distill(o, DistillationParams(t, k))
                if abs(sum(r.probability for r in res) - 1) >= 1e-12:
                    bad.append(f"(d) t={t}, k={k}")
    return bad


def check_7() -> list[str]:
    bad = []
    if not verify_kraus_outcomes(boosted_fuse(make_dual_rail_pair())).accepted:
        bad.append("verifier rejects the Kraus reference statistics")
    if verify_circuit(Circuit([BeamSplitter(1, 4)])).accepted:
        bad.append("verifier accepts BS(1,4) alone")
    result = calibrate_part2_circuit()
    if result.found:
        if not verify_circuit(result.circuit).accepted:
            bad.append("search returned an unverified circuit")
    elif not result.to_text().startswith("# no-match"):
        bad.append("search ended without a match or a no-match report")
    if calibrate_part2_circuit().to_text() != result.to_text():
        bad.append("search is not deterministic")
    return bad


CRITERIA = [
    (1, "standard gate", check_1),
    (2, "boosted class probabilities", check_2),
    (3, "rebalancing and X conversion", check_3),
    (4, "distillation", check_4),
    (5, "photon-cost table", check_5),
    (6, "property suites", check_6),
    (7, "calibration verifier", check_7),
]


@pytest.mark.parametrize("n, title, check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(n, title, check, capsys):
    failures = check()
    verdict(n, title, failures, capsys)
    assert not failures, failures


if __name__ == "__main__":
    results = [verdict(n, title, check()) for n, title, check in CRITERIA]
    sys.exit(0 if all(results) else 1)
