import json
import math

import pytest

from boostfuse.calibration import REFERENCE_PART2_CIRCUIT as REFERENCE
from boostfuse.detection import apply_kraus, enumerate_outcomes, outcome_records, outcome_table
from boostfuse.fock import LabeledFockState, LabelPair, make_dual_rail_pair
from boostfuse.fusion_boosted import MEASURED, full_input
from boostfuse.fusion_standard import STANDARD_CIRCUIT, fused_pair_state
from boostfuse.interferometer import apply_circuit


def standard_output():
    return apply_circuit(make_dual_rail_pair(), STANDARD_CIRCUIT)


def test_standard_patterns():
    outs = enumerate_outcomes(standard_output(), (1, 4))
    got = {o.pattern: o.probability for o in outs}
    want = {(0, 0): 1 / 4, (0, 1): 1 / 4, (0, 2): 1 / 8, (1, 0): 1 / 4, (2, 0): 1 / 8}
    assert got.keys() == want.keys()
    for k in want:
        assert got[k] == pytest.approx(want[k], abs=1e-12)
    assert [o.pattern for o in outs] == sorted(want)
    for o in outs:
        assert o.post_state.mode_names == (2, 3)
        assert o.post_state.is_normalized()


def test_vacuum_mode_measurement():
    s = LabeledFockState((1, 2), {(LabelPair(0, 0), (1, 0)): 0.6, (LabelPair(1, 1), (2, 0)): 0.8})
    (o,) = enumerate_outcomes(s, (2,))
    assert o.pattern == (0,) and o.probability == pytest.approx(1)
    assert o.post_state.mode_names == (1,)
    assert o.post_state.amplitude(LabelPair(1, 1), (2,)) == pytest.approx(0.8)


def test_boosted_completeness():
    s = apply_circuit(full_input(make_dual_rail_pair()), REFERENCE)
    outs = enumerate_outcomes(s, MEASURED)
    assert sum(o.probability for o in outs) == pytest.approx(1, abs=1e-10)
    assert all(set(o.post_state.mode_names) == {2, 3, 6, 8} for o in outs)


def test_empty_state_and_repeated_modes():
    with pytest.raises(ValueError):
        enumerate_outcomes(LabeledFockState((1,), {}), (1,))
    with pytest.raises(ValueError):
        enumerate_outcomes(make_dual_rail_pair(), (1, 1))


def test_kraus_success_branch():
    r = 1 / math.sqrt(2)
    p, post = apply_kraus(make_dual_rail_pair(), [((1, 0), r), ((0, 1), r)], (1, 4))
    assert p == pytest.approx(1 / 4, abs=1e-12)
    assert post.isclose(fused_pair_state("+"), 1e-12)


def test_kraus_vacuum_branch():
    # zero photons on (1, 4) selects the term with both photons on modes 2 and 3
    p, post = apply_kraus(make_dual_rail_pair(), [((0, 0), 1.0)], (1, 4))
    assert p == pytest.approx(1 / 4)
    assert post.isclose(LabeledFockState.basis((2, 3), (1, 1), LabelPair(1, 0)))


def test_kraus_orthogonal_bra():
    assert apply_kraus(make_dual_rail_pair(), [((2, 2), 1.0)], (1, 4)) == (0.0, None)
    with pytest.raises(ValueError):
        apply_kraus(make_dual_rail_pair(), [((1, 0, 0), 1.0)], (1, 4))


def test_delta_bra_agrees_with_enumeration():
    s = apply_circuit(full_input(make_dual_rail_pair()), REFERENCE)
    for o in enumerate_outcomes(s, MEASURED):
        p, post = apply_kraus(s, [(o.pattern, 1.0)], MEASURED)
        assert p == pytest.approx(o.probability, abs=1e-12)
        assert post.isclose(o.post_state, 1e-12)


def test_outcome_table_and_records():
    outs = enumerate_outcomes(standard_output(), (1, 4))
    lines = outcome_table(outs).splitlines()
    assert lines[0] == "pattern | probability | post-state-hash"
    assert lines[1].startswith("(0,0) | 0.250000000000 | ")
    recs = json.loads(json.dumps(outcome_records(outs)))
    assert [r["pattern"] for r in recs] == [list(o.pattern) for o in outs]
    assert recs[0]["probability"] == outs[0].probability
