import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boostfuse.fock import LabeledFockState, LabelPair, ModeError, fidelity, make_dual_rail_pair, tensor
from boostfuse.interferometer import (BeamSplitter, Circuit, PhaseShift, apply_circuit,
                                      apply_element, circuit_to_matrix)
from oracles import expand_polynomial, fock_basis, permanent_amplitude

R2 = math.sqrt(2)


def state_on(modes, occ):
    return LabeledFockState.basis(modes, occ)


def test_hom_dip():
    out = apply_element(state_on((1, 2), (1, 1)), BeamSplitter(1, 2))
    want = LabeledFockState((1, 2), {(None, (2, 0)): 1 / R2, (None, (0, 2)): -1 / R2})
    assert out.isclose(want, 1e-14)


def test_single_photon_hadamard():
    out = apply_element(state_on((1, 2), (1, 0)), BeamSplitter(1, 2))
    want = LabeledFockState((1, 2), {(None, (1, 0)): 1 / R2, (None, (0, 1)): 1 / R2})
    assert out.isclose(want, 1e-14)


def test_balanced_bs_is_involution():
    s = LabeledFockState((1, 2), {(None, (2, 1)): 0.6, (None, (1, 2)): 0.8j})
    twice = apply_circuit(s, [BeamSplitter(1, 2), BeamSplitter(1, 2)])
    assert twice.isclose(s, 1e-12)


def test_part1_ancilla():
    out = apply_circuit(state_on((5, 6, 7, 8), (1, 1, 1, 1)), [BeamSplitter(5, 6), BeamSplitter(7, 8)])
    want = LabeledFockState((5, 6, 7, 8), {
        (None, (2, 0, 2, 0)): 0.5, (None, (2, 0, 0, 2)): -0.5,
        (None, (0, 2, 2, 0)): -0.5, (None, (0, 2, 0, 2)): 0.5,
    })
    assert out.isclose(want, 1e-14)


def test_empty_circuit_and_inverse():
    s = LabeledFockState((1, 2, 3), {(LabelPair(0, 0), (1, 1, 0)): 0.6, (LabelPair(1, 1), (0, 1, 2)): 0.8})
    assert apply_circuit(s, Circuit()).isclose(s)
    c = Circuit([BeamSplitter(1, 2, 0.3), PhaseShift(2, 0.4), BeamSplitter(2, 3), PhaseShift(3, 1.1)])
    back = apply_circuit(apply_circuit(s, c), c.inverse())
    assert back.isclose(s, 1e-12)


def test_unknown_mode():
    with pytest.raises(ModeError):
        apply_element(state_on((1, 2), (1, 0)), BeamSplitter(1, 3))
    with pytest.raises(ModeError):
        circuit_to_matrix(Circuit([BeamSplitter(1, 3)]), (1, 2))


def test_matrix_of_elements():
    u = circuit_to_matrix(Circuit([BeamSplitter(1, 2)]), (1, 2))
    assert np.allclose(u, np.array([[1, 1], [1, -1]]) / R2, atol=1e-15)
    assert np.allclose(circuit_to_matrix(Circuit(), (1, 2, 3)), np.eye(3))
    t = 0.3
    u = circuit_to_matrix(Circuit([BeamSplitter(1, 2, t)]), (1, 2))
    r = math.sqrt(1 - t * t)
    assert np.allclose(u, [[t, r], [r, -t]], atol=1e-15)
    u = circuit_to_matrix(Circuit([PhaseShift(2, 0.5)]), (1, 2))
    assert np.allclose(u, np.diag([1, np.exp(0.5j)]))


def test_phase_equality_mod_two_pi():
    assert PhaseShift(1, 0.5).same_as(PhaseShift(1, 0.5 + 4 * math.pi))
    assert not PhaseShift(1, 0.5).same_as(PhaseShift(2, 0.5))


def test_circuit_text_round_trip():
    c = Circuit([BeamSplitter(1, 4), BeamSplitter(5, 6, 0.25), PhaseShift(6, math.pi / 2)])
    text = c.to_text()
    assert text.splitlines()[0] == "BS 1 4"
    assert Circuit.from_text("# part II\n" + text + "\n\n").elements == c.elements
    with pytest.raises(ValueError, match="line 2"):
        Circuit.from_text("BS 1 2\nBS 1\n")


def test_matrix_matches_single_photon_action():
    c = Circuit([BeamSplitter(1, 2), PhaseShift(2, 0.3), BeamSplitter(2, 3, 0.6), BeamSplitter(1, 3)])
    modes = (1, 2, 3)
    u = circuit_to_matrix(c, modes)
    assert np.abs(u.conj().T @ u - np.eye(3)).max() < 1e-12
    for k in range(3):
        occ = tuple(int(i == k) for i in range(3))
        out = apply_circuit(state_on(modes, occ), c)
        for l in range(3):
            assert out.amplitude(None, tuple(int(i == l) for i in range(3))) == pytest.approx(u[l, k], abs=1e-12)


# -- brute-force oracle --------------------------------------------------------


def random_circuit(rng, modes, n_elements):
    els = []
    for _ in range(n_elements):
        if rng.random() < 0.3:
            els.append(PhaseShift(int(rng.choice(modes)), float(rng.uniform(0, 2 * math.pi))))
        else:
            i, j = rng.choice(modes, 2, replace=False)
            t = None if rng.random() < 0.5 else float(rng.uniform(0.05, 1))
            els.append(BeamSplitter(int(i), int(j), t))
    return Circuit(els)


@pytest.mark.parametrize("n_modes", [1, 2, 3, 4])
def test_all_small_basis_states_against_polynomial_oracle(n_modes):
    rng = np.random.default_rng(n_modes)
    modes = tuple(range(1, n_modes + 1))
    circuits = [random_circuit(rng, modes, 6) if n_modes > 1 else Circuit([PhaseShift(1, 0.7)])
                for _ in range(3)]
    for c in circuits:
        u = circuit_to_matrix(c, modes)
        for n in range(5):
            for occ in fock_basis(n_modes, n):
                got = apply_circuit(state_on(modes, occ), c)
                want = expand_polynomial(u, occ)
                keys = {o for _, o in got.terms} | set(want)
                for o in keys:
                    assert abs(got.amplitude(None, o) - want.get(o, 0)) < 1e-12


def test_polynomial_oracle_agrees_with_permanents():
    rng = np.random.default_rng(7)
    modes = (1, 2, 3)
    u = circuit_to_matrix(random_circuit(rng, modes, 5), modes)
    for occ in fock_basis(3, 3):
        poly = expand_polynomial(u, occ)
        for out in fock_basis(3, 3):
            assert abs(poly.get(out, 0) - permanent_amplitude(u, occ, out)) < 1e-12


def test_boosted_input_against_permanents():
    # six photons on eight modes: part I followed by the calibrated part II
    c = Circuit([BeamSplitter(5, 6), BeamSplitter(7, 8), BeamSplitter(1, 4), BeamSplitter(1, 5),
                 BeamSplitter(4, 7)])
    modes = tuple(range(1, 9))
    u = circuit_to_matrix(c, modes)
    occ_in = (1, 0, 0, 1, 1, 1, 1, 1)
    got = apply_circuit(state_on(modes, occ_in), c)
    for (_, occ), amp in itertools.islice(got.sorted_terms(), 40):
        assert abs(amp - permanent_amplitude(u, occ_in, occ)) < 1e-12
    total = tensor(make_dual_rail_pair(), state_on((5, 6, 7, 8), (1, 1, 1, 1)))
    assert apply_circuit(total, c).norm() == pytest.approx(1, abs=1e-12)


# -- random-circuit properties -------------------------------------------------

element = st.one_of(
    st.builds(lambda p, t: BeamSplitter(p[0], p[1], t),
              st.lists(st.integers(1, 6), min_size=2, max_size=2, unique=True),
              st.one_of(st.none(), st.floats(0.01, 1.0))),
    st.builds(PhaseShift, st.integers(1, 6), st.floats(0, 2 * math.pi)),
)
start = st.lists(st.integers(0, 6), min_size=1, max_size=4)  # photon positions, 0 = unused slot


@settings(max_examples=300, deadline=None)
@given(st.lists(element, max_size=8), start)
def test_random_circuits_conserve_photons_and_norm(els, positions):
    modes = tuple(range(1, 7))
    occ = [0] * 6
    for p in positions:
        if p:
            occ[p - 1] += 1
    s = LabeledFockState(modes, {(LabelPair(0, 0), tuple(occ)): 0.6,
                                 (LabelPair(1, 1), tuple(reversed(occ))): 0.8})
    out = apply_circuit(s, Circuit(els))
    assert out.photon_numbers() <= {sum(occ)}
    assert abs(out.norm() - 1) < 1e-12
    assert out.labels() == s.labels()
    assert fidelity(apply_circuit(out, Circuit(els).inverse()), s) > 1 - 1e-12
