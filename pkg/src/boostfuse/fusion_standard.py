"""Standard type-I fusion: a balanced beam splitter on modes 1 and 4.

Qubit ``a`` sits on modes (1, 2) and qubit ``b`` on (3, 4).  After
``BS(1, 4)`` both modes are detected.  One photon heralds success and leaves
the surviving qubit on modes (2, 3), with ``|0_2 1_3> = |0>_c`` and
``|1_2 0_3> = |1>_c``; zero or two photons leave a separable remainder.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .detection import apply_kraus, enumerate_outcomes
from .fock import LabeledFockState, LabelPair, fidelity, from_terms
from .interferometer import BeamSplitter, Circuit, apply_circuit

MEASURED = (1, 4)
STANDARD_CIRCUIT = Circuit([BeamSplitter(1, 4)])
STANDARD_SUCCESS = Fraction(1, 2)


class StandardKind(enum.Enum):
    SUCCESS = "success"
    FAIL_ZERO = "fail-zero"
    FAIL_TWO = "fail-two"


@dataclass(frozen=True)
class StandardFusionOutcome:
    kind: StandardKind
    sign: Optional[str]
    probability: float
    post_state: LabeledFockState
    pattern: Optional[tuple[int, ...]] = None

    @property
    def succeeded(self) -> bool:
        return self.kind is StandardKind.SUCCESS


def check_dual_rail_input(s: LabeledFockState, qubits=((1, 2), (3, 4))) -> None:
    """Raise ``ValueError`` unless every term has one photon per qubit."""
    for pair in qubits:
        for occ in s.occupations_of(pair):
            if sum(occ) != 1:
                raise ValueError(
                    f"modes {pair} must hold exactly one photon per term, found {occ}"
                )
    if not s.is_normalized():
        raise ValueError("input state is not normalized")


def fused_pair_state(sign: str, modes: tuple[int, int] = (2, 3),
                     labels=(LabelPair(0, 0), LabelPair(1, 1))) -> LabeledFockState:
    """``(|L0>|0_i 1_j> +/- |L1>|1_i 0_j>) / sqrt(2)`` on ``modes``."""
    s = 1.0 if sign == "+" else -1.0
    return from_terms(modes, [
        (labels[0], (0, 1), math.sqrt(0.5)),
        (labels[1], (1, 0), s * math.sqrt(0.5)),
    ])


def standard_kraus_operators() -> dict[tuple[int, int], list[tuple[tuple[int, int], float]]]:
    """Effective bras on modes (1, 4) for each detection pattern."""
    r = math.sqrt(0.5)
    return {
        (1, 0): [((1, 0), r), ((0, 1), r)],
        (0, 1): [((1, 0), r), ((0, 1), -r)],
        (2, 0): [((1, 1), r)],
        (0, 2): [((1, 1), r)],
        (0, 0): [((0, 0), 1.0)],
    }


def _classify(pattern: tuple[int, int], p: float, post: LabeledFockState) -> StandardFusionOutcome:
    n = sum(pattern)
    if n == 1:
        sign = _success_sign(post)
        return StandardFusionOutcome(StandardKind.SUCCESS, sign, p, post, pattern)
    kind = StandardKind.FAIL_ZERO if n == 0 else StandardKind.FAIL_TWO
    return StandardFusionOutcome(kind, None, p, post, pattern)


def _success_sign(post: LabeledFockState) -> str:
    """Relative sign of the ``|0>_c`` and ``|1>_c`` components."""
    zero = [a for (_, occ), a in post.terms.items() if occ == (0, 1)]
    one = [a for (_, occ), a in post.terms.items() if occ == (1, 0)]
    if len(zero) != 1 or len(one) != 1:
        raise ValueError(f"post-state is not a fused qubit: {post!r}")
    ratio = one[0] / zero[0]
    return "+" if ratio.real > 0 else "-"


def type1_fuse(s: LabeledFockState) -> list[StandardFusionOutcome]:
    """Run the standard gate circuit and classify every detection pattern."""
    check_dual_rail_input(s)
    out = enumerate_outcomes(apply_circuit(s, STANDARD_CIRCUIT), MEASURED)
    return [_classify(o.pattern, o.probability, o.post_state.reordered((2, 3))) for o in out]


def type1_fuse_kraus(s: LabeledFockState) -> list[StandardFusionOutcome]:
    """Same outcome list, computed by contracting with the effective bras directly."""
    check_dual_rail_input(s)
    out = []
    for pattern, bra in sorted(standard_kraus_operators().items()):
        p, post = apply_kraus(s, bra, MEASURED)
        if post is not None:
            out.append(_classify(pattern, p, post.reordered((2, 3))))
    return out


def success_probability(outcomes) -> float:
    return sum(o.probability for o in outcomes if o.succeeded)


def matches_fused_form(post: LabeledFockState, sign: str, labels, modes=(2, 3),
                       tol: float = 1e-10) -> bool:
    return fidelity(post, fused_pair_state(sign, modes, labels)) > 1 - tol
