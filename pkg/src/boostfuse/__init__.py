"""Single-photon-boosted type-I fusion: Fock-space simulation, verification and resource costs."""

from .calibration import calibrate_part2_circuit, verify_circuit
from .distillation import DistillationParams, distill, p_dist, total_success_probability
from .fock import LabeledFockState, LabelPair, fidelity, make_dual_rail_pair, tensor
from .fusion_boosted import OutcomeClass, boosted_fuse
from .fusion_standard import type1_fuse, type1_fuse_kraus
from .interferometer import BeamSplitter, Circuit, PhaseShift, apply_circuit
from .resources import evaluate_strategy, scheme_strategy, source_cost

__all__ = [
    "BeamSplitter", "Circuit", "DistillationParams", "LabelPair", "LabeledFockState",
    "OutcomeClass", "PhaseShift", "apply_circuit", "boosted_fuse", "calibrate_part2_circuit",
    "distill", "evaluate_strategy", "fidelity", "make_dual_rail_pair", "p_dist",
    "scheme_strategy", "source_cost", "tensor", "total_success_probability", "type1_fuse",
    "type1_fuse_kraus", "verify_circuit",
]
