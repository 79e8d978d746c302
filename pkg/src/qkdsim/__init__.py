"""Seeded simulator of BB84 and three-stage QKD under eavesdropping attacks."""

from .quantum import (
    Basis,
    ConfigurationError,
    PolarizationState,
    RandomStream,
    RotationTransform,
    apply_rotation,
    compose,
    draw_basis,
    draw_bit,
    draw_rotation,
    encode,
    inverse,
    measure,
)
from .detector import BlindingLight, Detection, DetectorBank, FakedState, Quantum, Vacuum
from .protocols import InterceptHooks, SiftedKey, Transcript, run_bb84, run_three_stage
from .analysis import OneTimePad, RunReport, eve_knowledge, otp_decrypt, otp_encrypt, qber, summarize
from .harness import ScenarioConfig, run_scenario

__version__ = "0.1.0"

__all__ = [
    "Basis", "BlindingLight", "ConfigurationError", "Detection", "DetectorBank", "FakedState",
    "InterceptHooks", "OneTimePad", "PolarizationState", "Quantum", "RandomStream",
    "RotationTransform", "RunReport", "ScenarioConfig", "SiftedKey", "Transcript", "Vacuum",
    "apply_rotation", "compose", "draw_basis", "draw_bit", "draw_rotation", "encode",
    "eve_knowledge", "inverse", "measure", "otp_decrypt", "otp_encrypt", "qber",
    "run_bb84", "run_scenario", "run_three_stage", "summarize",
]
