"""Behavioral model of a four-APD polarization measurement apparatus.

Time advances in pulse slots. Within a slot the receiver selects a basis,
blinding light (if any) is applied, pulses are detected, and ``tick`` closes
the slot. A detector that clicks goes dead for ``dead_slots`` ticks; a
blinded detector stays blind only while light keeps arriving.

Faked states are bright classical pulses. Their light is split over the two
detectors of the selected basis with the same cos^2 weights a photon would
see, and the detector that receives the light clicks only if it is live.
With the complement detectors blinded this reproduces the attack table:
matched bases give nothing, crossed bases give the attacker's bit half the
time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

from .quantum import Basis, PolarizationState, RandomStream, encode, prob_one

DetectorId = tuple[Basis, int]
ALL_DETECTORS: tuple[DetectorId, ...] = tuple((b, bit) for b in (Basis.Z, Basis.X) for bit in (0, 1))


@dataclass(frozen=True, slots=True)
class Quantum:
    state: PolarizationState
    photons: int = 1


@dataclass(frozen=True, slots=True)
class FakedState:
    basis: Basis
    bit: int


@dataclass(frozen=True, slots=True)
class BlindingLight:
    targets: frozenset = frozenset()


@dataclass(frozen=True, slots=True)
class Vacuum:
    pass


Pulse = Union[Quantum, FakedState, BlindingLight, Vacuum]
VACUUM = Vacuum()


class ApdMode(enum.Enum):
    LIVE = "live"
    BLINDED = "blinded"
    DEAD = "dead"


@dataclass(slots=True)
class Apd:
    id: DetectorId
    mode: ApdMode = ApdMode.LIVE
    slots_remaining: int = 0

    @property
    def live(self) -> bool:
        return self.mode is ApdMode.LIVE


@dataclass(frozen=True, slots=True)
class Detection:
    bit: int | None = None

    @property
    def clicked(self) -> bool:
        return self.bit is not None

    def __str__(self) -> str:
        return "none" if self.bit is None else str(self.bit)


NO_CLICK = Detection()
CLICK = (Detection(0), Detection(1))


class DetectorUsageError(RuntimeError):
    pass


@dataclass
class DetectorBank:
    dead_slots: int = 1
    detectors: dict = field(default_factory=lambda: {d: Apd(d) for d in ALL_DETECTORS})
    selection: Basis | None = None

    def __post_init__(self):
        if self.dead_slots < 0:
            raise ValueError("dead_slots must be >= 0")

    def __getitem__(self, det: DetectorId) -> Apd:
        return self.detectors[det]

    def modes(self) -> dict:
        return {d: a.mode for d, a in self.detectors.items()}


def select_basis(bank: DetectorBank, basis: Basis) -> DetectorBank:
    bank.selection = basis
    return bank


def apply_illumination(bank: DetectorBank, pulse: Pulse) -> DetectorBank:
    if isinstance(pulse, BlindingLight):
        for det in pulse.targets:
            apd = bank.detectors[det]
            if apd.mode is ApdMode.LIVE:
                apd.mode = ApdMode.BLINDED
    return bank


def _route(bank: DetectorBank, state: PolarizationState, rng: RandomStream) -> Detection:
    basis = bank.selection
    bit = 1 if rng.uniform() < prob_one(state, basis) else 0
    apd = bank.detectors[(basis, bit)]
    if apd.mode is not ApdMode.LIVE:
        return NO_CLICK
    if bank.dead_slots > 0:
        apd.mode = ApdMode.DEAD
        apd.slots_remaining = bank.dead_slots
    return CLICK[bit]


def detect(bank: DetectorBank, pulse: Pulse, rng: RandomStream) -> tuple[Detection, DetectorBank]:
    """Detect one pulse in the currently selected basis.

    Consumes exactly one draw from ``rng`` for quantum and faked-state pulses
    and none otherwise.
    """
    if bank.selection is None:
        raise DetectorUsageError("no basis selected for this slot")
    if isinstance(pulse, Quantum):
        return _route(bank, pulse.state, rng), bank
    if isinstance(pulse, FakedState):
        return _route(bank, encode(pulse.bit, pulse.basis), rng), bank
    if isinstance(pulse, BlindingLight):
        apply_illumination(bank, pulse)
    return NO_CLICK, bank


def receive(bank: DetectorBank, pulses, rng: RandomStream) -> Detection:
    """Run one slot's pulses through the bank; the first click wins."""
    result = NO_CLICK
    for pulse in pulses:
        if isinstance(pulse, BlindingLight):
            apply_illumination(bank, pulse)
            continue
        det, _ = detect(bank, pulse, rng)
        if not result.clicked:
            result = det
    return result


def tick(bank: DetectorBank) -> DetectorBank:
    """Close the slot: count down dead time, drop blinding, clear the selection."""
    for apd in bank.detectors.values():
        if apd.mode is ApdMode.DEAD:
            apd.slots_remaining -= 1
            if apd.slots_remaining <= 0:
                apd.mode = ApdMode.LIVE
                apd.slots_remaining = 0
        elif apd.mode is ApdMode.BLINDED:
            apd.mode = ApdMode.LIVE
    bank.selection = None
    return bank
