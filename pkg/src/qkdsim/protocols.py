"""BB84 and three-stage protocol sessions with adversary tap points.

The quantum channel carries a list of pulses per slot. Every channel pass
goes through an optional hook ``hook(pulses, index) -> (pulses, note)`` so an
adversary can replace what continues downstream. BB84 has one pass
(``stage1``); the three-stage protocol has three.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .detector import Detection, DetectorBank, Quantum, receive, select_basis, tick
from .quantum import (
    Basis,
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
)

DEFAULT_GRID = 1024
AGREED_BASIS = Basis.Z

# stream ids inside one trial
ALICE, BOB, EVE = 0, 1, 2


@dataclass(frozen=True, slots=True)
class EveNote:
    index: int = 0
    measured_bit: int | None = None
    eve_basis: Basis | None = None
    estimated_rotation: RotationTransform | None = None
    action: str = ""


Hook = Callable[[list, int], "tuple[list, Optional[EveNote]]"]


@dataclass
class InterceptHooks:
    stage1: Hook | None = None
    stage2: Hook | None = None
    stage3: Hook | None = None

    def tap(self, stage: int, pulses: list, index: int) -> tuple[list, EveNote | None]:
        hook = (self.stage1, self.stage2, self.stage3)[stage - 1]
        if hook is None:
            return pulses, None
        return hook(pulses, index)


NO_TAPS = InterceptHooks()


@dataclass(slots=True)
class Bb84PulseRecord:
    index: int
    alice_bit: int
    alice_basis: Basis
    bob_basis: Basis
    bob_detection: Detection
    sifted: bool = False


@dataclass(slots=True)
class ThreeStageRecord:
    index: int
    alice_bit: int
    u_a: RotationTransform
    u_b: RotationTransform
    stage_states: tuple
    final_state: PolarizationState | None
    bob_detection: Detection
    agreed_basis: Basis = AGREED_BASIS


@dataclass(frozen=True)
class SiftedKey:
    bits: tuple = ()
    source_indices: tuple = ()

    def __post_init__(self):
        if len(self.bits) != len(self.source_indices):
            raise ValueError("bits and source_indices differ in length")

    def __len__(self):
        return len(self.bits)


@dataclass
class Transcript:
    """Everything one protocol session produced, in pulse order."""

    protocol: str
    attack: str = "none"
    seed: int = 0
    records: list = field(default_factory=list)
    eve_notes: dict = field(default_factory=dict)
    handshake_refused: bool = False
    config: dict = field(default_factory=dict)


# ---------------------------------------------------------------- BB84

def bb84_alice_prepare(rng: RandomStream) -> tuple[int, Basis, Quantum]:
    bit = draw_bit(rng)
    basis = draw_basis(rng)
    return bit, basis, Quantum(encode(bit, basis))


def bb84_bob_measure(bank: DetectorBank, pulse, rng: RandomStream) -> tuple[Basis, Detection]:
    """Measure one slot in a random basis. ``pulse`` may be a pulse or a list of them."""
    pulses = pulse if isinstance(pulse, list) else [pulse]
    basis = draw_basis(rng)
    select_basis(bank, basis)
    det = receive(bank, pulses, rng)
    tick(bank)
    return basis, det


def bb84_sift(records) -> tuple[SiftedKey, SiftedKey]:
    """Public basis comparison; marks each record's ``sifted`` flag.

    Keeps exactly the slots where Bob clicked and the bases agree.
    """
    a_bits, b_bits, idx = [], [], []
    for r in records:
        r.sifted = r.bob_detection.clicked and r.alice_basis is r.bob_basis
        if r.sifted:
            a_bits.append(r.alice_bit)
            b_bits.append(r.bob_detection.bit)
            idx.append(r.index)
    idx = tuple(idx)
    return SiftedKey(tuple(a_bits), idx), SiftedKey(tuple(b_bits), idx)


def run_bb84(pulses: int, seed: int, taps: InterceptHooks = NO_TAPS, dead_slots: int = 1) -> Transcript:
    """Send ``pulses`` qubits, then announce bases in one batch and sift."""
    alice = RandomStream(seed, ALICE)
    bob = RandomStream(seed, BOB)
    bank = DetectorBank(dead_slots=dead_slots)
    out = Transcript("bb84", seed=seed)
    records = out.records
    for i in range(pulses):
        bit, basis, pulse = bb84_alice_prepare(alice)
        channel, note = taps.tap(1, [pulse], i)
        if note is not None:
            out.eve_notes[i] = note
        bob_basis, det = bb84_bob_measure(bank, channel, bob)
        records.append(Bb84PulseRecord(i, bit, basis, bob_basis, det))
    bb84_sift(records)
    return out


# ---------------------------------------------------------- three-stage

def rotate_pulses(pulses: list, rot: RotationTransform) -> list:
    """Apply a party's rotation; only quantum pulses pass through the optics."""
    return [Quantum(apply_rotation(p.state, rot), p.photons) if isinstance(p, Quantum) else p
            for p in pulses]


def _state_of(pulses: list) -> PolarizationState | None:
    for p in pulses:
        if isinstance(p, Quantum):
            return p.state
    return None


def verify_commuting(u_a: RotationTransform, u_b: RotationTransform) -> bool:
    return compose(u_a, u_b) == compose(u_b, u_a)


def three_stage_run(
    alice_bit: int,
    agreed_basis: Basis,
    rng_a: RandomStream,
    rng_b: RandomStream,
    taps: InterceptHooks = NO_TAPS,
    bank: DetectorBank | None = None,
    grid_size: int = DEFAULT_GRID,
    index: int = 0,
    photons: int = 1,
    notes: list | None = None,
    u_a: RotationTransform | None = None,
    u_b: RotationTransform | None = None,
) -> ThreeStageRecord:
    """One key bit through the three channel passes.

    Alice applies U_A and sends; Bob applies U_B and returns; Alice removes
    U_A and sends; Bob removes U_B and measures in ``agreed_basis``. Pass
    explicit ``u_a``/``u_b`` to skip drawing them. Adversary notes from the
    three passes are appended to ``notes`` when given.
    """
    if bank is None:
        bank = DetectorBank()
    if u_a is None:
        u_a = draw_rotation(rng_a, grid_size)
    if u_b is None:
        u_b = draw_rotation(rng_b, grid_size)
    if not verify_commuting(u_a, u_b):
        raise ValueError("transformations do not commute")

    s1 = apply_rotation(encode(alice_bit, agreed_basis), u_a)
    channel = [Quantum(s1, photons)]

    channel, note = taps.tap(1, channel, index)
    if notes is not None and note is not None:
        notes.append(note)
    channel = rotate_pulses(channel, u_b)
    s2 = _state_of(channel)

    channel, note = taps.tap(2, channel, index)
    if notes is not None and note is not None:
        notes.append(note)
    channel = rotate_pulses(channel, inverse(u_a))
    s3 = _state_of(channel)

    channel, note = taps.tap(3, channel, index)
    if notes is not None and note is not None:
        notes.append(note)
    channel = rotate_pulses(channel, inverse(u_b))

    select_basis(bank, agreed_basis)
    det = receive(bank, channel, rng_b)
    tick(bank)
    return ThreeStageRecord(index, alice_bit, u_a, u_b, (s1, s2, s3), _state_of(channel), det, agreed_basis)


def run_three_stage(
    rounds: int,
    seed: int,
    taps: InterceptHooks = NO_TAPS,
    grid_size: int = DEFAULT_GRID,
    dead_slots: int = 1,
    agreed_basis: Basis = AGREED_BASIS,
    photons: int = 1,
) -> Transcript:
    alice = RandomStream(seed, ALICE)
    bob = RandomStream(seed, BOB)
    bank = DetectorBank(dead_slots=dead_slots)
    out = Transcript("three-stage", seed=seed)
    for i in range(rounds):
        notes: list = []
        rec = three_stage_run(draw_bit(alice), agreed_basis, alice, bob, taps, bank,
                              grid_size=grid_size, index=i, photons=photons, notes=notes)
        out.records.append(rec)
        # Eve's final word on the round is the last note carrying a bit
        kept = [n for n in notes if n.measured_bit is not None] or notes
        if kept:
            out.eve_notes[i] = kept[-1]
    return out


def three_stage_keys(records) -> tuple[SiftedKey, SiftedKey]:
    """Key bits of the rounds in which Bob registered a click."""
    kept = [r for r in records if r.bob_detection.clicked]
    idx = tuple(r.index for r in kept)
    return (SiftedKey(tuple(r.alice_bit for r in kept), idx),
            SiftedKey(tuple(r.bob_detection.bit for r in kept), idx))

