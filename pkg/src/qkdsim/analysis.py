"""Key statistics, run reports and one-time-pad encryption."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

from .protocols import SiftedKey, Transcript, bb84_sift, three_stage_keys


class EmptyKeyWarning(UserWarning):
    pass


class OneTimePadError(ValueError):
    """Refusal to use a key that is too short or already consumed."""


def qber(a: SiftedKey, b: SiftedKey) -> float:
    """Fraction of positions where the two sifted keys disagree."""
    if a.source_indices != b.source_indices:
        raise ValueError("keys do not cover the same pulse indices")
    if not a.bits:
        warnings.warn("QBER of an empty key taken as 0", EmptyKeyWarning, stacklevel=2)
        return 0.0
    return sum(x != y for x, y in zip(a.bits, b.bits)) / len(a.bits)


def eve_knowledge(eve_notes: dict, reference_key: SiftedKey) -> float:
    """Fraction of ``reference_key`` positions where Eve recorded the right bit.

    ``eve_notes`` maps pulse index to EveNote. Positions without a note count
    as unknown.
    """
    if not reference_key.bits:
        return 0.0
    hits = 0
    for i, bit in zip(reference_key.source_indices, reference_key.bits):
        note = eve_notes.get(i)
        if note is not None and note.measured_bit == bit:
            hits += 1
    return hits / len(reference_key.bits)


def knowledge_coverage(eve_notes: dict, reference_key: SiftedKey) -> int:
    return sum(1 for i in reference_key.source_indices
               if i in eve_notes and eve_notes[i].measured_bit is not None)


# ------------------------------------------------------------------ OTP

def bits_to_bytes(bits) -> bytes:
    bits = list(bits)
    out = bytearray()
    for k in range(0, len(bits) - len(bits) % 8, 8):
        byte = 0
        for b in bits[k:k + 8]:
            byte = (byte << 1) | b
        out.append(byte)
    return bytes(out)


class OneTimePad:
    """A key that can be used for exactly one encryption and its decryption."""

    def __init__(self, bits):
        self.bits = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("key bits must be 0 or 1")
        self.encrypt_used = False
        self.decrypt_used = False

    def __len__(self):
        return len(self.bits)

    @property
    def consumed(self) -> bool:
        return self.encrypt_used

    def _pad(self, nbytes: int) -> bytes:
        if 8 * nbytes > len(self.bits):
            raise OneTimePadError(f"key has {len(self.bits)} bits, message needs {8 * nbytes}")
        return bits_to_bytes(self.bits[:8 * nbytes])


def otp_encrypt(plaintext: bytes, key: OneTimePad) -> bytes:
    if key.encrypt_used:
        raise OneTimePadError("key already used")
    pad = key._pad(len(plaintext))
    key.encrypt_used = True
    return bytes(p ^ k for p, k in zip(plaintext, pad))


def otp_decrypt(ciphertext: bytes, key: OneTimePad) -> bytes:
    if key.decrypt_used:
        raise OneTimePadError("key already used")
    pad = key._pad(len(ciphertext))
    key.decrypt_used = True
    return bytes(c ^ k for c, k in zip(ciphertext, pad))


# --------------------------------------------------------------- reports

@dataclass
class RunReport:
    protocol: str
    attack: str
    seed: int
    pulses_sent: int = 0
    detections: int = 0
    sifted: int = 0
    sift_fraction: float = 0.0
    detection_rate: float = 0.0
    qber: float = 0.0
    eve_knowledge_fraction: float = 0.0
    eve_coverage: int = 0
    detected: bool = False
    warnings: list = field(default_factory=list)
    claims: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# statistical expectations per (protocol, attack); each is (field, lo, hi)
CLAIMS = {
    ("bb84", "none"): {"sift_fraction_half": ("sift_fraction", 0.49, 0.51),
                       "qber_zero": ("qber", 0.0, 0.0)},
    ("bb84", "intercept-resend"): {"qber_quarter": ("qber", 0.235, 0.265),
                                   "eve_knowledge_three_quarters": ("eve_knowledge_fraction", 0.74, 0.76)},
    ("bb84", "faked-state"): {"qber_zero": ("qber", 0.0, 0.0),
                              "eve_knowledge_full": ("eve_knowledge_fraction", 1.0, 1.0),
                              "detection_rate_quarter": ("detection_rate", 0.24, 0.26),
                              "sifted_yield_eighth": ("sift_fraction", 0.115, 0.135)},
    ("three-stage", "none"): {"qber_zero": ("qber", 0.0, 0.0),
                              "all_detected": ("detection_rate", 1.0, 1.0)},
    ("three-stage", "intercept-resend"): {"qber_quarter": ("qber", 0.235, 0.265)},
    ("three-stage", "faked-state"): {"qber_half": ("qber", 0.485, 0.515)},
    ("three-stage", "mitm"): {"qber_zero": ("qber", 0.0, 0.0),
                              "eve_knowledge_full": ("eve_knowledge_fraction", 1.0, 1.0)},
    ("three-stage", "siphon"): {"qber_zero": ("qber", 0.0, 0.0)},
}


def transcript_keys(transcript: Transcript) -> tuple[SiftedKey, SiftedKey]:
    if transcript.protocol == "bb84":
        return bb84_sift(transcript.records)
    return three_stage_keys(transcript.records)


def summarize(transcript: Transcript) -> RunReport:
    """Aggregate a transcript; a pure function of its contents."""
    rep = RunReport(transcript.protocol, transcript.attack, transcript.seed, config=dict(transcript.config))
    n = len(transcript.records)
    rep.pulses_sent = n
    if n == 0:
        rep.warnings.append("empty transcript")
        rep.detected = transcript.handshake_refused
        return rep
    alice, bob = transcript_keys(transcript)
    rep.detections = sum(1 for r in transcript.records if r.bob_detection.clicked)
    rep.sifted = len(alice)
    rep.sift_fraction = rep.sifted / n
    rep.detection_rate = rep.detections / n
    if rep.sifted:
        rep.qber = qber(alice, bob)
    else:
        rep.warnings.append("empty sifted key")
    rep.eve_knowledge_fraction = eve_knowledge(transcript.eve_notes, alice)
    rep.eve_coverage = knowledge_coverage(transcript.eve_notes, alice)
    if rep.eve_coverage == 0:
        rep.warnings.append("no eavesdropper coverage")
    missing = transcript.protocol == "three-stage" and rep.detections < n
    rep.detected = transcript.handshake_refused or rep.qber > 0 or missing
    for name, (attr, lo, hi) in CLAIMS.get((transcript.protocol, transcript.attack), {}).items():
        rep.claims[name] = lo <= getattr(rep, attr) <= hi
    return rep
