"""Eavesdropping strategies that plug into protocol tap points.

Single-pulse strategy functions return ``(pulses, EveNote)``; the classes
bind an rng and wire the functions into :class:`InterceptHooks`. There is
no way to duplicate a quantum pulse: measuring collapses it, and siphoning
splits a multi-photon pulse without creating photons.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .detector import VACUUM, BlindingLight, DetectorBank, FakedState, Pulse, Quantum
from .protocols import (
    AGREED_BASIS,
    DEFAULT_GRID,
    EveNote,
    InterceptHooks,
    SiftedKey,
    three_stage_run,
)
from .quantum import (
    Basis,
    PolarizationState,
    RandomStream,
    RotationTransform,
    angle_distance,
    draw_basis,
    measure,
)

# analyzers used by the realistic estimator, cycled photon by photon
BERNOULLI_FILTERS = (0.0, 45.0, 90.0, 135.0)
_EPS = 1e-12


class EstimationError(ValueError):
    pass


def intercept_resend(pulse: Pulse, rng: RandomStream, basis: Basis | None = None,
                     index: int = 0) -> tuple[list, EveNote]:
    """Measure in a random basis (or ``basis``) and resend what was seen."""
    if not isinstance(pulse, Quantum):
        return [pulse], EveNote(index, action="pass")
    eve_basis = draw_basis(rng) if basis is None else basis
    bit, collapsed = measure(pulse.state, eve_basis, rng)
    return [Quantum(collapsed)], EveNote(index, bit, eve_basis, action="resend " + eve_basis.value + str(bit))


_BLIND = {e: BlindingLight(frozenset({(Basis.Z, 1 - e), (Basis.X, 1 - e)})) for e in (0, 1)}


def faked_state_bb84(pulse: Pulse, rng: RandomStream, index: int = 0) -> tuple[list, EveNote]:
    """Detector-blinding attack on BB84.

    Eve measures bit ``e`` in a random basis ``B``, blinds both detectors of
    bit ``1 - e`` and sends a bright pulse prepared as ``1 - e`` in the other
    basis. Bob can then only click ``e``, and only when he also chose ``B``.
    """
    if not isinstance(pulse, Quantum):
        return [pulse], EveNote(index, action="pass")
    eve_basis = draw_basis(rng)
    e, _ = measure(pulse.state, eve_basis, rng)
    fake = FakedState(eve_basis.other, 1 - e)
    action = "fake " + fake.basis.value + str(fake.bit) + " after " + eve_basis.value + str(e)
    return [_BLIND[e], fake], EveNote(index, e, eve_basis, action=action)


def faked_state_three_stage(pulse: Pulse, agreed_basis: Basis, rng: RandomStream) -> tuple[list, EveNote]:
    """Measure a transformed qubit in the agreed basis and force Bob to read it.

    Returns the pulses to inject into Bob's apparatus: blinding on the other
    bit's detector and a bright pulse aligned with Eve's result.
    """
    if not isinstance(pulse, Quantum):
        return [pulse], EveNote(action="pass")
    e, _ = measure(pulse.state, agreed_basis, rng)
    return force_pulses(agreed_basis, e), EveNote(measured_bit=e, eve_basis=agreed_basis,
                                                  action=f"force {agreed_basis}{e}")


def force_pulses(basis: Basis, bit: int) -> list:
    return [BlindingLight(frozenset({(basis, 1 - bit)})), FakedState(basis, bit)]


def siphon(pulse: Pulse, photons: int) -> tuple[list, Pulse]:
    """Divert up to ``photons`` photons; returns (diverted singles, remainder)."""
    if not isinstance(pulse, Quantum) or photons <= 0:
        return [], pulse
    taken = min(photons, pulse.photons)
    singles = [Quantum(pulse.state)] * taken
    left = pulse.photons - taken
    return singles, (Quantum(pulse.state, left) if left else VACUUM)


# ------------------------------------------------------- angle estimation

def candidate_angles(grid_size: int) -> np.ndarray:
    """Polarization angles Eve can resolve: ``180 * j / grid_size``."""
    return 180.0 * np.arange(grid_size) / grid_size


def _pass_prob(state_angles, filter_angles) -> np.ndarray:
    d = np.radians(np.subtract.outer(np.asarray(state_angles, float), np.asarray(filter_angles, float)))
    return np.cos(d) ** 2


def _oracle_pass(state_angles, filter_angles) -> np.ndarray:
    # idealized filter: passes iff the polarization is within 45 degrees
    d = np.abs(np.mod(np.subtract.outer(np.asarray(state_angles, float),
                                        np.asarray(filter_angles, float)), 180.0))
    d = np.minimum(d, 180.0 - d)
    return d < 45.0 - 1e-9


def _bernoulli_counts(m: int) -> np.ndarray:
    k = len(BERNOULLI_FILTERS)
    return np.array([m // k + (1 if i < m % k else 0) for i in range(k)])


def _bernoulli_estimate(passes: np.ndarray, per_filter: np.ndarray, grid_size: int):
    """ML candidate index and posterior mass for rows of pass counts."""
    p = np.clip(_pass_prob(candidate_angles(grid_size), BERNOULLI_FILTERS), _EPS, 1 - _EPS)
    ll = passes @ np.log(p).T + (per_filter - passes) @ np.log1p(-p).T
    best = np.argmax(ll, axis=-1)
    top = np.take_along_axis(ll, best[..., None], axis=-1)
    post = 1.0 / np.exp(ll - top).sum(axis=-1)
    return best, post


def siphon_and_estimate(pulses, grid_size: int = DEFAULT_GRID, rng: RandomStream | None = None,
                        mode: str = "bernoulli") -> tuple[PolarizationState, float]:
    """Maximum-likelihood polarization estimate from siphoned photons.

    In ``"bernoulli"`` mode photon ``i`` meets the analyzer
    ``BERNOULLI_FILTERS[i % 4]`` and passes with probability
    ``cos^2(theta - filter)``. In ``"oracle"`` mode photon ``i`` meets the
    filter at candidate angle ``i`` and passes deterministically when within
    45 degrees; with one photon per candidate this pins the angle exactly.

    Candidates are ``grid_size`` angles spaced ``180 / grid_size`` apart. Ties
    go to the lowest index; confidence is the posterior mass of the winner
    under a uniform prior.
    """
    pulses = [p for p in pulses if isinstance(p, Quantum)]
    if not pulses:
        raise EstimationError("no photons to estimate from")
    theta = pulses[0].state.angle
    m = sum(p.photons for p in pulses)
    cands = candidate_angles(grid_size)
    if mode == "oracle":
        filters = cands[np.arange(m) % grid_size]
        seen = _oracle_pass([theta], filters)[0]
        consistent = (_oracle_pass(cands, filters) == seen).all(axis=1)
        best = int(np.argmax(consistent))
        return PolarizationState(cands[best]), 1.0 / int(consistent.sum())
    if mode != "bernoulli":
        raise ValueError(f"unknown estimation mode {mode!r}")
    if rng is None:
        raise ValueError("bernoulli mode needs an rng")
    filt_idx = np.arange(m) % len(BERNOULLI_FILTERS)
    p = _pass_prob([theta], np.asarray(BERNOULLI_FILTERS)[filt_idx])[0]
    passed = rng.uniforms(m) < p
    passes = np.bincount(filt_idx[passed], minlength=len(BERNOULLI_FILTERS))
    best, post = _bernoulli_estimate(passes[None, :], _bernoulli_counts(m), grid_size)
    return PolarizationState(cands[int(best[0])]), float(post[0])


def siphon_success_rate(grid_size: int, m: int, trials: int, rng: RandomStream, mode: str = "bernoulli") -> float:
    """Monte-Carlo rate at which the estimate hits a uniformly drawn true angle.

    Batched equivalent of calling :func:`siphon_and_estimate` per trial.
    """
    if m < 1:
        raise EstimationError("need at least one photon")
    cands = candidate_angles(grid_size)
    truth = np.minimum((rng.uniforms(trials) * grid_size).astype(int), grid_size - 1)
    if mode == "oracle":
        filters = cands[np.arange(m) % grid_size]
        rows = np.packbits(_oracle_pass(cands, filters), axis=1)
        first: dict[bytes, int] = {}
        for j, row in enumerate(rows):
            first.setdefault(row.tobytes(), j)
        winner = np.array([first[row.tobytes()] for row in rows])
        return float(np.mean(winner[truth] == truth))
    per_filter = _bernoulli_counts(m)
    p = _pass_prob(cands[truth], BERNOULLI_FILTERS)
    passes = np.empty((trials, len(BERNOULLI_FILTERS)))
    for f, n in enumerate(per_filter):
        u = rng.uniforms(trials * int(n)).reshape(trials, int(n))
        passes[:, f] = (u < p[:, f:f + 1]).sum(axis=1)
    best, _ = _bernoulli_estimate(passes, per_filter, grid_size)
    return float(np.mean(best == truth))


# --------------------------------------------------------------- hooks

class Passive:
    name = "none"

    def hooks(self) -> InterceptHooks:
        return InterceptHooks()


class InterceptResend:
    """Measure-and-resend on one channel pass (``stage``)."""

    name = "intercept-resend"

    def __init__(self, rng: RandomStream, basis: Basis | None = None, stage: int = 1):
        self.rng = rng
        self.basis = basis
        self.stage = stage

    def tap(self, pulses, index):
        out, notes = [], []
        for p in pulses:
            fwd, note = intercept_resend(p, self.rng, self.basis, index)
            out.extend(fwd)
            notes.append(note)
        return out, notes[-1] if notes else None

    def hooks(self) -> InterceptHooks:
        h = InterceptHooks()
        setattr(h, f"stage{self.stage}", self.tap)
        return h


class FakedStateBB84:
    name = "faked-state"

    def __init__(self, rng: RandomStream):
        self.rng = rng

    def tap(self, pulses, index):
        out, note = [], None
        for p in pulses:
            fwd, n = faked_state_bb84(p, self.rng, index)
            out.extend(fwd)
            note = n if n.measured_bit is not None or note is None else note
        return out, note

    def hooks(self) -> InterceptHooks:
        return InterceptHooks(stage1=self.tap)


class FakedStateForcing:
    """Three-stage attack: measure at ``stage``, force Bob's reading at stage 3."""

    name = "faked-state"

    def __init__(self, rng: RandomStream, agreed_basis: Basis = AGREED_BASIS, stage: int = 1):
        if stage not in (1, 2, 3):
            raise ValueError("stage must be 1, 2 or 3")
        self.rng = rng
        self.basis = agreed_basis
        self.stage = stage
        self._bit: int | None = None

    def _measure(self, pulses, index):
        self._bit = None
        out, note = [], None
        for p in pulses:
            if isinstance(p, Quantum) and self._bit is None:
                fwd, note = intercept_resend(p, self.rng, self.basis)
                self._bit = note.measured_bit
                note = replace(note, index=index, action=f"measure {self.basis}{self._bit}")
                out.extend(fwd)
            else:
                out.append(p)
        return out, note

    def _force(self, pulses, index):
        note = None
        if self.stage == 3:
            pulses, note = self._measure(pulses, index)
        if self._bit is None:
            return pulses, note
        bit, self._bit = self._bit, None
        return force_pulses(self.basis, bit), EveNote(index, bit, self.basis, action=f"force {self.basis}{bit}")

    def hooks(self) -> InterceptHooks:
        h = InterceptHooks(stage3=self._force)
        if self.stage < 3:
            setattr(h, f"stage{self.stage}", self._measure)
        return h


class Siphon:
    """Split ``photons`` off every pass and infer the key bit from the three angles.

    Stage angles satisfy s2 - s1 = U_B and s3 - U_B = the encoded state, so
    three good estimates reveal the bit without disturbing Bob.
    """

    name = "siphon"

    def __init__(self, rng: RandomStream, photons: int, grid_size: int = DEFAULT_GRID,
                 agreed_basis: Basis = AGREED_BASIS, mode: str = "bernoulli"):
        self.rng = rng
        self.photons = photons
        self.grid_size = grid_size
        self.basis = agreed_basis
        self.mode = mode
        self._est: dict[int, float] = {}

    def _tap(self, stage, pulses, index):
        if stage == 1:
            self._est = {}
        out = []
        got = []
        for p in pulses:
            singles, rest = siphon(p, self.photons)
            got.extend(singles)
            out.append(rest)
        if got:
            est, _ = siphon_and_estimate(got, self.grid_size, self.rng, self.mode)
            self._est[stage] = est.angle
        if stage < 3:
            return out, None
        if len(self._est) < 3:
            return out, EveNote(index, action=f"siphon {self.photons} incomplete")
        u_b = self._est[2] - self._est[1]
        s0 = self._est[3] - u_b
        bit = 1 if angle_distance(s0, self.basis.bit1_angle) < 45.0 else 0
        return out, EveNote(index, bit, self.basis, RotationTransform(u_b), action=f"siphon {self.photons}")

    def hooks(self) -> InterceptHooks:
        return InterceptHooks(lambda p, i: self._tap(1, p, i),
                              lambda p, i: self._tap(2, p, i),
                              lambda p, i: self._tap(3, p, i))


# ----------------------------------------------------------------- MITM

@dataclass
class Party:
    """One endpoint of a three-stage session."""

    name: str
    rng: RandomStream
    bank: DetectorBank | None = None


@dataclass
class MitmResult:
    eve_key_with_alice: SiftedKey
    eve_key_with_bob: SiftedKey
    bob_key: SiftedKey
    alice_leg: list
    bob_leg: list
    detected: bool


class HandshakeRefused(Exception):
    pass


def classical_handshake(claimed: str, actual: str, authenticated: bool) -> None:
    """Open the classical channel; an authenticated channel exposes impersonation."""
    if authenticated and claimed != actual:
        raise HandshakeRefused(f"{actual} cannot authenticate as {claimed}")


def mitm_three_stage(alice_bits, alice: Party, bob: Party, eve: Party, authenticated: bool = False,
                     grid_size: int = DEFAULT_GRID, agreed_basis: Basis = AGREED_BASIS) -> MitmResult:
    """Eve poses as Bob towards Alice and as Alice towards Bob, relaying each bit."""
    empty = SiftedKey()
    try:
        classical_handshake("bob", eve.name, authenticated)
        classical_handshake("alice", eve.name, authenticated)
    except HandshakeRefused:
        return MitmResult(empty, empty, empty, [], [], detected=True)

    eve_bank = eve.bank or DetectorBank()
    bob_bank = bob.bank or DetectorBank()
    a_leg, b_leg = [], []
    got, got_idx, sent, bob_bits, bob_idx = [], [], [], [], []
    for i, bit in enumerate(alice_bits):
        rec = three_stage_run(bit, agreed_basis, alice.rng, eve.rng, bank=eve_bank,
                              grid_size=grid_size, index=i)
        a_leg.append(rec)
        if not rec.bob_detection.clicked:
            continue
        relay = rec.bob_detection.bit
        got.append(relay)
        got_idx.append(i)
        rec2 = three_stage_run(relay, agreed_basis, eve.rng, bob.rng, bank=bob_bank,
                               grid_size=grid_size, index=i)
        b_leg.append(rec2)
        sent.append(relay)
        if rec2.bob_detection.clicked:
            bob_bits.append(rec2.bob_detection.bit)
            bob_idx.append(i)
    return MitmResult(SiftedKey(tuple(got), tuple(got_idx)), SiftedKey(tuple(sent), tuple(got_idx)),
                      SiftedKey(tuple(bob_bits), tuple(bob_idx)), a_leg, b_leg, detected=False)
