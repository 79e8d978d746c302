import numpy as np
import pytest

from qkdsim.adversaries import InterceptResend
from qkdsim.detector import NO_CLICK, VACUUM, Detection, DetectorBank
from qkdsim.protocols import (
    Bb84PulseRecord,
    InterceptHooks,
    SiftedKey,
    bb84_alice_prepare,
    bb84_bob_measure,
    bb84_sift,
    run_bb84,
    run_three_stage,
    three_stage_run,
    verify_commuting,
)
from qkdsim.analysis import qber
from qkdsim.quantum import Basis, RandomStream, RotationTransform, encode

from oracles import binomial_tol, measure_resend_error


def test_alice_prepare_uniform_over_four_states():
    rng = RandomStream(1)
    n = 100_000
    counts = {}
    for _ in range(n):
        _, _, pulse = bb84_alice_prepare(rng)
        counts[pulse.state.angle] = counts.get(pulse.state.angle, 0) + 1
    assert set(counts) == {0.0, 45.0, 90.0, 135.0}
    assert all(abs(c / n - 0.25) < 0.01 for c in counts.values())


def test_alice_prepare_reproducible():
    a = [bb84_alice_prepare(RandomStream(5))[:2] for _ in range(3)]
    assert a[0] == a[1] == a[2]


def test_bob_noiseless_matches():
    alice, bob, bank = RandomStream(2, 0), RandomStream(2, 1), DetectorBank()
    mismatched, agree = 0, 0
    n = 20_000
    for _ in range(n):
        bit, basis, pulse = bb84_alice_prepare(alice)
        b_basis, det = bb84_bob_measure(bank, pulse, bob)
        assert det.clicked
        if b_basis is basis:
            assert det.bit == bit
        else:
            mismatched += 1
            agree += det.bit == bit
    assert abs(agree / mismatched - 0.5) < binomial_tol(0.5, mismatched)


def test_bob_vacuum():
    assert bb84_bob_measure(DetectorBank(), VACUUM, RandomStream(0))[1] == NO_CLICK


def test_sift_baseline():
    tr = run_bb84(100_000, seed=3)
    a, b = bb84_sift(tr.records)
    assert abs(len(a) / 100_000 - 0.5) < 0.005
    assert qber(a, b) == 0.0
    assert a.source_indices == b.source_indices


def test_sift_all_noclick():
    recs = [Bb84PulseRecord(i, 1, Basis.Z, Basis.Z, NO_CLICK) for i in range(10)]
    a, b = bb84_sift(recs)
    assert len(a) == len(b) == 0


def test_sift_flags_match_rule():
    tr = run_bb84(2000, seed=4)
    for r in tr.records:
        assert r.sifted == (r.bob_detection.clicked and r.alice_basis is r.bob_basis)


def test_sift_intercept_resend():
    eve = InterceptResend(RandomStream(5, 2))
    a, b = bb84_sift(run_bb84(100_000, 5, eve.hooks()).records)
    assert abs(qber(a, b) - 0.25) < 0.01


def test_bases_independent():
    tr = run_bb84(100_000, seed=6)
    a = np.array([r.alice_basis is Basis.Z for r in tr.records], float)
    b = np.array([r.bob_basis is Basis.Z for r in tr.records], float)
    assert abs(np.corrcoef(a, b)[0, 1]) < 3 / np.sqrt(len(a))


def test_sifted_key_length_check():
    with pytest.raises(ValueError):
        SiftedKey((1, 0), (3,))


# ---------------------------------------------------------- three-stage

@pytest.mark.parametrize("bit", [0, 1])
def test_three_stage_round_trip_random_grid(bit):
    ra, rb = RandomStream(7, 0), RandomStream(7, 1)
    bank = DetectorBank()
    for i in range(500):
        rec = three_stage_run(bit, Basis.Z, ra, rb, bank=bank, index=i)
        assert rec.bob_detection == Detection(bit)
        assert rec.final_state == encode(bit, Basis.Z)


def test_three_stage_identity_rotations():
    ident = RotationTransform.from_grid(0, 1024)
    rec = three_stage_run(1, Basis.Z, RandomStream(0), RandomStream(1), u_a=ident, u_b=ident)
    assert all(s == encode(1, Basis.Z) for s in rec.stage_states)


def test_three_stage_stage_sequence():
    ua, ub = RotationTransform.from_grid(100, 1024), RotationTransform.from_grid(700, 1024)
    rec = three_stage_run(0, Basis.Z, RandomStream(0), RandomStream(1), u_a=ua, u_b=ub)
    s0 = 90.0
    expected = [s0 + ua.angle, s0 + ua.angle + ub.angle, s0 + ub.angle]
    assert [s.angle for s in rec.stage_states] == pytest.approx([e % 180 for e in expected])


def test_three_stage_taps_see_every_pass():
    seen = []

    def tap(stage):
        def hook(pulses, index):
            seen.append((stage, index))
            return pulses, None
        return hook

    taps = InterceptHooks(tap(1), tap(2), tap(3))
    run_three_stage(3, seed=1, taps=taps)
    assert seen == [(s, i) for i in range(3) for s in (1, 2, 3)]


def test_three_stage_measure_resend_stage1():
    # Eve's result coincides with Alice's half the time; Bob's error is the
    # grid average of 2 cos^2 sin^2 (enumeration oracle), i.e. 1/4
    eve = InterceptResend(RandomStream(8, 2), basis=Basis.Z, stage=1)
    tr = run_three_stage(100_000, seed=8, taps=eve.hooks())
    bob_err = np.mean([r.bob_detection.bit != r.alice_bit for r in tr.records])
    eve_hit = np.mean([tr.eve_notes[r.index].measured_bit == r.alice_bit for r in tr.records])
    assert abs(eve_hit - 0.5) < 0.01
    assert abs(bob_err - measure_resend_error(1024)) < 0.01


def test_verify_commuting():
    rng = RandomStream(9)
    assert verify_commuting(RotationTransform(0), RotationTransform(0))
    for _ in range(1000):
        a, b = RotationTransform(rng.uniform() * 360), RotationTransform(rng.uniform() * 360)
        assert verify_commuting(a, b)
        assert verify_commuting(RotationTransform.from_grid(rng.integer(1024), 1024),
                                RotationTransform.from_grid(rng.integer(1024), 1024))


def test_run_three_stage_deterministic():
    a = run_three_stage(200, seed=10)
    b = run_three_stage(200, seed=10)
    assert [(r.alice_bit, r.u_a, r.u_b, r.bob_detection) for r in a.records] == \
           [(r.alice_bit, r.u_a, r.u_b, r.bob_detection) for r in b.records]
