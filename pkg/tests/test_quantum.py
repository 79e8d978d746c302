import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkdsim.quantum import (
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
    prob_one,
)

from oracles import binomial_tol

angles = st.floats(-1e4, 1e4, allow_nan=False)


@pytest.mark.parametrize("bit,basis,angle", [
    (1, Basis.Z, 0.0), (0, Basis.Z, 90.0), (0, Basis.X, 135.0), (1, Basis.X, 45.0),
])
def test_encode(bit, basis, angle):
    assert encode(bit, basis).angle == angle


def test_encode_rejects_non_bits():
    with pytest.raises(ValueError):
        encode(2, Basis.Z)


def test_basis_angles_orthogonal():
    for b in Basis:
        assert abs(b.bit0_angle - b.bit1_angle) == 90.0


@given(angles)
def test_state_canonical(a):
    s = PolarizationState(a)
    assert 0.0 <= s.angle < 180.0
    assert s == PolarizationState(a + 180.0)


def test_horizontal_in_z_is_deterministic():
    rng = RandomStream(1)
    assert all(measure(PolarizationState(0.0), Basis.Z, rng)[0] == 1 for _ in range(1000))


def test_horizontal_in_x_is_even():
    rng = RandomStream(2)
    n = 100_000
    ones = sum(measure(PolarizationState(0.0), Basis.X, rng)[0] for _ in range(n))
    assert abs(ones / n - 0.5) < binomial_tol(0.5, n, 3)


def test_born_rule_30_degrees():
    # closed form cos^2(30) = 3/4 against 10^6 draws
    rng = RandomStream(3)
    n = 1_000_000
    u = np.array([measure(PolarizationState(30.0), Basis.Z, rng)[0] for _ in range(n)])
    assert abs(u.mean() - 0.75) < binomial_tol(0.75, n)


@given(angles, st.sampled_from(list(Basis)))
def test_born_normalization(a, basis):
    p1 = prob_one(PolarizationState(a), basis)
    # bit-0 probability is the projection onto the bit-0 axis
    p0 = math.cos(math.radians(a - basis.bit0_angle)) ** 2
    assert 0.0 <= p1 <= 1.0
    assert p0 + p1 == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50)
@given(angles, st.sampled_from(list(Basis)), st.integers(0, 2**32))
def test_collapse_idempotent(a, basis, seed):
    rng = RandomStream(seed)
    bit, post = measure(PolarizationState(a), basis, rng)
    assert post == encode(bit, basis)
    for _ in range(20):
        assert measure(post, basis, rng) == (bit, post)


@pytest.mark.parametrize("basis", list(Basis))
@pytest.mark.parametrize("bit", [0, 1])
def test_conjugate_basis_symmetry(basis, bit):
    rng = RandomStream(4, bit)
    n = 100_000
    ones = sum(measure(encode(bit, basis), basis.other, rng)[0] for _ in range(n))
    assert abs(ones / n - 0.5) < binomial_tol(0.5, n, 3)


@pytest.mark.parametrize("state,rot,expected", [(45.0, 0.0, 45.0), (0.0, 90.0, 90.0), (10.0, 350.0, 0.0)])
def test_apply_rotation(state, rot, expected):
    assert apply_rotation(PolarizationState(state), RotationTransform(rot)) == PolarizationState(expected)


def test_compose_examples():
    assert compose(RotationTransform(90), RotationTransform(270)).is_identity
    assert compose(RotationTransform(100), RotationTransform(300)).angle == pytest.approx(40.0)


@pytest.mark.parametrize("angle,inv", [(0.0, 0.0), (90.0, 270.0)])
def test_inverse_examples(angle, inv):
    assert inverse(RotationTransform(angle)).angle == inv


@given(st.floats(0, 720, allow_nan=False), st.floats(0, 720, allow_nan=False), angles)
def test_rotation_laws_real_angles(a, b, s):
    ra, rb = RotationTransform(a), RotationTransform(b)
    assert compose(ra, rb) == compose(rb, ra)
    assert compose(ra, inverse(ra)).is_identity
    state = PolarizationState(s)
    assert apply_rotation(state, compose(ra, rb)) == apply_rotation(apply_rotation(state, ra), rb)


@given(st.integers(-5000, 5000), st.integers(-5000, 5000), st.integers(-5000, 5000))
def test_grid_rotation_associative(i, j, k):
    a, b, c = (RotationTransform.from_grid(x, 1024) for x in (i, j, k))
    assert compose(compose(a, b), c) == compose(a, compose(b, c))
    assert compose(a, b).grid_index == (i + j) % 1024


def test_rotations_preserve_statistics():
    # rotate both the state and the analyzer: same outcome distribution
    rng1, rng2 = RandomStream(5, 0), RandomStream(5, 1)
    n = 50_000
    s, r = PolarizationState(20.0), RotationTransform(33.0)
    a = sum(measure(s, Basis.Z, rng1)[0] for _ in range(n)) / n
    rotated = apply_rotation(s, r)
    # measuring in a Z basis rotated by r is measuring the un-rotated state in Z
    b = sum(measure(apply_rotation(rotated, inverse(r)), Basis.Z, rng2)[0] for _ in range(n)) / n
    p = prob_one(s, Basis.Z)
    assert abs(a - p) < binomial_tol(p, n) and abs(b - p) < binomial_tol(p, n)


def test_stream_determinism_and_batching():
    a, b = RandomStream(42, 7), RandomStream(42, 7)
    xs = [a.uniform() for _ in range(5000)]
    ys = list(b.uniforms(10)) + [b.uniform() for _ in range(4990)]
    assert xs == ys
    assert a.counter == b.counter == 5000


def test_streams_independent():
    a = RandomStream(42, 0).uniforms(100_000)
    b = RandomStream(42, 1).uniforms(100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(100_000)
    assert not np.array_equal(a[:10], RandomStream(43, 0).uniforms(10))


def test_draw_basis_uniform():
    rng = RandomStream(6)
    z = sum(draw_basis(rng) is Basis.Z for _ in range(100_000)) / 100_000
    assert abs(z - 0.5) < 0.01


def test_draw_bit_uniform():
    rng = RandomStream(7)
    assert abs(sum(draw_bit(rng) for _ in range(100_000)) / 100_000 - 0.5) < 0.01


def test_draw_rotation_grid():
    rng = RandomStream(8)
    seen = {draw_rotation(rng, 4).angle for _ in range(200)}
    assert seen == {0.0, 90.0, 180.0, 270.0}


def test_draw_rotation_zero_grid():
    with pytest.raises(ConfigurationError):
        draw_rotation(RandomStream(0), 0)
