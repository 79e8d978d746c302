"""Linear-polarization qubits: encoding, measurement, rotations and randomness.

A qubit is represented by a single real polarization angle in degrees,
canonicalized into [0, 180). Rotations live on [0, 360) and may carry an
integer grid index so that three-stage round trips stay exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

ANGLE_TOL = 1e-9
_BUFFER = 4096
_MASK64 = (1 << 64) - 1


class ConfigurationError(ValueError):
    """Raised for invalid simulation parameters."""


def canonical_angle(angle: float) -> float:
    a = math.fmod(angle, 180.0)
    if a < 0.0:
        a += 180.0
    # fmod of a tiny negative number can land exactly on 180.0
    if a >= 180.0 - ANGLE_TOL / 2:
        a = 0.0
    return a


def angle_distance(a: float, b: float) -> float:
    """Distance between two polarization angles on the 180-degree circle."""
    d = abs(canonical_angle(a - b))
    return min(d, 180.0 - d)


class Basis(enum.Enum):
    Z = "Z"
    X = "X"

    @property
    def bit0_angle(self) -> float:
        return 90.0 if self is Basis.Z else 135.0

    @property
    def bit1_angle(self) -> float:
        return 0.0 if self is Basis.Z else 45.0

    @property
    def other(self) -> Basis:
        return Basis.X if self is Basis.Z else Basis.Z

    def angle_for(self, bit: int) -> float:
        return self.bit1_angle if bit else self.bit0_angle

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class PolarizationState:
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", canonical_angle(self.angle))

    def __eq__(self, other):
        if not isinstance(other, PolarizationState):
            return NotImplemented
        return angle_distance(self.angle, other.angle) <= ANGLE_TOL

    def __hash__(self):
        return hash(round(self.angle, 6) % 180.0)


@dataclass(frozen=True, slots=True)
class RotationTransform:
    """A rotation of the polarization plane by ``angle`` degrees.

    When ``grid_size`` is set, ``grid_index`` is authoritative and ``angle``
    is derived as ``360 * grid_index / grid_size``.
    """

    angle: float = 0.0
    grid_index: int | None = None
    grid_size: int | None = None

    def __post_init__(self):
        if self.grid_size is not None:
            if self.grid_size < 1:
                raise ConfigurationError("grid_size must be >= 1")
            idx = (self.grid_index or 0) % self.grid_size
            object.__setattr__(self, "grid_index", idx)
            object.__setattr__(self, "angle", 360.0 * idx / self.grid_size)
        else:
            a = math.fmod(self.angle, 360.0)
            if a < 0.0:
                a += 360.0
            if a >= 360.0 - ANGLE_TOL / 2:
                a = 0.0
            object.__setattr__(self, "angle", a)

    @classmethod
    def from_grid(cls, index: int, grid_size: int) -> RotationTransform:
        return cls(grid_index=index, grid_size=grid_size)

    @property
    def is_identity(self) -> bool:
        if self.grid_size is not None:
            return self.grid_index == 0
        return min(self.angle, 360.0 - self.angle) <= ANGLE_TOL

    def inverse(self) -> RotationTransform:
        return inverse(self)

    def __eq__(self, other):
        if not isinstance(other, RotationTransform):
            return NotImplemented
        if self.grid_size is not None and self.grid_size == other.grid_size:
            return self.grid_index == other.grid_index
        d = abs(self.angle - other.angle)
        return min(d, 360.0 - d) <= ANGLE_TOL

    def __hash__(self):
        return hash(round(self.angle, 6) % 360.0)


IDENTITY = RotationTransform(0.0)


_ENCODED = {(b, bit): PolarizationState(b.angle_for(bit)) for b in Basis for bit in (0, 1)}


def encode(bit: int, basis: Basis) -> PolarizationState:
    try:
        return _ENCODED[basis, bit]
    except KeyError:
        raise ValueError(f"bit must be 0 or 1, got {bit!r}") from None


def prob_one(state: PolarizationState, basis: Basis) -> float:
    """Probability that measuring ``state`` in ``basis`` yields bit 1."""
    d = angle_distance(state.angle, basis.bit1_angle)
    if d <= ANGLE_TOL:
        return 1.0
    if d >= 90.0 - ANGLE_TOL:
        return 0.0
    return math.cos(math.radians(d)) ** 2


def measure(state: PolarizationState, basis: Basis, rng: RandomStream) -> tuple[int, PolarizationState]:
    """Born-rule measurement; the state collapses onto the outcome's eigenstate."""
    bit = 1 if rng.uniform() < prob_one(state, basis) else 0
    return bit, encode(bit, basis)


def apply_rotation(state: PolarizationState, rot: RotationTransform) -> PolarizationState:
    return PolarizationState(state.angle + rot.angle)


def compose(a: RotationTransform, b: RotationTransform) -> RotationTransform:
    if a.grid_size is not None and a.grid_size == b.grid_size:
        return RotationTransform(grid_index=a.grid_index + b.grid_index, grid_size=a.grid_size)
    return RotationTransform(a.angle + b.angle)


def inverse(rot: RotationTransform) -> RotationTransform:
    if rot.grid_size is not None:
        return RotationTransform(grid_index=-rot.grid_index, grid_size=rot.grid_size)
    return RotationTransform(360.0 - rot.angle)


@dataclass
class RandomStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    Draw number ``c`` is the ``c``-th double of a Philox generator keyed by
    the pair, independent of how draws are batched. Confine one stream to
    one party of one trial.
    """

    seed: int
    stream_id: int = 0
    counter: int = field(default=0, init=False)

    def __post_init__(self):
        key = ((self.stream_id & _MASK64) << 64) | (self.seed & _MASK64)
        self._gen = np.random.Generator(np.random.Philox(key=key))
        self._buf: list[float] = []
        self._pos = 0

    def uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(_BUFFER).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        self.counter += 1
        return u

    def uniforms(self, n: int) -> np.ndarray:
        """Next ``n`` draws as an array (same values as ``n`` calls to uniform)."""
        head = self._buf[self._pos:self._pos + n]
        self._pos += len(head)
        rest = n - len(head)
        out = np.empty(n)
        out[:len(head)] = head
        if rest:
            out[len(head):] = self._gen.random(rest)
        self.counter += n
        return out

    def integer(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return min(int(self.uniform() * n), n - 1)

    def spawn(self, stream_id: int) -> RandomStream:
        return RandomStream(self.seed, stream_id)


def draw_bit(rng: RandomStream) -> int:
    return 1 if rng.uniform() < 0.5 else 0


def draw_basis(rng: RandomStream) -> Basis:
    return Basis.Z if rng.uniform() < 0.5 else Basis.X


def draw_rotation(rng: RandomStream, grid_size: int) -> RotationTransform:
    if grid_size < 1:
        raise ConfigurationError(f"grid_size must be >= 1, got {grid_size}")
    return RotationTransform(grid_index=rng.integer(grid_size), grid_size=grid_size)
