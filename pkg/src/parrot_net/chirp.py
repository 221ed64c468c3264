"""Wire codec for the 40-byte chirp message and SEQ freshness arithmetic.

Frame layout, all fields big-endian, floats IEEE-754 binary32:

    offset  0   originator address   u32
    offset  4   current position     3 x f32 (x, y, z)
    offset 16   predicted position   3 x f32 (x, y, z)
    offset 28   reward V             f32, in [0, 1]
    offset 32   cohesion             f32, in [0, 1]
    offset 36   SEQ                  u16
    offset 38   TTL                  u16
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

from .kinematics import Vec3

_FRAME = struct.Struct(">I3f3fffHH")

CHIRP_SIZE = _FRAME.size
assert CHIRP_SIZE == 40

_SEQ_MOD = 1 << 16
_SEQ_HALF = 1 << 15


class MalformedFrameError(ValueError):
    """Frame cannot be parsed at all (wrong length)."""


class ChirpValidationError(ValueError):
    """Field values violate the chirp's semantic domain."""


@dataclass(frozen=True, slots=True)
class Chirp:
    """One routing beacon.  Float fields live on the wire as binary32, so a
    decoded chirp carries binary32-quantized values."""

    originator: int
    position: Vec3
    predicted_position: Vec3
    reward: float
    cohesion: float
    seq: int
    ttl: int


def _validate(c: Chirp) -> None:
    if not 0 <= c.originator < (1 << 32):
        raise ChirpValidationError(f"originator {c.originator} out of u32 range")
    if not c.position.is_finite() or not c.predicted_position.is_finite():
        raise ChirpValidationError("position fields must be finite")
    if not (math.isfinite(c.reward) and 0.0 <= c.reward <= 1.0):
        raise ChirpValidationError(f"reward {c.reward} outside [0, 1]")
    if not (math.isfinite(c.cohesion) and 0.0 <= c.cohesion <= 1.0):
        raise ChirpValidationError(f"cohesion {c.cohesion} outside [0, 1]")
    if not 0 <= c.seq < _SEQ_MOD:
        raise ChirpValidationError(f"seq {c.seq} out of u16 range")
    if not 0 <= c.ttl < _SEQ_MOD:
        raise ChirpValidationError(f"ttl {c.ttl} out of u16 range")


def encode_chirp(c: Chirp) -> bytes:
    """Encode to the 40-byte frame; refuses invariant-violating chirps."""
    _validate(c)
    return _FRAME.pack(
        c.originator,
        c.position.x,
        c.position.y,
        c.position.z,
        c.predicted_position.x,
        c.predicted_position.y,
        c.predicted_position.z,
        c.reward,
        c.cohesion,
        c.seq,
        c.ttl,
    )


def decode_chirp(frame: bytes) -> Chirp:
    """Field-exact inverse of encode_chirp.

    Raises MalformedFrameError on wrong length and ChirpValidationError when
    decoded values fall outside the chirp domain (callers drop such frames).
    """
    if len(frame) != CHIRP_SIZE:
        raise MalformedFrameError(f"expected {CHIRP_SIZE} bytes, got {len(frame)}")
    (orig, px, py, pz, qx, qy, qz, reward, cohesion, seq, ttl) = _FRAME.unpack(frame)
    c = Chirp(
        originator=orig,
        position=Vec3(px, py, pz),
        predicted_position=Vec3(qx, qy, qz),
        reward=reward,
        cohesion=cohesion,
        seq=seq,
        ttl=ttl,
    )
    _validate(c)
    return c


def seq_newer(incoming: int, stored: int) -> bool:
    """Wraparound-aware freshness: newer iff ahead by less than half the
    sequence space.  Equal sequence numbers are not newer."""
    return 0 < (incoming - stored) % _SEQ_MOD < _SEQ_HALF
