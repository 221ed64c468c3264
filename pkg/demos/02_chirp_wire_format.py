"""Encode a chirp, inspect its 40-byte wire image, and decode it back."""

from parrot_net.chirp import Chirp, decode_chirp, encode_chirp, seq_newer
from parrot_net.kinematics import Vec3

chirp = Chirp(
    originator=0x0A00002A,
    position=Vec3(120.5, 44.25, 30.0),
    predicted_position=Vec3(134.0, 44.25, 30.0),
    reward=0.64,
    cohesion=0.87,
    seq=312,
    ttl=16,
)

frame = encode_chirp(chirp)
print(f"encoded length: {len(frame)} bytes")
for offset in range(0, len(frame), 4):
    word = frame[offset:offset + 4]
    print(f"  offset {offset:2d}: {word.hex()}")

decoded = decode_chirp(frame)
assert decoded == Chirp(
    originator=chirp.originator,
    position=decoded.position,              # binary32-quantized on the wire
    predicted_position=decoded.predicted_position,
    reward=decoded.reward,
    cohesion=decoded.cohesion,
    seq=chirp.seq,
    ttl=chirp.ttl,
)
print("round trip ok:", decoded.originator == chirp.originator)

print("seq 313 newer than 312:", seq_newer(313, 312))
print("seq 312 newer than 312:", seq_newer(312, 312))
print("seq 2 newer than 65534 (wrap):", seq_newer(2, 65534))
