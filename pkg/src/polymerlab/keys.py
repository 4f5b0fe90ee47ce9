"""Canonical vertex keys.

Every vertex of every graph family is addressed by a ``VertexKey``: a one-byte
family tag plus a tuple of signed integers (lattice coordinates, tree paths,
mixed records).  The byte encoding below is *frozen*: the disorder field
hashes it, so changing it silently changes every sampled environment.

Encoding (documented contract)
------------------------------
``bytes = tag (1 byte) || varint(zigzag(p)) for p in payload``

* zigzag: ``n -> 2n`` for ``n >= 0``, ``n -> -2n - 1`` for ``n < 0``.
* varint: big-endian base-128; every byte except the last has the top bit
  set, payload bits are the lower 7, most significant group first.

The encoding is injective per family: tag and payload are recoverable.
"""

from __future__ import annotations

from functools import total_ordering
from typing import Iterator, Tuple

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF

# Frozen family tags (documented; new families append, never renumber).
FAMILY_TAGS = {
    "lattice": 1,
    "half_lattice": 2,
    "percolation": 3,
    "gw_tree": 4,
    "canopy": 5,
    "pipes_lattice": 6,
    "double_exp_ray_tree": 7,
    "t2_times_z2": 8,
    "sierpinski_gasket": 9,
    "conductance_segment": 10,
    "explicit_finite": 11,
}


def zigzag(n: int) -> int:
    return (n << 1) if n >= 0 else ((-n << 1) - 1)


def unzigzag(u: int) -> int:
    return (u >> 1) if (u & 1) == 0 else -((u + 1) >> 1)


def encode_varint(u: int) -> bytes:
    if u < 0:
        raise ValueError("varint input must be non-negative")
    groups = [u & 0x7F]
    u >>= 7
    while u:
        groups.append(u & 0x7F)
        u >>= 7
    groups.reverse()
    return bytes(g | 0x80 for g in groups[:-1]) + bytes(groups[-1:])


def decode_varints(data: bytes) -> Iterator[int]:
    acc = 0
    loaded = False
    for b in data:
        acc = (acc << 7) | (b & 0x7F)
        loaded = True
        if not (b & 0x80):
            yield acc
            acc = 0
            loaded = False
    if loaded:
        raise ValueError("truncated varint stream")


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _U64
    return h


@total_ordering
class VertexKey:
    """Immutable canonical vertex address: (family_tag, payload ints)."""

    __slots__ = ("family_tag", "payload", "_bytes", "_digest", "_hash")

    def __init__(self, family_tag: int, payload: Tuple[int, ...]):
        if not 0 <= family_tag <= 255:
            raise ValueError("family_tag must fit in one byte")
        object.__setattr__(self, "family_tag", family_tag)
        object.__setattr__(self, "payload", tuple(int(p) for p in payload))
        object.__setattr__(self, "_bytes", None)
        object.__setattr__(self, "_digest", None)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("VertexKey is immutable")

    def to_bytes(self) -> bytes:
        b = self._bytes
        if b is None:
            b = bytes([self.family_tag]) + b"".join(
                encode_varint(zigzag(p)) for p in self.payload
            )
            object.__setattr__(self, "_bytes", b)
        return b

    @classmethod
    def from_bytes(cls, data: bytes) -> "VertexKey":
        if not data:
            raise ValueError("empty key")
        return cls(data[0], tuple(unzigzag(u) for u in decode_varints(data[1:])))

    @property
    def digest(self) -> int:
        """64-bit FNV-1a of the byte encoding; the disorder field's vertex word."""
        d = self._digest
        if d is None:
            d = fnv1a64(self.to_bytes())
            object.__setattr__(self, "_digest", d)
        return d

    def __eq__(self, other):
        return (
            isinstance(other, VertexKey)
            and self.family_tag == other.family_tag
            and self.payload == other.payload
        )

    def __lt__(self, other):
        if not isinstance(other, VertexKey):
            return NotImplemented
        return (self.family_tag, self.payload) < (other.family_tag, other.payload)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.family_tag, self.payload))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"VertexKey({self.family_tag}, {self.payload})"
