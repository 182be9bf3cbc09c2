"""Lattice directions and orthogonal frames for wide-stencil second differences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def _canonical(p, q):
    # one representative per antipodal pair: q > 0, or q == 0 and p > 0
    if q < 0 or (q == 0 and p < 0):
        return -p, -q
    return p, q


@dataclass(frozen=True)
class StencilSet:
    width: int
    vectors: np.ndarray  # (D, 2) integer lattice vectors
    lengths: np.ndarray  # (D,) Euclidean lattice lengths
    units: np.ndarray  # (D, 2) unit vectors
    frames: np.ndarray  # (F, 2) direction indices of orthogonal pairs

    @property
    def n_directions(self):
        return len(self.vectors)

    @property
    def n_frames(self):
        return len(self.frames)

    def frame_vectors(self):
        vec = self.vectors.tolist()
        return [(tuple(vec[a]), tuple(vec[b])) for a, b in self.frames]


@lru_cache(maxsize=None)
def build_stencil(width=3):
    """All primitive lattice directions with sup-norm at most ``width``.

    Directions are ordered by sup-norm ring, then by angle, so that ``W=1``
    yields ``(1,0), (0,1), (1,1), (-1,1)`` and frames
    ``((1,0),(0,1)), ((1,1),(-1,1))``.
    """
    if width < 1:
        raise ValueError("stencil width must be >= 1")
    dirs = set()
    for p in range(-width, width + 1):
        for q in range(-width, width + 1):
            if (p, q) != (0, 0) and math.gcd(abs(p), abs(q)) == 1:
                dirs.add(_canonical(p, q))

    def key(v):
        p, q = v
        return (max(abs(p), abs(q)), p * p + q * q, math.atan2(q, p) % math.pi)

    ordered = sorted(dirs, key=key)
    index = {v: n for n, v in enumerate(ordered)}
    frames = []
    seen = set()
    for n, (p, q) in enumerate(ordered):
        m = index.get(_canonical(-q, p))
        if m is not None and frozenset((n, m)) not in seen:
            seen.add(frozenset((n, m)))
            frames.append((n, m))
    vectors = np.array(ordered, dtype=np.int64)
    lengths = np.hypot(vectors[:, 0], vectors[:, 1]).astype(float)
    units = vectors / lengths[:, None]
    out = StencilSet(width, vectors, lengths, units, np.array(frames, dtype=np.int64))
    for arr in (vectors, lengths, units, out.frames):
        arr.setflags(write=False)
    return out
