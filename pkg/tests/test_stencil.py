import math

import numpy as np
import pytest

from pucci_lab.stencil import build_stencil


class TestStencil:
    def test_width_one(self):
        s = build_stencil(1)
        assert s.frame_vectors() == [((1, 0), (0, 1)), ((1, 1), (-1, 1))]
        assert s.n_directions == 4

    @pytest.mark.parametrize("W, n_dirs, n_frames", [(1, 4, 2), (2, 8, 4), (3, 16, 8)])
    def test_counts(self, W, n_dirs, n_frames):
        s = build_stencil(W)
        assert (s.n_directions, s.n_frames) == (n_dirs, n_frames)

    @pytest.mark.parametrize("W", [1, 2, 3, 4])
    def test_directions_primitive_and_canonical(self, W):
        s = build_stencil(W)
        seen = set()
        for p, q in s.vectors.tolist():
            assert math.gcd(abs(p), abs(q)) == 1 and max(abs(p), abs(q)) <= W
            assert (-p, -q) not in seen
            seen.add((p, q))

    @pytest.mark.parametrize("W", [1, 2, 3, 4])
    def test_frames_cover_and_are_orthogonal(self, W):
        s = build_stencil(W)
        assert sorted(np.unique(s.frames).tolist()) == list(range(s.n_directions))
        for a, b in s.frames:
            assert s.vectors[a] @ s.vectors[b] == 0

    def test_units_and_lengths(self):
        s = build_stencil(3)
        np.testing.assert_allclose(np.hypot(*s.units.T), 1.0)
        np.testing.assert_allclose(s.units * s.lengths[:, None], s.vectors)

    def test_immutable(self):
        with pytest.raises(ValueError):
            build_stencil(3).vectors[0, 0] = 7

    def test_invalid_width(self):
        with pytest.raises(ValueError):
            build_stencil(0)
