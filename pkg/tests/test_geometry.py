import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pucci_lab.dini import Modulus
from pucci_lab.errors import ResolutionError
from pucci_lab.geometry import (
    EXTERIOR,
    INTERIOR,
    OUTER,
    WALL,
    DomainSpec,
    inside,
    modulus_of_domain,
    rasterize,
)
from pucci_lab.stencil import build_stencil


def node(mask, i, j):
    return int(mask.node_index[j + mask.N, i + mask.N])


class TestInside:
    @pytest.mark.parametrize(
        "spec, x, expected",
        [
            (DomainSpec.graph("interior_plus", Modulus.power(0.5)), (0.25, 0.25), True),
            (DomainSpec.graph("interior_plus", Modulus.power(0.5)), (0.25, 0.1), False),
            (DomainSpec.graph("exterior_minus", Modulus.power(0.5)), (0.0, -1e-9), False),
            (DomainSpec.graph("exterior_minus", Modulus.constant(1)), (0.5, -0.4), True),
            (DomainSpec.notch(0.3), (0.3, 0.2), False),
            (DomainSpec.notch(0.3), (0.2, 0.2), True),
            (DomainSpec.notch(0.3), (0.5, 0.35), True),
            (DomainSpec.half_ball(), (0.0, 0.999), True),
            (DomainSpec.half_ball(), (0.0, 1.0), False),
        ],
    )
    def test_examples(self, spec, x, expected):
        assert inside(spec, x) is expected

    @pytest.mark.parametrize(
        "spec",
        [DomainSpec.half_ball(), DomainSpec.notch(0.2), DomainSpec.wedge(1.0),
         DomainSpec.graph("interior_plus", Modulus.log_inverse(1.0))],
    )
    def test_origin_on_boundary(self, spec):
        assert not inside(spec, (0.0, 0.0))
        assert inside(spec, (0.0, 1e-6))

    def test_half_ball_is_flat_graph(self):
        pts = np.random.default_rng(1).uniform(-1, 1, (2000, 2))
        flat = DomainSpec.graph("exterior_minus", Modulus.zero())
        np.testing.assert_array_equal(inside(DomainSpec.half_ball(), pts), inside(flat, pts))

    @given(st.floats(0.1, 1.0), st.floats(0.0, 1.0))
    def test_containment_monotone(self, alpha, extra):
        w1 = Modulus.power(alpha, 1.0)
        w2 = Modulus.power(alpha, 1.0 + extra)  # w1 <= w2
        pts = np.random.default_rng(0).uniform(-1, 1, (500, 2))
        i1 = inside(DomainSpec.graph("interior_plus", w1), pts)
        i2 = inside(DomainSpec.graph("interior_plus", w2), pts)
        e1 = inside(DomainSpec.graph("exterior_minus", w1), pts)
        e2 = inside(DomainSpec.graph("exterior_minus", w2), pts)
        assert not np.any(i2 & ~i1)
        assert not np.any(e1 & ~e2)


class TestModulusOfDomain:
    def test_graph(self):
        w = Modulus.power(0.5)
        assert modulus_of_domain(DomainSpec.graph("interior_plus", w)) == w

    def test_wedge(self):
        assert modulus_of_domain(DomainSpec.wedge(2.0)) == Modulus.constant(2.0)

    @pytest.mark.parametrize("spec", [DomainSpec.half_ball(), DomainSpec.notch(0.1)])
    def test_not_applicable(self, spec):
        with pytest.raises(ValueError):
            modulus_of_domain(spec)


class TestRasterize:
    def test_flat_wall_arms(self):
        m = rasterize(DomainSpec.half_ball(), 1.0 / 8, build_stencil(1))
        n = node(m, 0, 1)
        assert m.t[n, 1, 1] == pytest.approx(0.125, abs=1e-12 * m.h)  # (0,1) direction, minus side
        assert m.nbr[n, 1, 1] == -1
        # deep nodes have all nominal arms
        deep = node(m, 0, 3)
        np.testing.assert_allclose(m.t[deep], m.h * m.stencil.lengths[:, None] * np.ones((1, 2)))
        assert np.all(m.nbr[deep] >= 0)

    def test_half_ball_arms_exact(self, half_ball_32):
        m = half_ball_32
        ux, uy = m.stencil.units.T
        for s, sgn in enumerate((1.0, -1.0)):
            cut = m.nbr[:, :, s] < 0
            n, d = np.nonzero(cut)
            x, y = m.x[n, 0], m.x[n, 1]
            dx, dy = sgn * ux[d], sgn * uy[d]
            # exact exit distance: the first of the wall y = 0 and the unit circle
            with np.errstate(divide="ignore"):
                t_wall = np.where(dy < 0, -y / dy, np.inf)
            b = x * dx + y * dy
            t_circ = -b + np.sqrt(b * b - (x * x + y * y - 1.0))
            exact = np.minimum(t_wall, t_circ)
            nominal = m.stencil.lengths[d] * m.h
            hit_in_range = exact <= nominal
            np.testing.assert_allclose(m.t[n, d, s][hit_in_range], exact[hit_in_range], atol=1e-10)

    def test_constant_graph_wall_hit(self):
        m = rasterize(DomainSpec.graph("exterior_minus", Modulus.constant(1.0)), 1.0 / 64)
        down = 1  # direction (0, 1), minus side is (0, -1)
        checked = 0
        for n in range(m.n_interior):
            x1, x2 = m.x[n]
            if m.nbr[n, down, 1] < 0 and m.piece[n, down, 1] == WALL:
                assert m.t[n, down, 1] == pytest.approx(abs(x1) + x2, abs=1e-12 * m.h)
                checked += 1
        assert checked > 50

    def test_arms_positive_and_bounded(self, half_ball_16):
        m = half_ball_16
        nominal = m.stencil.lengths[None, :, None] * m.h
        assert np.all(m.t > 0) and np.all(m.t <= nominal * (1 + 1e-12))

    def test_cut_arms_have_hits(self, half_ball_16):
        m = half_ball_16
        cut = m.nbr < 0
        assert not np.isnan(m.hit[..., 0][cut]).any()
        assert set(np.unique(m.piece[cut]).tolist()) <= {WALL, OUTER}

    def test_wedge_symmetric(self):
        m = rasterize(DomainSpec.wedge(1.0), 1.0 / 32)
        np.testing.assert_array_equal(m.roles, m.roles[:, ::-1])

    def test_roles_partition(self, half_ball_16):
        roles = half_ball_16.roles
        assert set(np.unique(roles).tolist()) <= {EXTERIOR, INTERIOR, WALL, OUTER}
        assert (roles == INTERIOR).sum() == half_ball_16.n_interior

    def test_origin_is_wall_node(self, half_ball_16):
        assert half_ball_16.roles[half_ball_16.origin_index] == WALL

    def test_refinement_keeps_deep_nodes(self):
        coarse = rasterize(DomainSpec.notch(0.2), 1.0 / 16)
        fine = rasterize(DomainSpec.notch(0.2), 1.0 / 32)
        for n in range(coarse.n_interior):
            i, j = coarse.ij[n]
            if np.all(coarse.t[n] >= 2 * coarse.h - 1e-12):
                assert fine.roles[2 * j + fine.N, 2 * i + fine.N] == INTERIOR

    def test_h_precondition(self):
        with pytest.raises(ValueError):
            rasterize(DomainSpec.half_ball(), 0.25)

    def test_thin_domain(self):
        spec = DomainSpec.graph("interior_plus", Modulus.constant(20.0))
        with pytest.raises(ResolutionError) as exc:
            rasterize(spec, 1.0 / 16)
        assert exc.value.node is not None
        m = rasterize(spec, 1.0 / 16, thin="snap")
        assert np.all((m.t[:, :, 0] + m.t[:, :, 1]) >= m.h / 4)

    def test_csv(self, tmp_path, half_ball_16):
        half_ball_16.write_csv(tmp_path / "mask.csv")
        with open(tmp_path / "mask.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["i", "j", "x1", "x2", "role"]
        assert len(rows) - 1 == half_ball_16.roles.size

    @pytest.mark.parametrize(
        "spec",
        [DomainSpec.half_ball(2.0), DomainSpec.notch(0.3), DomainSpec.wedge(0.5, side="interior_plus"),
         DomainSpec.graph("exterior_minus", Modulus.log_inverse(1.0))],
    )
    def test_spec_round_trip(self, spec):
        assert DomainSpec.from_dict(spec.to_dict()) == spec
