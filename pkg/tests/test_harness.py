import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pucci_lab.dini import Modulus
from pucci_lab.errors import ResolutionError
from pucci_lab.geometry import OUTER, WALL, DomainSpec
from pucci_lab.harness import (
    DataSpec,
    ProblemSpec,
    check_pointwise_norms,
    fit_c1alpha,
    hopf_constant,
    make_function,
    measure_growth,
    probe,
    run_scenario,
    solve_spec,
)

H = 1.0 / 32


def spec(scenario, domain=None, **kw):
    kw.setdefault("h", H)
    kw.setdefault("K", 4)
    return ProblemSpec(scenario, domain or DomainSpec.half_ball(), **kw)


@pytest.fixture(scope="module")
def hopf_field():
    return solve_spec(spec("hopf"))


class TestDataSpec:
    @pytest.mark.parametrize(
        "desc, x, piece, expected",
        [
            (DataSpec("zero"), (0.3, 0.4), None, 0.0),
            (DataSpec("constant", value=2.5), (0.3, 0.4), None, 2.5),
            (DataSpec("linear", c=(1.0, 2.0, -1.0)), (0.3, 0.4), None, 1.2),
            (DataSpec("product", scale=2.0), (0.3, 0.4), None, 0.24),
            (DataSpec("radial_power", p=1.5), (0.3, 0.4), None, 0.5**1.5),
            (DataSpec("half_plane_harmonic", p=2.0), (0.3, 0.4), None, 0.09 - 0.16),
            (DataSpec("wall_outer", wall=0.5, outer=2.0), (0.3, 0.0), WALL, 0.5),
            (DataSpec("wall_outer", wall=0.5, outer=2.0), (0.6, 0.8), OUTER, 2.0),
        ],
    )
    def test_values(self, desc, x, piece, expected):
        fn = make_function(desc)
        val = fn(np.array([x[0]]), np.array([x[1]]), None if piece is None else np.array([piece]))
        assert val[0] == pytest.approx(expected)

    def test_half_plane_harmonic_vanishes_on_axis_for_odd_half_powers(self):
        fn = make_function(DataSpec("half_plane_harmonic", p=2.5))
        # cos(5 pi / 4) < 0 on the negative axis, cos(0) = 1 on the positive one
        assert fn(np.array([1.0]), np.array([0.0]))[0] == pytest.approx(1.0)

    def test_notch_shelf(self):
        dom = DomainSpec.notch(0.2)
        fn = make_function(DataSpec("notch_shelf", value=1.0), dom)
        out = fn(np.array([0.5, 0.1]), np.array([0.2, 0.0]), np.array([WALL, WALL]))
        np.testing.assert_array_equal(out, [1.0, 0.0])
        with pytest.raises(ValueError):
            make_function(DataSpec("notch_shelf"))(np.array([0.5]), np.array([0.2]), np.array([WALL]))

    @pytest.mark.parametrize("desc", [DataSpec("linear", c=(1, 2, 3)), DataSpec("wall_outer", 0, wall=1, outer=3),
                                      DataSpec("half_plane_harmonic", p=2.5, scale=2)])
    def test_round_trip_and_scaling(self, desc):
        assert DataSpec.from_dict(desc.to_dict()) == desc
        fn, fn2 = make_function(desc), make_function(desc.scaled(3.0))
        x = np.array([0.3]), np.array([0.2]), np.array([OUTER])
        assert fn2(*x)[0] == pytest.approx(3 * fn(*x)[0])

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            DataSpec("cubic")


class TestProblemSpec:
    def test_defaults(self):
        s = spec("lipschitz")
        assert s.operator == "pucci_plus" and s.g.kind == "radial_power"
        assert len(s.radii) == s.K - 1 and s.radii[0] == 0.25

    def test_resolution(self):
        with pytest.raises(ResolutionError):
            ProblemSpec("hopf", DomainSpec.half_ball(), h=1.0 / 32, K=6)

    @pytest.mark.parametrize("l", [(1.0, 0.0), (0.6, 0.6), (0.6, -0.8)])
    def test_bad_direction(self, l):
        with pytest.raises(ValueError):
            spec("hopf", l=l)

    @pytest.mark.parametrize(
        "scenario, domain",
        [
            ("anti_lipschitz", DomainSpec.graph("exterior_minus", Modulus.power(0.5))),
            ("anti_lipschitz", DomainSpec.graph("interior_plus", Modulus.log_inverse(1.0))),
            ("lipschitz", DomainSpec.graph("exterior_minus", Modulus.log_inverse(1.0))),
            ("hopf", DomainSpec.graph("exterior_minus", Modulus.power(0.5))),
            ("notch_hopf", DomainSpec.half_ball()),
        ],
    )
    def test_incompatible_domains(self, scenario, domain):
        with pytest.raises(ValueError):
            spec(scenario, domain)

    def test_round_trip(self):
        s = spec("anti_hopf", DomainSpec.graph("interior_plus", Modulus.log_inverse(1.0)),
                 l=(0.6, 0.8), omega_g=Modulus.power(0.5), max_iter=50)
        assert ProblemSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s


class TestProbe:
    def test_nodes_and_linear_exactness(self):
        s = spec("flat_c1alpha", g=DataSpec("linear", c=(0.5, 1.0, 2.0)), operator="laplace")
        fld = solve_spec(s)
        pts = np.array([[0.0, 0.5], [0.1, 0.37], [-0.33, 0.2], [0.01, 0.01]])
        np.testing.assert_allclose(probe(fld, pts), 0.5 + pts[:, 0] + 2 * pts[:, 1], atol=1e-9)

    def test_boundary_node(self, hopf_field):
        assert probe(hopf_field, [(0.0, 0.0)])[0] == 0.0

    def test_outside(self, hopf_field):
        with pytest.raises(ResolutionError):
            probe(hopf_field, [(0.0, -0.5)])


class TestGrowth:
    def test_hopf_report(self, hopf_field, tmp_path):
        s = spec("hopf")
        _, rep = run_scenario(s, field=hopf_field)
        assert rep.passed and np.all(rep.q > 0)
        assert rep.normalization == pytest.approx(probe(hopf_field, [(0, 0.5)])[0])
        rep.write_csv(tmp_path / "g.csv")
        rows = list(csv.reader(open(tmp_path / "g.csv")))
        assert rows[0] == ["k", "r", "Q", "q", "omega_tilde_predicted", "verdict"]
        assert len(rows) == s.K

    def test_scaling_equivariance(self):
        # lipschitz is not normalised, so Q scales with the data
        s = spec("lipschitz")
        _, r1 = run_scenario(s)
        _, r2 = run_scenario(ProblemSpec.from_dict({**s.to_dict(), "data": {"g": s.g.scaled(3.0).to_dict()}}))
        np.testing.assert_allclose(r2.Q, 3 * r1.Q, rtol=1e-7)
        assert r1.verdicts == r2.verdicts

    def test_normalised_scenario_is_scale_invariant(self, hopf_field):
        s = spec("hopf")
        a = measure_growth(s, hopf_field)
        b = measure_growth(s.__class__(**{**s.__dict__, "g": s.g.scaled(5.0)}), hopf_field.scaled(5.0))
        np.testing.assert_allclose(a.q, b.q, rtol=1e-12)

    def test_mirror_symmetry(self):
        f = solve_spec(spec("hopf"))
        gv = f.grid_values()
        np.testing.assert_allclose(gv, gv[:, ::-1], atol=1e-8)

    def test_sandwich(self):
        # 0/1 data and f = 0: the solution lies between the constant barriers
        f = solve_spec(spec("hopf"))
        assert np.all(f.values >= -1e-12) and np.all(f.values <= 1 + 1e-12)

    def test_anti_lipschitz_small(self):
        dom = DomainSpec.graph("exterior_minus", Modulus.log_inverse(1.0))
        _, rep = run_scenario(ProblemSpec("anti_lipschitz", dom, h=1.0 / 64, K=5))
        assert np.all(np.isfinite(rep.omega_tilde)) and "certified_ratio" in rep.verdicts


class TestPointwiseNorms:
    def test_zero(self):
        assert check_pointwise_norms(lambda a, b: 0 * a, "C01").C == 0.0

    def test_abs_is_lipschitz_one(self):
        r = check_pointwise_norms(lambda a, b: np.hypot(a, b), "C01")
        assert r.C == pytest.approx(1.0) and r.passed

    def test_three_halves_power(self):
        r = check_pointwise_norms(lambda a, b: np.hypot(a, b) ** 1.5, "C1Dini",
                                  Modulus.power(0.5))
        assert r.C == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(r.gradient, 0.0, atol=1e-9)

    def test_zero_modulus_flags_unbounded(self):
        r = check_pointwise_norms(lambda a, b: a * a, "C1Dini", Modulus.zero(), gradient=(0, 0))
        assert r.unbounded and not r.passed

    def test_source_norm(self):
        r = check_pointwise_norms(lambda a, b: 1 + 0 * a, "Cm1Dini", Modulus.power(1.0),
                                  radii=[1.0, 0.5, 0.25])
        # ||1||_{L2(B_r)} ~ sqrt(pi) r, so the ratio is about sqrt(pi)
        assert r.C == pytest.approx(np.sqrt(np.pi), rel=0.05)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            check_pointwise_norms(lambda a, b: a, "C2", Modulus.zero())

    @given(st.floats(0.1, 5.0))
    def test_c01_homogeneous(self, t):
        base = check_pointwise_norms(lambda a, b: np.abs(a) + b * b, "C01").C
        assert check_pointwise_norms(lambda a, b: t * (np.abs(a) + b * b), "C01").C == pytest.approx(t * base)


class TestFlat:
    def test_linear_data_exact(self):
        s = spec("flat_c1alpha", g=DataSpec("linear", c=(0.0, 0.0, 0.7)), h=1.0 / 64)
        fit = fit_c1alpha(solve_spec(s))
        assert fit.exact_linear and fit.a == pytest.approx(0.7, abs=1e-9)

    def test_hopf_constant_positive(self, hopf_field):
        assert hopf_constant(hopf_field) > 0

    def test_notch_family_positive_and_decreasing(self):
        from pucci_lab.harness import notch_hopf_check

        r = notch_hopf_check(h=1.0 / 32)
        assert r.passed and r.c_min == min(r.c)
        assert all(a > b > 0 for a, b in zip(r.c, r.c[1:]))
        # the 0.5 c(0) floor does not hold for the raised shelves
        assert r.c_min < 0.5 * r.c[0]
