import io
import math

import numpy as np
import pytest
from scipy.special import jnp_zeros

from sloshiso import geometry as geo, inequalities as iq
from sloshiso.fem import NoConvergenceError
from sloshiso.sloshing import DepthSpec

# 30-digit references
J1P1 = 1.84118378134065930264362951364
PI_TANH_PI_OVER_2 = 2.88131903995502918531786500583


def shape_of(kind, **params):
    boundary_points = params.pop("boundary_points", geo.DEFAULT_BOUNDARY_POINTS)
    vertices = params.pop("vertices", None)
    return geo.build_shape(geo.ShapeSpec(kind, params, boundary_points=boundary_points,
                                         vertices=vertices))


class TestBesselConstant:
    def test_value_and_residual(self):
        j = iq.j1prime_zero()
        assert j == pytest.approx(J1P1, abs=1e-12)
        assert abs(iq.j1prime(j)) <= 1e-12
        assert 1.84 < j < 1.85

    def test_against_library_zero(self):
        assert iq.j1prime_zero() == pytest.approx(jnp_zeros(1, 1)[0], abs=1e-10)

    def test_paper_scale_values(self):
        # the published roundings: (j')^2 ~ 3.39 and j' ~ 1.84
        j = iq.j1prime_zero()
        assert j * j == pytest.approx(3.39, abs=5e-3)
        assert j == pytest.approx(1.84, abs=5e-3)

    def test_bessel_constant_wrapper(self):
        assert iq.bessel_constant().j1p1 == iq.j1prime_zero()

    def test_bounds_are_computed(self):
        b = iq.bounds()
        assert b["conj"] == 16.0 * math.pi ** 2
        assert b["iso"] == 4.0 * math.pi
        assert b["szego"] == pytest.approx(math.pi * J1P1 ** 2, rel=1e-12)
        assert b["isop"] == pytest.approx(math.sqrt(math.pi) * J1P1, rel=1e-12)


class TestEvaluate:
    def test_unit_square_equality_cases(self):
        report = iq.evaluate(shape_of("rectangle", width=1.0, height=1.0),
                             (math.pi ** 2, 0.0), DepthSpec.infinite())
        assert report.record("conj").value == pytest.approx(16 * math.pi ** 2, rel=1e-12)
        assert report.record("conj").margin == pytest.approx(0.0, abs=1e-9)
        assert report.record("iso").value == pytest.approx(4 * math.pi, rel=1e-12)
        assert all(report.record(n).applicable for n in iq.FUNCTIONAL_NAMES)

    def test_aspect_two_rectangle_closed_form(self):
        # separable fundamental mode along the long side: mu1 = pi^2 / 4
        report = iq.evaluate(shape_of("rectangle", width=2.0, height=1.0),
                             (math.pi ** 2 / 4.0, 0.0), DepthSpec.infinite())
        assert report.record("conj").value == pytest.approx(9 * math.pi ** 2, rel=1e-12)
        assert report.record("conj").margin > 0.0

    def test_disk_analytic_values(self):
        j2 = J1P1 ** 2
        report = iq.evaluate(shape_of("ellipse", a=1.0, b=1.0), (j2, 0.0),
                             DepthSpec.infinite())
        assert report.record("szego").value == pytest.approx(math.pi * j2, rel=1e-10)
        assert abs(report.record("szego").margin) <= 1e-8
        conj = report.record("conj")
        assert conj.value == pytest.approx(4 * math.pi ** 2 * j2, rel=1e-10)
        assert conj.value < conj.bound

    def test_finite_depth_square(self):
        report = iq.evaluate(shape_of("rectangle", width=1.0, height=1.0),
                             (math.pi ** 2, 0.0), DepthSpec.finite(0.5))
        assert report.record("iso").value == pytest.approx(4 * PI_TANH_PI_OVER_2, rel=1e-12)
        assert report.record("iso").value < 4 * math.pi

    def test_consistency_identities(self):
        # iso = sqrt(conj) and isop = sqrt(szego) at infinite depth
        report = iq.evaluate(shape_of("regular_polygon", n=5, side=1.0),
                             (3.7, 1e-5), DepthSpec.infinite())
        assert report.record("iso").value ** 2 == pytest.approx(
            report.record("conj").value, rel=1e-12)
        assert report.record("isop").value ** 2 == pytest.approx(
            report.record("szego").value, rel=1e-12)
        assert report.nu1_inf ** 2 == pytest.approx(report.mu1, rel=1e-12)

    def test_applicability_flags(self):
        scalene = shape_of("convex_polygon",
                           vertices=((0.0, 0.0), (3.0, 0.0), (2.5, 1.8), (0.4, 1.5)))
        report = iq.evaluate(scalene, (1.0, 0.0), DepthSpec.infinite())
        assert not report.record("conj").applicable
        assert not report.record("iso").applicable
        assert report.record("szego").applicable
        assert report.record("isop").applicable
        assert "conjectural" in report.record("conj").applicability_reason

    def test_uncertainty_band_propagation(self):
        shape = shape_of("rectangle", width=1.0, height=1.0)
        report = iq.evaluate(shape, (4.0, 0.01), DepthSpec.infinite())
        assert report.record("conj").uncertainty == pytest.approx(16 * 0.01, rel=1e-12)
        assert report.record("szego").uncertainty == pytest.approx(0.01, rel=1e-12)
        # nu band: d(sqrt(mu)) = err / (2 sqrt(mu))
        assert report.record("iso").uncertainty == pytest.approx(4 * 0.01 / 4.0, rel=1e-4)

    def test_nonpositive_mu_rejected(self):
        with pytest.raises(ValueError):
            iq.evaluate(shape_of("rectangle", width=1.0, height=1.0),
                        (0.0, 0.0), DepthSpec.infinite())


class TestEstimateMu1:
    def test_square_estimate(self):
        est = iq.estimate_mu1(shape_of("rectangle", width=1.0, height=1.0), 4)
        assert est.mu1 == pytest.approx(math.pi ** 2, rel=1e-3)
        assert est.error_gauge > 0.0
        assert est.monotone
        assert [lvl for lvl, _ in est.levels] == [2, 3, 4]

    def test_level_too_small(self):
        with pytest.raises(ValueError):
            iq.estimate_mu1(shape_of("rectangle", width=1.0, height=1.0), 1)


class TestCsvRoundTrip:
    def make_report(self, depth=DepthSpec.infinite()):
        return iq.evaluate(shape_of("rectangle", width=2.0, height=1.0),
                           (math.pi ** 2 / 4.0, 1e-5), depth)

    def test_header_exact(self):
        buf = io.StringIO()
        iq.reports_to_csv([self.make_report()], buf)
        header = buf.getvalue().splitlines()[0]
        assert header == ("shape_id,P,A,mu1,mu1_err,nu1,"
                          "conj_value,conj_bound,conj_margin,"
                          "iso_value,iso_bound,iso_margin,"
                          "szego_value,szego_bound,szego_margin,"
                          "isop_value,isop_bound,isop_margin,"
                          "applicable_conj,applicable_szego")

    @pytest.mark.parametrize("depth", [DepthSpec.infinite(), DepthSpec.finite(0.8)])
    def test_row_round_trip(self, depth):
        report = self.make_report(depth)
        buf = io.StringIO()
        iq.reports_to_csv([report], buf)
        back = iq.reports_from_csv(io.StringIO(buf.getvalue()))[0]
        assert back.shape_id == report.shape_id
        for field in ("P", "A", "mu1", "mu1_err", "nu1"):
            assert getattr(back, field) == pytest.approx(getattr(report, field), rel=1e-11)
        for name in iq.FUNCTIONAL_NAMES:
            a, b = report.record(name), back.record(name)
            assert b.value == pytest.approx(a.value, rel=1e-11)
            assert b.margin == pytest.approx(a.margin, rel=1e-11, abs=1e-11)
            assert b.applicable == a.applicable

    def test_twelve_significant_digits(self):
        buf = io.StringIO()
        iq.reports_to_csv([self.make_report()], buf)
        mu1_cell = buf.getvalue().splitlines()[1].split(",")[3]
        assert mu1_cell == f"{math.pi ** 2 / 4.0:.12g}"


class TestSweepFamily:
    def test_square_maximizes_conj_among_rectangles(self):
        family = [(a, geo.ShapeSpec("rectangle", {"width": a, "height": 1.0}))
                  for a in (1.0, 1.5, 2.0)]
        result = iq.sweep_family(family, DepthSpec.infinite(), mesh_levels=3, workers=1)
        assert [row.param for row in result.rows] == [1.0, 1.5, 2.0]
        assert all(row.report is not None for row in result.rows)
        assert result.argmax["conj"].param == 1.0
        # closed form for a x 1 rectangles, a >= 1: conj = 4 (1+a)^2 pi^2 / a^2
        for row in result.rows:
            a = row.param
            expected = 4.0 * (1.0 + a) ** 2 * math.pi ** 2 / a ** 2
            assert row.report.record("conj").value == pytest.approx(expected, rel=5e-3)

    def test_failures_recorded_and_sweep_continues(self, monkeypatch):
        original = iq.estimate_mu1

        def flaky(shape, mesh_level, seed=0x5EED, num_levels=3):
            if shape.spec.params.get("width") == 2.0:
                raise NoConvergenceError("stalled")
            return original(shape, mesh_level, seed=seed, num_levels=num_levels)

        monkeypatch.setattr(iq, "estimate_mu1", flaky)
        family = [(a, geo.ShapeSpec("rectangle", {"width": a, "height": 1.0}))
                  for a in (1.0, 2.0)]
        result = iq.sweep_family(family, DepthSpec.infinite(), mesh_levels=2, workers=1)
        assert result.rows[0].report is not None
        assert result.rows[1].report is None
        assert "NoConvergenceError" in result.rows[1].error
        assert result.argmax["conj"].param == 1.0

    def test_rejects_singleton_family(self):
        with pytest.raises(ValueError):
            iq.sweep_family([geo.ShapeSpec("rectangle", {"width": 1.0, "height": 1.0})],
                            DepthSpec.infinite(), 2)

    def test_parallel_matches_serial(self):
        family = [(a, geo.ShapeSpec("rectangle", {"width": a, "height": 1.0}))
                  for a in (1.0, 2.0)]
        serial = iq.sweep_family(family, DepthSpec.infinite(), 2, workers=1)
        parallel = iq.sweep_family(family, DepthSpec.infinite(), 2, workers=2)
        for a, b in zip(serial.rows, parallel.rows):
            assert a.report.mu1 == b.report.mu1

    def test_worker_env_cap(self, monkeypatch):
        monkeypatch.setenv("SLOSH_ISO_THREADS", "3")
        assert iq.default_workers() == 3
        monkeypatch.setenv("SLOSH_ISO_THREADS", "bogus")
        assert iq.default_workers() >= 1
