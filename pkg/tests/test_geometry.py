import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logspiral import geometry as geo
from logspiral.errors import DomainError
from logspiral.model import Angles, SpiralFamily
from logspiral.solver import alexander_family


@pytest.fixture(scope="module")
def alexander3():
    return alexander_family(3, 5.0)


def random_off_sheet(family, rng, count, min_dist=1e-3):
    pts = []
    while len(pts) < count:
        z = cmath.rect(math.exp(rng.uniform(-2, 2)), rng.uniform(-math.pi, math.pi))
        if geo.sheet_distance(family, z) > min_dist:
            pts.append(z)
    return pts


class TestWindingNumber:
    def test_unit_radius(self):
        assert geo.winding_number(1.0, 0.7, 0.7, 1.0) == 1

    def test_large_radius(self):
        assert geo.winding_number(math.exp(10), 0.7, 0.7, 1.0) == -1

    @given(st.floats(1e-6, 1e6), st.floats(-10, 10), st.floats(0, 2 * math.pi), st.floats(0.05, 100))
    @settings(max_examples=300)
    def test_minimal(self, r, theta, theta_k, a):
        J = geo.winding_number(r, theta, theta_k, a)
        assert a * (2 * math.pi * J + theta_k - theta) + math.log(r) > 0
        assert not a * (2 * math.pi * (J - 1) + theta_k - theta) + math.log(r) > 0

    def test_domain(self):
        with pytest.raises(DomainError):
            geo.winding_number(0.0, 0.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            geo.winding_number(1.0, 0.0, 0.0, -1.0)


class TestSampling:
    def test_start_point(self, alexander3):
        pts = geo.sample_spiral(alexander3, 1, theta_range=(alexander3.angles.full[1], 5.0), npoints=3)
        assert pts[0].z == pytest.approx(cmath.exp(1j * alexander3.angles.full[1]), abs=1e-15)
        assert abs(pts[0].z) == pytest.approx(1, abs=1e-15)

    def test_modulus_law(self, alexander3):
        pts = geo.sample_spiral(alexander3, 0, t=2.0, theta_range=(0.0, 2 * math.pi), npoints=2)
        assert abs(pts[1].z) / abs(pts[0].z) == pytest.approx(math.exp(2 * math.pi * alexander3.a), rel=1e-12)
        scale = 2.0 ** alexander3.mu
        for p in pts:
            assert abs(p.z) == pytest.approx(scale * math.exp(alexander3.a * p.theta), rel=1e-13)

    def test_density_identity(self, alexander3):
        fam = alexander3
        a = fam.a
        for m in range(fam.M):
            for p in geo.sample_spiral(fam, m, t=1.5, npoints=25):
                # five-point difference of the circulation in theta
                h = 5e-3 / (2 * a)
                vals = [geo.circulation(fam, m, p.theta + k * h, p.t) for k in (-2, -1, 1, 2)]
                dGamma = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
                speed = p.t ** fam.mu * math.exp(a * (p.theta - fam.angles.full[m])) * math.sqrt(1 + a * a)
                assert p.gamma_density * speed == pytest.approx(dGamma, rel=1e-10)

    def test_density_sign_follows_weight(self):
        fam = SpiralFamily(2.0, Angles([1.0]), [1.5, -0.5], 0.3)
        for m in range(2):
            for p in geo.sample_spiral(fam, m, npoints=20):
                assert np.sign(p.gamma_density) == np.sign(fam.g[m])
                assert np.sign(p.gamma_cum) == np.sign(fam.g[m])

    def test_default_range(self, alexander3):
        lo, hi = geo.default_theta_range(alexander3, 2, turns=1.0)
        theta_m = alexander3.angles.full[2]
        assert lo == pytest.approx(theta_m - 6 * math.pi * math.log(10) / 5.0)
        assert hi == pytest.approx(theta_m + 2 * math.pi)
        _, hi_big = geo.default_theta_range(alexander3, 2, turns=100.0)
        assert hi_big == pytest.approx(theta_m + geo.MAX_LOG_GROWTH / 5.0)

    def test_uniform_grid(self, alexander3):
        pts = geo.sample_spiral(alexander3, 0, npoints=11)
        assert len(pts) == 11
        np.testing.assert_allclose(np.diff([p.theta for p in pts]), (pts[-1].theta - pts[0].theta) / 10)

    @pytest.mark.parametrize("kw", [dict(t=0.0), dict(npoints=1), dict(m=3), dict(m=-1)])
    def test_domain(self, alexander3, kw):
        args = dict(m=0)
        args.update(kw)
        with pytest.raises(DomainError):
            geo.sample_spiral(alexander3, **args)


class TestVelocity:
    def test_origin(self, alexander3):
        with pytest.raises(DomainError):
            geo.velocity_profile(alexander3, 0)

    @pytest.mark.parametrize("M", [3, 5])
    def test_rotation_symmetry(self, M):
        fam = alexander_family(M, 5.0)
        rot = cmath.exp(2j * math.pi / M)
        for z in random_off_sheet(fam, np.random.default_rng(M), 100):
            w = geo.velocity_profile(fam, z)
            assert abs(geo.velocity_profile(fam, rot * z) - rot * w) <= 1e-10 * abs(w)

    def test_self_similarity(self, alexander3):
        fam = alexander3
        z = 0.7 + 0.4j
        assert geo.velocity(fam, z, 1.0) == geo.velocity_profile(fam, z)
        t = 3.0
        direct = geo.velocity(fam, z * t ** fam.mu, t)
        assert direct == pytest.approx(t ** (fam.mu - 1) * geo.velocity_profile(fam, z), rel=1e-12)

    def test_finite_off_sheet(self, alexander3):
        for z in random_off_sheet(alexander3, np.random.default_rng(0), 1000):
            assert np.isfinite(geo.velocity_profile(alexander3, z))

    def test_near_sheet_flagged(self, alexander3):
        on_sheet = geo.sample_spiral(alexander3, 0, npoints=3)[1].z
        assert geo.sheet_distance(alexander3, on_sheet) < 1e-10
        with pytest.warns(geo.NearSheetWarning):
            value = geo.velocity_profile(alexander3, on_sheet)
        assert np.isfinite(value)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            geo.velocity_profile(alexander3, on_sheet, exclusion=0)

    def test_time_domain(self, alexander3):
        with pytest.raises(DomainError):
            geo.velocity(alexander3, 1.0, 0.0)
