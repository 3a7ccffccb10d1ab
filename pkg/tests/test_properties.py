"""Property-based checks of the structural invariants."""

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from coding_game import geometry as geo
from coding_game.frontier import Locus, c_eta, characteristic_curve, upper_concave_envelope
from coding_game.game import SingleShell, TwoShellMixture, build_noise, noise_moments
from coding_game.kernels import GameParams, phi
from coding_game.simulate import FixedMagnitude, SimConfig, run

dims = st.sampled_from([1, 2, 3, 5, 25, 250])
radii = st.floats(0.1, 20.0)
fractions = st.floats(-1.0, 1.0)
FAST = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@pytest.fixture(scope="module")
def curves():
    out = {}
    for n in (1, 2, 25):
        for eta in (2.0, 3.5, 5.0, 8.0):
            out[n, eta] = characteristic_curve(GameParams(n, 1.0, eta), 1001)
    return out


class TestGeometry:
    @FAST
    @given(dims, radii, fractions)
    def test_cap_complement(self, n, r, t):
        c = r * t
        assert geo.cap_fraction(n, r, c) + geo.cap_fraction(n, r, -c) == pytest.approx(1.0, abs=1e-12)

    @FAST
    @given(dims, radii, fractions, fractions)
    def test_cap_fraction_monotone_in_cut(self, n, r, t1, t2):
        lo, hi = sorted((t1, t2))
        assert geo.cap_fraction(n, r, r * lo) >= geo.cap_fraction(n, r, r * hi)

    @FAST
    @given(dims, radii, fractions)
    def test_cap_fraction_scale_free(self, n, r, t):
        assert geo.cap_fraction(n, r, r * t) == pytest.approx(geo.cap_fraction(n, 1.0, t), abs=1e-12)

    @FAST
    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=6))
    def test_signed_logsum_matches_sum(self, xs):
        total = geo.signed_logsum(*[geo.LogValue.from_real(x) for x in xs]).to_real()
        direct = math.fsum(xs)
        scale = max(abs(x) for x in xs)
        assert abs(total - direct) <= 1e-12 * scale

    @FAST
    @given(dims, st.floats(0.5, 5.0), st.floats(0.5, 5.0), st.floats(0.0, 12.0))
    def test_intersection_bounded_and_symmetric_in_scale(self, n, r1, r2, d):
        f = geo.intersection_fraction(n, r1, r2, d)
        assert 0.0 <= f <= 1.0
        g = geo.intersection_fraction(n, 2 * r1, 2 * r2, 2 * d)
        assert f == pytest.approx(g, abs=1e-10)

    @FAST
    @given(dims, st.floats(0.5, 5.0), st.floats(0.5, 5.0), st.floats(0.0, 12.0))
    def test_intersection_continuous_in_distance(self, n, r1, r2, d):
        f = geo.intersection_fraction(n, r1, r2, d)
        g = geo.intersection_fraction(n, r1, r2, d + 1e-9)
        assert abs(f - g) <= 1e-5
        assert g <= f + 1e-12


class TestEnvelope:
    @FAST
    @given(st.lists(st.floats(0.0, 10.0), min_size=3, max_size=40))
    def test_random_locus_concave_and_dominating(self, ys):
        q = np.linspace(1.0, 0.0, len(ys))
        y = np.asarray(ys, dtype=float)
        loc = Locus(GameParams(2, 1.0, 5.0), np.linspace(4.0, 6.0, len(ys)), q, y, len(ys))
        curve = upper_concave_envelope(loc)
        env = curve.envelope(q)
        assert np.all(env >= y - 1e-9 * (1 + y.max()))
        slopes = np.diff(curve.psi) / np.diff(curve.q)
        assert np.all(np.diff(slopes) <= 1e-9 * (1 + np.abs(slopes[1:])))

    @pytest.mark.parametrize("n", [1, 2, 25])
    @pytest.mark.parametrize("eta", [2.0, 3.5, 5.0, 8.0])
    def test_sweep_envelope_concave_and_dominating(self, curves, n, eta):
        curve = curves[n, eta]
        loc = curve.locus
        assert np.all(curve.envelope(loc.q) >= loc.psi - 1e-10 * loc.psi.max())
        slopes = np.diff(curve.psi) / np.diff(curve.q)
        assert np.all(np.diff(slopes) <= 1e-9 * np.abs(slopes).max())


class TestCharacteristicCurve:
    @FAST
    @given(st.sampled_from([1, 2, 25]), st.sampled_from([2.0, 3.5, 5.0, 8.0]), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
    def test_non_increasing_in_alpha(self, curves, n, eta, a1, a2):
        curve = curves[n, eta]
        lo, hi = sorted((a1, a2))
        assert c_eta(curve, lo) >= c_eta(curve, hi) * (1 - 1e-12)

    @FAST
    @given(st.sampled_from([1, 2, 25]), st.floats(1e-3, 1.0))
    def test_non_decreasing_in_eta(self, curves, n, a):
        vals = [c_eta(curves[n, e], a) for e in (2.0, 3.5, 5.0, 8.0)]
        assert all(hi >= lo * (1 - 1e-12) for lo, hi in zip(vals, vals[1:]))


class TestNoiseSpec:
    @FAST
    @given(st.sampled_from([1, 2, 25]), st.sampled_from([2.0, 3.5, 5.0, 8.0]), st.floats(0.01, 1.0))
    def test_identities(self, curves, n, eta, alpha):
        curve = curves[n, eta]
        p = curve.params
        noise = build_noise(curve, alpha)
        if isinstance(noise, SingleShell):
            assert phi(p, noise.z) == pytest.approx(alpha, abs=1e-9)
        else:
            assert isinstance(noise, TwoShellMixture)
            assert noise.beta1 + noise.beta2 == pytest.approx(1.0, abs=1e-12)
            mean = noise.beta1 * phi(p, noise.z1) + noise.beta2 * phi(p, noise.z2)
            assert mean == pytest.approx(alpha, abs=1e-9)
        pa, mse = noise_moments(p, noise)
        assert pa == pytest.approx(alpha, abs=1e-9)
        assert mse == pytest.approx(c_eta(curve, alpha), rel=1e-8)


class TestSimulator:
    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 4), st.integers(500, 5000))
    def test_thread_invariance(self, seed, workers, chunk):
        base = dict(params=GameParams(3, 1.0, 3.0), noise=FixedMagnitude(2.5), samples=12_000, seed=seed, chunk_size=chunk)
        assert run(SimConfig(workers=1, **base)) == run(SimConfig(workers=workers, **base))
