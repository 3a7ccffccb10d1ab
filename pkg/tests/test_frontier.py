"""Tests for the locus sweep, the envelope and the characteristic curve."""

import csv

import numpy as np
import pytest

from coding_game.errors import DegenerateInputError, DomainError
from coding_game.frontier import (
    Locus,
    c_eta,
    characteristic_curve,
    phi_inverse,
    sweep,
    upper_concave_envelope,
    write_curve_csv,
)
from coding_game.kernels import GameParams, phi, psi
from coding_game.oracles import two_point_lp


@pytest.fixture(scope="module")
def planar5():
    return characteristic_curve(GameParams(2, 1.0, 5.0))


def _locus(q, y):
    """Hand-made locus from points given with q descending."""
    q, y = np.asarray(q, float), np.asarray(y, float)
    z = np.linspace(4.0, 6.0, len(q))
    return Locus(GameParams(2, 1.0, 5.0), z, q, y, len(q))


class TestSweep:
    def test_endpoints(self):
        p = GameParams(2, 1.0, 5.0)
        loc = sweep(p, 2001)
        assert loc.z[0] == p.z_low and loc.q[0] == 1.0
        assert loc.psi[0] == pytest.approx(p.z_low**2 + 0.5, rel=1e-15)
        assert loc.z[-1] == p.z_high and loc.q[-1] == 0.0 and loc.psi[-1] == 0.0

    @pytest.mark.parametrize("n", [2, 25, 250])
    def test_strictly_ordered(self, n):
        loc = sweep(GameParams(n, 1.0, 5.0), 2001)
        assert np.all(np.diff(loc.z) > 0)
        assert np.all(np.diff(loc.q) < 0)

    def test_example_two_point(self):
        loc = sweep(GameParams(25, 1.0, 4.0))
        i = int(np.argmin(np.abs(loc.q - 0.5375)))
        assert loc.psi[i] / (4 * loc.q[i]) == pytest.approx(4.2409, abs=0.005)

    def test_samples_view(self):
        loc = sweep(GameParams(2, 1.0, 3.0), 11, q_points=0)
        assert len(loc.samples) == len(loc)
        assert loc.samples[0].q == 1.0

    def test_rejects_tiny_grid(self):
        with pytest.raises(DomainError):
            sweep(GameParams(2, 1.0, 3.0), 2)


class TestPhiInverse:
    def test_boundaries(self):
        p = GameParams(3, 1.0, 4.0)
        assert phi_inverse(p, 1.0) == p.z_low
        assert phi_inverse(p, 0.0) == p.z_high

    def test_planar(self):
        assert phi_inverse(GameParams(2, 1.0, 5.0), 0.7978) == pytest.approx(4.4857, abs=5e-4)

    def test_high_dimension(self):
        assert phi_inverse(GameParams(250, 1.0, 7.4), 0.8849) == pytest.approx(7.2574, abs=2e-3)

    @pytest.mark.parametrize("n", [2, 25, 250])
    def test_round_trip_vectorized(self, n):
        p = GameParams(n, 1.0, 3.0)
        q = np.linspace(0.05, 0.95, 19)
        z = phi_inverse(p, q)
        np.testing.assert_allclose(phi(p, z), q, atol=1e-9)
        scalar = [phi_inverse(p, float(v)) for v in q]
        np.testing.assert_allclose(scalar, z, atol=1e-10)

    def test_rejects_bad_probability(self):
        with pytest.raises(DomainError):
            phi_inverse(GameParams(2, 1.0, 3.0), 1.5)


class TestEnvelope:
    def test_concave_input_keeps_all(self):
        q = np.linspace(1.0, 0.0, 11)
        loc = _locus(q, np.sin(np.pi * q / 2))
        curve = upper_concave_envelope(loc)
        assert len(curve.q) == 11

    def test_two_points_is_chord(self):
        curve = upper_concave_envelope(_locus([1.0, 0.0], [3.0, 0.0]))
        assert list(curve.q) == [0.0, 1.0]
        assert c_eta(curve, 0.5) == pytest.approx(1.5 / 2.0)

    def test_dip_is_bridged(self):
        q = np.array([1.0, 0.75, 0.5, 0.25, 0.0])
        y = np.array([4.0, 3.0, 1.0, 2.0, 0.0])
        curve = upper_concave_envelope(_locus(q, y))
        assert 0.5 not in curve.q
        assert curve.chord_edges().any()

    def test_collinear_points_dropped(self):
        q = np.linspace(1.0, 0.0, 5)
        curve = upper_concave_envelope(_locus(q, 2 * q))
        assert list(curve.q) == [0.0, 1.0]

    def test_degenerate(self):
        loc = _locus([0.5, 0.5], [1.0, 1.0])
        with pytest.raises(DegenerateInputError):
            upper_concave_envelope(loc)

    def test_equilibrium_point(self, planar5):
        assert 4 * 0.7978 * c_eta(planar5, 0.7978) == pytest.approx(4 * 0.7978 * 5.5401, rel=2e-3)

    def test_dominates_locus(self, planar5):
        loc = planar5.locus
        env = planar5.envelope(loc.q)
        assert np.all(env >= loc.psi - 1e-10 * loc.psi.max())


class TestCEta:
    @pytest.mark.parametrize(
        "n,eta,alpha,expected,tol",
        [(2, 2.0, 0.4555, 1.5622, 0.01), (250, 2.0, 0.4434, 1.0567, 0.01)],
    )
    def test_reference_points(self, n, eta, alpha, expected, tol):
        curve = characteristic_curve(GameParams(n, 1.0, eta))
        assert c_eta(curve, alpha) == pytest.approx(expected, abs=tol)

    @pytest.mark.parametrize("n", [2, 25, 250])
    def test_alpha_one(self, n):
        p = GameParams(n, 1.0, 4.0)
        curve = characteristic_curve(p)
        assert c_eta(curve, 1.0) == pytest.approx((p.z_low**2 + n / (n + 2.0)) / 4, rel=1e-12)

    def test_alpha_one_lp(self):
        # at higher n grid points next to z_low already round to q = 1.0
        p = GameParams(2, 1.0, 4.0)
        lp = two_point_lp(p, 1.0, 200)
        assert lp.value == pytest.approx(4 * c_eta(characteristic_curve(p), 1.0), rel=1e-12)

    def test_floor(self, planar5):
        with pytest.raises(DomainError, match="alpha_min"):
            c_eta(planar5, 1e-7)
        with pytest.raises(DomainError):
            c_eta(planar5, 1.2)

    def test_exact_on_contact_edges(self, planar5):
        p = planar5.params
        a = np.linspace(0.05, 0.95, 37)
        np.testing.assert_allclose(c_eta(planar5, a), psi(p, phi_inverse(p, a)) / (4 * a), rtol=1e-10)

    def test_non_increasing(self, planar5):
        a = np.linspace(0.001, 1.0, 4001)
        assert np.all(np.diff(c_eta(planar5, a)) <= 0)

    def test_non_decreasing_in_eta(self):
        a = np.linspace(0.05, 1.0, 50)
        vals = [c_eta(characteristic_curve(GameParams(2, 1.0, e), 1001), a) for e in (2.0, 3.0, 5.0, 8.0)]
        for lo, hi in zip(vals, vals[1:]):
            assert np.all(hi >= lo)


class TestLpOracle:
    @pytest.mark.parametrize("eta", [2.0, 5.0, 8.0])
    def test_matches_envelope(self, eta):
        p = GameParams(2, 1.0, eta)
        curve = characteristic_curve(p)
        for a in (0.1, 0.5, 0.9):
            ref = 4 * a * c_eta(curve, a)
            assert two_point_lp(p, a, 200).value == pytest.approx(ref, rel=2e-3)
            assert two_point_lp(p, a, 2000).value == pytest.approx(ref, rel=2e-4)

    def test_never_exceeds_envelope(self, planar5):
        p = planar5.params
        for a in (0.2, 0.6):
            assert two_point_lp(p, a, 500).value <= 4 * a * c_eta(planar5, a) * (1 + 1e-9)


def test_csv_export(tmp_path):
    curves = [characteristic_curve(GameParams(2, 1.0, e), 501) for e in (3.0, 2.0)]
    path = write_curve_csv(tmp_path / "c.csv", curves, alphas=[0.5, 0.25, 1.0])
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["alpha", "c_eta", "eta", "n", "delta"]
    alphas = [float(r[0]) for r in rows[1:]]
    assert alphas == sorted(alphas)
    assert len(rows) == 7
    assert float(rows[1][1]) == pytest.approx(c_eta(curves[1], 0.25), rel=1e-12)
