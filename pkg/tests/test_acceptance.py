"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one PASS/FAIL line (collected in the terminal summary)
listing each sub-check with the observed value, the target and the
tolerance.
"""

import subprocess
import sys
import time
from pathlib import Path

import pytest

from conftest import ACCEPTANCE_LINES
from coding_game import config as cfg
from coding_game.game import SingleShell, optimal_eta
from coding_game.kernels import GameParams
from coding_game.verify import closed_form_suite, kernel_suite, lp_checks

pytestmark = pytest.mark.slow


def _solve(name):
    conf = cfg.load(name).validate()
    start = time.perf_counter()
    rep = optimal_eta(conf.n, conf.delta, conf.etas, conf.adversary, conf.dc, conf.grid_size, conf.alpha_min)
    return rep, time.perf_counter() - start


@pytest.fixture(scope="module")
def example1():
    return _solve("example1")


@pytest.fixture(scope="module")
def example2():
    a, ta = _solve("example2_case1")
    b, tb = _solve("example2_case2")
    return a, b, ta + tb


@pytest.fixture(scope="module")
def example3():
    return _solve("example3")


def _near(name, got, target, tol):
    return (name, got, target, tol, abs(got - target) <= tol)


def _exact(name, got, target):
    return (name, got, target, 0.0, got == target)


def _below(name, got, limit):
    return (name, got, limit, None, got < limit)


def _row(rep, eta):
    return next(r for r in rep.per_eta_table if abs(r.eta - eta) < 1e-9)


def _shell_z(rep):
    return rep.noise.z if isinstance(rep.noise, SingleShell) else float("nan")


def _report(number, title, checks):
    ok = all(c[4] for c in checks)
    parts = []
    for name, got, target, tol, passed in checks:
        if tol is None:
            desc = f"{name}={got:.4g} (< {target:g})"
        elif tol == 0.0:
            desc = f"{name}={got:.6g} (== {target:g})"
        else:
            desc = f"{name}={got:.6g} ({target:g} ± {tol:g})"
        parts.append(desc if passed else f"[FAIL] {desc}")
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}: " + "; ".join(parts)
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line


def test_criterion_1_example1_equilibrium(example1):
    rep, secs = example1
    _report(
        1,
        "example 1 equilibrium",
        [
            _exact("eta*", rep.eta_star, 5.0),
            _near("PA*", rep.alpha_star, 0.7978, 0.002),
            _near("MSE*", rep.mse_star, 5.5401, 0.02),
            _near("U_DC*", rep.u_dc, 14.4049, 0.05),
            _near("z", _shell_z(rep), 4.4857, 0.005),
            _below("seconds", secs, 30.0),
        ],
    )


def test_criterion_2_example1_endpoints(example1):
    rep, _ = example1
    lo, hi = _row(rep, 2.0), _row(rep, 8.0)
    _report(
        2,
        "example 1 endpoints",
        [
            _near("MSE(eta=2)", lo.mse, 1.5622, 0.01),
            _near("PA(eta=2)", lo.alpha, 0.4555, 0.002),
            _near("MSE(eta=8)", hi.mse, 13.2991, 0.05),
            _near("PA(eta=8)", hi.alpha, 0.9419, 0.002),
        ],
    )


def test_criterion_3_example2(example2):
    one, two, secs = example2
    _report(
        3,
        "example 2 (n=25)",
        [
            _exact("case1 eta*", one.eta_star, 4.0),
            _near("case1 MSE", one.mse_star, 4.2409, 0.02),
            _near("case1 PA", one.alpha_star, 0.5375, 0.002),
            _near("case1 U_DC", one.u_dc, 0.2610, 0.002),
            _near("case1 z", _shell_z(one), 3.8643, 0.005),
            _exact("case2 eta*", two.eta_star, 2.0),
            _near("case2 MSE", two.mse_star, 1.3808, 0.01),
            _near("case2 PA", two.alpha_star, 0.2292, 0.002),
            _near("case2 U_DC", two.u_dc, 0.1660, 0.002),
            _near("case2 z", _shell_z(two), 1.9065, 0.005),
            _below("seconds", secs, 60.0),
        ],
    )


def test_criterion_4_example3(example3):
    rep, secs = example3
    lo, hi = _row(rep, 2.0), _row(rep, 8.0)
    _report(
        4,
        "example 3 (n=250)",
        [
            _exact("eta*", rep.eta_star, 7.4),
            _near("MSE*", rep.mse_star, 13.4655, 0.05),
            _near("PA*", rep.alpha_star, 0.8849, 0.003),
            _near("U_DC*", rep.u_dc, -3.8231, 0.01),
            _near("z", _shell_z(rep), 7.2574, 0.01),
            _near("MSE(eta=2)", lo.mse, 1.0567, 0.05),
            _near("PA(eta=2)", lo.alpha, 0.4434, 0.003),
            _near("MSE(eta=8)", hi.mse, 15.7362, 0.05),
            _near("PA(eta=8)", hi.alpha, 0.8969, 0.003),
            _below("seconds", secs, 300.0),
        ],
    )


def test_criterion_5_closed_forms():
    checks = closed_form_suite(points=10)
    _report(5, "closed-form equivalence", [(c.name, c.distance, c.threshold, None, c.passed) for c in checks])


def test_criterion_6_kernel_monte_carlo():
    start = time.perf_counter()
    checks = kernel_suite(samples=1_000_000, seed=20240101)
    secs = time.perf_counter() - start
    worst_pa = max(c.distance for c in checks if c.name.startswith("pa"))
    worst_mse = max(c.distance for c in checks if c.name.startswith("mse"))
    failed = [c.name for c in checks if not c.passed]
    _report(
        6,
        f"kernel Monte-Carlo, {len(checks)} checks at 1e6 samples" + (f", failing {failed}" if failed else ""),
        [
            ("max PA sigmas", worst_pa, 4.0, None, worst_pa <= 4.0),
            ("max MSE sigmas", worst_mse, 4.0, None, worst_mse <= 4.0),
            _below("seconds", secs, 120.0),
        ],
    )


def test_criterion_7_lp_oracle():
    coarse, fine = [], []
    for eta in (2.0, 5.0, 8.0):
        p = GameParams(2, 1.0, eta)
        coarse += lp_checks(p, points=200, tol=2e-3)
        fine += lp_checks(p, points=2000, tol=2e-4)
    gap200 = max(c.distance for c in coarse)
    gap2000 = max(c.distance for c in fine)
    _report(
        7,
        "two-point LP oracle",
        [
            ("max rel gap (200)", gap200, 2e-3, None, gap200 <= 2e-3),
            ("max rel gap (2000)", gap2000, 2e-4, None, gap2000 <= 2e-4),
        ],
    )


PROPERTY_SUITES = {
    "cap complement": "TestGeometry::test_cap_complement",
    "envelope": "TestEnvelope",
    "c_eta monotonicity": "TestCharacteristicCurve",
    "noise identities": "TestNoiseSpec",
    "simulator determinism": "TestSimulator",
}


def test_criterion_8_property_suites():
    path = Path(__file__).with_name("test_properties.py")
    checks = []
    for label, node in PROPERTY_SUITES.items():
        start = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", f"{path}::{node}"],
            capture_output=True,
            text=True,
        )
        secs = time.perf_counter() - start
        checks.append((f"{label} seconds", secs, 60.0, None, proc.returncode == 0 and secs < 60.0))
    _report(8, "property suites (each must pass in < 60 s)", checks)
