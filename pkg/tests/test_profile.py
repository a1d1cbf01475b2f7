from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from caplab.errors import AdmissibilityViolationError, DivergenceError
from caplab.export import read_profile_csv, write_profile_csv
from caplab.profile import (ProfileSolution, assert_profile_characterization, hamiltonian,
                            method_agreement, profile_by_quadrature, profile_by_shooting,
                            rescaled, terminal_diagnostics)
from caplab.reaction import expression_reaction, linear_reaction, make_reaction
from caplab.verify import hamiltonian_check

from conftest import C_H


def _reference(r, T):
    """Independent high-order integration of the second-order ODE."""
    def rhs(t, y):
        return [y[1], -r.f(y[0]) * (1 + y[1] ** 2) ** 1.5]
    return solve_ivp(rhs, (0, T), [0.0, 1.0], method="DOP853", rtol=1e-13, atol=1e-14,
                     dense_output=True)


def test_quadrature_initial_data(quad_profile):
    assert quad_profile.phi[0] == 0.0
    assert quad_profile.phi_prime[0] == 1.0


def test_quadrature_hamiltonian_is_minus_one(quad_profile):
    assert np.max(np.abs(quad_profile.hamiltonian + 1.0)) <= 1e-9


def test_quadrature_reaches_height_cut(reaction):
    p = profile_by_quadrature(reaction, 0.99)
    assert p.phi[-1] >= 0.99 * reaction.L * (1 - 1e-12)
    assert np.all(np.diff(p.phi) > 0)
    dt = np.diff(p.t)
    assert np.ptp(dt) <= 1e-12


def test_quadrature_against_reference(reaction, quad_profile):
    ref = _reference(reaction, quad_profile.T)
    err = np.max(np.abs(ref.sol(quad_profile.t)[0] - quad_profile.phi))
    assert err <= 1e-6


def test_shooting_against_reference(reaction):
    p = profile_by_shooting(reaction, 8.0, 1e-3)
    ref = _reference(reaction, 8.0)
    assert np.max(np.abs(ref.sol(p.t)[0] - p.phi)) <= 1e-9


def test_shooting_drift(shoot_profile):
    assert np.max(np.abs(shoot_profile.hamiltonian + 1.0)) <= 1e-8


def test_drift_fourth_order(reaction):
    drifts = []
    for h in (8e-3, 4e-3, 2e-3, 1e-3):
        p = profile_by_shooting(reaction, 20.0, h)
        drifts.append(np.max(np.abs(p.hamiltonian - p.hamiltonian[0])))
    ratios = [a / b for a, b in zip(drifts, drifts[1:])]
    assert all(12.0 <= q <= 20.0 for q in ratios), ratios


@pytest.mark.xfail(strict=True, reason="drift at step 1e-4 sits on the roundoff plateau, "
                   "so the 1e-2 / 1e-4 ratio cannot reach (1e2)^4")
def test_drift_ratio_over_two_decades(reaction):
    coarse = profile_by_shooting(reaction, 20.0, 1e-2)
    fine = profile_by_shooting(reaction, 20.0, 1e-4)
    d = [np.max(np.abs(p.hamiltonian - p.hamiltonian[0])) for p in (coarse, fine)]
    assert d[0] / d[1] >= 0.5e8


def test_methods_agree(quad_profile, shoot_profile):
    c = method_agreement(quad_profile, shoot_profile)
    assert c.passed and c.residual <= 1e-6
    assert method_agreement(shoot_profile, quad_profile).residual <= 1e-6


@pytest.mark.xfail(strict=True, raises=DivergenceError,
                   reason="the equilibrium at L is a saddle; roundoff grows like e^t and "
                          "the trajectory leaves [-delta, L + delta] near t = 34")
def test_terminal_curvature_at_T40(reaction):
    p = profile_by_shooting(reaction, 40.0, 1e-4)
    assert abs(p.phi_second(reaction)[-1]) <= 1e-3


def test_divergence_reports_exit_time(reaction):
    with pytest.raises(DivergenceError) as exc:
        profile_by_shooting(reaction, 40.0, 1e-3)
    assert 20.0 < exc.value.exit_time < 40.0


def test_terminal_diagnostics(reaction, shoot_profile):
    d = terminal_diagnostics(shoot_profile, reaction)
    assert abs(d["terminal_slope"]) <= 1e-3
    assert d["terminal_curvature"] <= 1e-3
    # linearization at L: gap'' = b * gap, so the approach rate is sqrt(b) = 1
    assert d["approach_rate"] == pytest.approx(1.0, abs=0.05)
    q = terminal_diagnostics(profile_by_quadrature(reaction), reaction)
    assert q["approach_rate"] == pytest.approx(1.0, abs=0.05)


def test_monotone_and_below_ceiling(quad_profile, shoot_profile):
    for p in (quad_profile, shoot_profile):
        assert np.all(p.phi < p.L_target)
    assert np.all(quad_profile.phi_prime[1:] > 0)


@pytest.mark.parametrize("which", ["quad_profile", "shoot_profile"])
def test_characterization_passes(which, request, reaction):
    p = request.getfixturevalue(which)
    rep = assert_profile_characterization(p, reaction)
    assert rep.passed, rep.failures()


def test_rescaled_profile_fails_hamiltonian(reaction, quad_profile):
    bad = rescaled(quad_profile, reaction, 1.01)
    rep = assert_profile_characterization(bad, reaction)
    c = rep["hamiltonian_drift"]
    assert not c.passed
    H = hamiltonian(reaction, 1.01 * quad_profile.phi, 1.01 * quad_profile.phi_prime)
    assert c.residual == pytest.approx(np.max(np.abs(H - H[0])), rel=1e-12)
    assert c.residual > 1e-3


def test_empty_profile_insufficient(reaction):
    z = np.zeros(1)
    p = ProfileSolution(z, z, z + 1, z - 1, reaction.L, "empty")
    rep = assert_profile_characterization(p, reaction)
    assert not rep.passed
    assert not rep["data_sufficiency"].passed


def test_inadmissible_term_rejected():
    r = make_reaction(lambda v: 1.0 + 0 * v, lambda v: 0 * v, -1.0, (0.0, 2.0))
    with pytest.raises(AdmissibilityViolationError):
        profile_by_quadrature(r)
    with pytest.raises(AdmissibilityViolationError):
        profile_by_shooting(r, 5.0, 1e-3)


def test_strict_regime_rejected():
    # F(0) above the equality value: no bounded parallel profile
    r = make_reaction(lambda v: C_H - v, lambda v: -1 + 0 * v, -1.0, (0.0, 2.0), F0=-0.2)
    with pytest.raises(AdmissibilityViolationError):
        profile_by_quadrature(r)


def test_hamiltonian_check_entries(reaction, quad_profile, shoot_profile):
    assert hamiltonian_check(quad_profile, reaction).residual <= 1e-14
    c = hamiltonian_check(shoot_profile, reaction)
    assert c.passed and c.tolerance == 1e-8


def test_general_b_profile():
    r = linear_reaction(b=4.0)
    p = profile_by_quadrature(r)
    assert p.L_target == pytest.approx(C_H / 2, abs=1e-12)
    unit = profile_by_quadrature(linear_reaction())
    # v(t) = phi(2 t) / 2
    v = unit.interpolant()(2 * p.t[p.t <= unit.T / 2]) / 2
    assert np.max(np.abs(v - p.phi[: v.size])) <= 1e-8


def test_kappa_two_profile():
    r = linear_reaction(kappa=-2.0)
    p = profile_by_quadrature(r)
    assert p.phi_prime[0] == pytest.approx(2.0)
    assert assert_profile_characterization(p, r).passed


def test_expression_profile_matches_linear(quad_profile):
    r = expression_reaction(f"{C_H!r} - u")
    p = profile_by_quadrature(r)
    assert np.max(np.abs(p.phi - quad_profile.phi[: p.phi.size])) <= 1e-10


def test_csv_round_trip(tmp_path, reaction, quad_profile):
    path = write_profile_csv(quad_profile, tmp_path / "p.csv")
    back = read_profile_csv(path, reaction.L)
    for name in ("t", "phi", "phi_prime", "hamiltonian"):
        assert np.array_equal(getattr(back, name), getattr(quad_profile, name))
    assert math.isclose(back.L_target, reaction.L)


@pytest.mark.xfail(strict=True, reason="at step 1e-4 the drift is already ~1e-15, so a "
                   "further halving cannot cut it eightfold")
def test_drift_halving_at_fine_step(reaction, shoot_profile):
    half = profile_by_shooting(reaction, 20.0, 5e-5)
    d = [np.max(np.abs(p.hamiltonian + 1.0)) for p in (shoot_profile, half)]
    assert d[0] / d[1] >= 8.0
