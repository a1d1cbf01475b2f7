"""The eleven acceptance criteria at their stated tolerances.

Each test carries a ``criterion`` marker; conftest prints one PASS/FAIL line
per criterion at the end of the run. A criterion passes only if every test
tagged with it passes, so a strict xfail shows up as FAIL.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from caplab.calibrate import drift_study
from caplab.physics import CapillarySetup, height_scaling_exponent, plate_rise_height
from caplab.profile import method_agreement, profile_by_quadrature, profile_by_shooting
from caplab.radial import (NullReaction, convergence_to_profile, energy_sandwich,
                           minimize_energy, radial_residual, sweep)
from caplab.verify import (boundary_identities, extend_profile_to_2d, field_from_function,
                           gradient_bound_check, modica_check, pohozaev_residual,
                           pohozaev_terms, radial_to_patch, subsolution_residual)

from conftest import C_H

criterion = pytest.mark.criterion


@pytest.fixture(scope="module")
def sweep3(truncated):
    t0 = time.perf_counter()
    sols = sweep(truncated, (25.0, 50.0, 100.0))
    return sols, time.perf_counter() - t0


@pytest.fixture(scope="module")
def strip(quad_profile):
    return extend_profile_to_2d(quad_profile, 2.0, 9)


# ---------------------------------------------------------------- 1


@criterion(1, "Hamiltonian conservation of the shooting profile")
def test_c1_drift(reaction):
    t0 = time.perf_counter()
    p = profile_by_shooting(reaction, 20.0, 1e-4)
    elapsed = time.perf_counter() - t0
    assert np.max(np.abs(p.hamiltonian + 1.0)) <= 1e-8
    assert elapsed < 1.0, elapsed


@criterion(1, "Hamiltonian conservation of the shooting profile")
def test_c1_fourth_order(reaction):
    # at step 1e-4 the drift is at roundoff, so order is read off coarser steps
    d = drift_study(reaction, 20.0)
    assert min(d["ratios"]) >= 8.0, d


# ---------------------------------------------------------------- 2


@criterion(2, "quadrature and shooting profiles agree")
def test_c2_agreement(reaction):
    t0 = time.perf_counter()
    q = profile_by_quadrature(reaction)
    s = profile_by_shooting(reaction, 20.0, 1e-4)
    c = method_agreement(q, s, fraction=0.99, tol=1e-6)
    elapsed = time.perf_counter() - t0
    assert c.passed and c.residual <= 1e-6
    assert elapsed < 1.0, elapsed


# ---------------------------------------------------------------- 3


@criterion(3, "Wilhelmy plate height and b-scaling")
def test_c3_plate_height():
    t0 = time.perf_counter()
    c = CapillarySetup.from_b(1.0, math.pi / 4)
    h, _ = plate_rise_height(c)
    e = height_scaling_exponent(math.pi / 4, (0.1, 1.0, 10.0))
    elapsed = time.perf_counter() - t0
    assert abs(h - C_H) <= 1e-4
    assert abs(e + 0.5) <= 0.01 * 0.5
    assert elapsed < 5.0, elapsed


# ---------------------------------------------------------------- 4


@criterion(4, "ball minimizer bounds and residual")
def test_c4_floor_gradient_residual(sweep3, truncated):
    sols, elapsed = sweep3
    bound = (truncated.inf_F_tilde() + 1.0) ** -2 - 1.0
    assert bound == pytest.approx(truncated.gradient_bound(), rel=1e-12)
    for s in sols.values():
        assert s.r.size == 1025
        assert np.all(s.u > -truncated.delta)
        slopes2 = np.concatenate([s.u_prime**2, s.face_slopes**2])
        assert slopes2.max() <= bound + 1e-8
        assert radial_residual(s) <= 1e-6
    assert elapsed < 60.0, elapsed


@criterion(4, "ball minimizer bounds and residual")
@pytest.mark.parametrize("R", [25.0,
                               pytest.param(50.0, marks=pytest.mark.xfail(
                                   strict=True, reason="u(0) rounds to L exactly")),
                               pytest.param(100.0, marks=pytest.mark.xfail(
                                   strict=True, reason="u(0) rounds to L exactly"))])
def test_c4_strict_ceiling(sweep3, truncated, R):
    s = sweep3[0][R]
    assert np.all(s.u[:-1] < truncated.L)


# ---------------------------------------------------------------- 5


@criterion(5, "energy sandwich")
def test_c5_sandwich(ball_sweep):
    sols = [ball_sweep[R] for R in sorted(ball_sweep)]
    rep = energy_sandwich(sols, stability=0.10)
    assert rep.passed, rep.failures()
    for s in sols:
        assert math.pi * s.R**2 <= s.energy


# ---------------------------------------------------------------- 6


@criterion(6, "P-function bound on every solution")
def test_c6_strip_rigidity(strip, reaction):
    rep = modica_check(strip, reaction)
    assert rep["modica_bound"].passed
    rig = rep["modica_rigidity"]
    assert rig.extra["attained"]
    assert rig.residual <= 1e-9


@criterion(6, "P-function bound on every solution")
def test_c6_all_solutions(ball_sweep, quad_profile, shoot_profile, reaction):
    for p in (quad_profile, shoot_profile):
        assert modica_check(p, reaction)["modica_bound"].passed
    for s in ball_sweep.values():
        assert modica_check(s)["modica_bound"].passed


# ---------------------------------------------------------------- 7


@criterion(7, "subsolution inequality for P")
def test_c7_strip(reaction):
    tols = []
    for dt in (2e-3, 1e-3):
        p = profile_by_quadrature(reaction, dt=dt)
        fld = extend_profile_to_2d(p, 10 * dt, 11)
        c = subsolution_residual(fld, reaction.f, reaction.F, grad_floor=0.05)
        assert c.passed, c
        tols.append(c.tolerance)
    assert tols[1] < tols[0]


@criterion(7, "subsolution inequality for P")
def test_c7_ball_patch(ball_sweep):
    s = ball_sweep[40.0]
    tols = []
    for m in (128, 256):
        fld = radial_to_patch(s, h=s.R / m, extent=(0.5 * s.R, s.R))
        c = subsolution_residual(fld, s.tr.f_tilde, s.tr.F_tilde, grad_floor=0.05)
        assert c.passed, c
        tols.append(c.tolerance)
    assert tols[1] < tols[0]


# ---------------------------------------------------------------- 8


@criterion(8, "Pohozaev identity")
def test_c8_pohozaev(sweep3, truncated):
    for R, s in sweep3[0].items():
        fine = pohozaev_residual(s).residual
        coarse = pohozaev_residual(minimize_energy(truncated, R, grid_points=512)).residual
        assert fine <= 1e-4
        assert fine < coarse


@criterion(8, "Pohozaev identity")
def test_c8_null_case():
    s = minimize_energy(NullReaction(), 10.0, initial_guesses=("zero",))
    assert not s.u.any()
    assert pohozaev_terms(s) == (0.0, 0.0, 0.0)
    assert pohozaev_residual(s).residual == 0.0


# ---------------------------------------------------------------- 9


@criterion(9, "ball solutions converge to the profile")
def test_c9_convergence(truncated, shoot_profile):
    t0 = time.perf_counter()
    sols = sweep(truncated, (25.0, 50.0, 100.0, 200.0))
    rep = convergence_to_profile(list(sols.values()), shoot_profile, Y=10.0)
    elapsed = time.perf_counter() - t0
    e = rep["e_decreasing"].extra["e"]
    assert all(b < a for a, b in zip(e, e[1:])), e
    slopes = rep["boundary_slope_monotone"].extra["slopes"]
    assert all(b > a for a, b in zip(slopes, slopes[1:])), slopes
    assert all(v < 1.0 for v in slopes)
    assert slopes[-1] >= 0.9
    assert elapsed < 300.0, elapsed


# ---------------------------------------------------------------- 10


@criterion(10, "gradient bound")
def test_c10_gradient_bound(ball_sweep, quad_profile, shoot_profile, reaction, strip):
    objs = [quad_profile, shoot_profile, strip, *ball_sweep.values()]
    for obj in objs:
        c = gradient_bound_check(obj, reaction)
        assert c.extra["hypothesis_holds"]
        assert c.passed and c.extra["slack"] > 0


# ---------------------------------------------------------------- 11


@criterion(11, "boundary identities")
def test_c11_strip(strip, reaction):
    rep = boundary_identities(strip, reaction.f, F=reaction.F)
    assert abs(rep["recovered_H"].extra["H"]) <= 1e-6
    assert rep.passed, rep.failures()


@criterion(11, "boundary identities")
def test_c11_balls(ball_sweep):
    for s in ball_sweep.values():
        rep = boundary_identities(s, s.tr.f_tilde)
        H = rep["recovered_H"].extra["H"]
        assert abs(H - 1.0 / s.R) <= rep["recovered_H"].tolerance
        assert rep.passed, rep.failures()


@criterion(11, "boundary identities")
def test_c11_discrimination(reaction):
    fld = field_from_function(lambda X, Y: np.sin(Y), 2.0, 3.0, 41, 601)
    rep = boundary_identities(fld, reaction.f, F=reaction.F)
    assert rep["curvature_identity"].passed
    assert not rep["boundary_equation"].passed
