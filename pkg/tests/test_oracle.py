"""Finite-pulse-width integrator: accuracy invariants and kernel equivalence."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from lpai import (
    GravityEnv,
    InitialConditions,
    OracleAccuracyError,
    OracleConfig,
    OracleConfigError,
    PulseSequence,
    Species,
    action_numeric,
    build_mzi,
    build_rbi_asymmetric,
    build_rbi_double_loop,
    constants,
    convergence_study,
    gravity_trajectory,
    integrate_branch,
    laser_phase,
    oracle_report,
    proper_time_difference,
    proper_time_numeric,
)
from lpai import _kernels

SR = Species(1.443157e-25)
FLAT = GravityEnv(0.0)
REST = InitialConditions()


def window_velocity_jump(traj, t_pulse, sigma):
    """Velocity change across one pulse window, read off the node samples."""
    i0 = int(np.searchsorted(traj.t, t_pulse))
    i1 = int(np.searchsorted(traj.t, t_pulse + sigma))
    assert traj.t[i0] == t_pulse
    return traj.v[i1] - traj.v[i0], traj.t[i1] - traj.t[i0]


class TestConfig:
    @pytest.mark.parametrize("width", [0.0, -1e-6, math.nan, math.inf])
    def test_bad_width_is_rejected(self, width):
        with pytest.raises(OracleConfigError):
            OracleConfig(pulse_width=width)

    def test_too_few_steps_are_rejected(self):
        with pytest.raises(OracleConfigError, match="at least 100"):
            OracleConfig(pulse_width=1e-6, steps_per_segment=99)

    def test_unknown_shape_is_rejected(self):
        with pytest.raises(OracleConfigError, match="pulse_shape"):
            OracleConfig(pulse_width=1e-6, pulse_shape="gaussian")

    def test_width_must_fit_between_pulses(self):
        cfg = OracleConfig(pulse_width=0.06)
        with pytest.raises(OracleConfigError, match="half the minimum"):
            integrate_branch(build_rbi_asymmetric(1e7, 0.1), 1, SR, FLAT, REST, cfg)


class TestImpulseInvariant:
    @pytest.mark.parametrize("shape", ["tophat", "cosine"])
    @pytest.mark.parametrize("g", [0.0, 9.81])
    def test_each_window_carries_the_right_impulse(self, shape, g):
        k, T = 1.8e10, 0.325
        seq = build_rbi_asymmetric(k, T)
        cfg = OracleConfig(pulse_width=1e-6 * T, pulse_shape=shape)
        traj = integrate_branch(seq, 1, SR, GravityEnv(g), REST, cfg)
        scale = constants.HBAR * 2.0 * k / SR.mass
        for pulse, k_here in zip(seq.pulses, (k, -2.0 * k, k)):
            jump, width = window_velocity_jump(traj, pulse.t, cfg.pulse_width)
            expected = constants.HBAR * k_here / SR.mass - g * width
            assert abs(jump - expected) <= 1e-9 * scale

    def test_free_fall_matches_the_closed_form(self):
        seq = PulseSequence((), duration=2.0)
        env = GravityEnv(9.81)
        ics = InitialConditions(z0=3.0, v0=-1.0)
        traj = integrate_branch(seq, 1, SR, env, ics, OracleConfig(pulse_width=1e-3))
        zg, vg = gravity_trajectory(env, ics, traj.t)
        np.testing.assert_allclose(traj.z, zg, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(traj.v, vg, rtol=1e-12, atol=1e-12)

    def test_coasting_stays_on_the_straight_line(self):
        seq = PulseSequence((), duration=1.0)
        ics = InitialConditions(z0=0.5, v0=2.0)
        traj = integrate_branch(seq, 1, SR, FLAT, ics, OracleConfig(pulse_width=1e-3))
        np.testing.assert_allclose(traj.z, 0.5 + 2.0 * traj.t, rtol=1e-12)
        np.testing.assert_array_equal(traj.v, np.full(traj.v.shape, 2.0))


class TestProperTimeNumeric:
    def test_asymmetric_residual_at_narrow_width(self):
        T = 0.325
        cfg = OracleConfig(pulse_width=1e-6 * T)
        report = oracle_report(build_rbi_asymmetric(1.8e10, T), SR, GravityEnv(9.81), REST, cfg)
        assert report.residual_vs_closed_form <= 1e-6
        assert report.delta_tau_numeric == pytest.approx(report.delta_tau_closed, rel=1e-6)

    def test_gravity_does_not_move_the_numeric_proper_time(self):
        T = 0.325
        seq = build_rbi_asymmetric(1.8e10, T)
        cfg = OracleConfig(pulse_width=1e-6 * T)
        values = [
            proper_time_numeric(seq, SR, GravityEnv(g), InitialConditions(z0, v0), cfg)
            for g, z0, v0 in [(0.0, 0.0, 0.0), (9.81, 1.0, -0.5), (100.0, -3.0, 2.0)]
        ]
        closed = proper_time_difference(seq, SR)
        assert max(values) - min(values) <= 1e-8 * abs(closed)

    def test_mzi_proper_time_stays_on_zero(self):
        T = 0.1
        cfg = OracleConfig(pulse_width=1e-6 * T)
        report = oracle_report(build_mzi(1e7, T), SR, GravityEnv(9.81), REST, cfg)
        assert report.delta_tau_closed == 0.0
        assert report.residual_vs_closed_form <= 1e-6

    def test_total_phase_tracks_the_gravimeter_signal(self):
        k, T, g = 1e7, 0.1, 9.81
        cfg = OracleConfig(pulse_width=1e-6 * T)
        report = oracle_report(build_mzi(k, T), SR, GravityEnv(g), REST, cfg)
        assert report.total_phase_numeric == pytest.approx(-k * g * T**2, rel=1e-6)

    def test_pulse_shapes_agree(self):
        T = 0.325
        seq = build_rbi_asymmetric(1.8e10, T)
        tophat = OracleConfig(pulse_width=1e-6 * T, pulse_shape="tophat")
        cosine = OracleConfig(pulse_width=1e-6 * T, pulse_shape="cosine")
        r_top = oracle_report(seq, SR, FLAT, REST, tophat)
        r_cos = oracle_report(seq, SR, FLAT, REST, cosine)
        assert r_top.residual_vs_closed_form <= 1e-6
        assert r_cos.residual_vs_closed_form <= 1e-6

    def test_closure_residuals_are_tiny_for_closed_sequences(self):
        T = 0.325
        k = 1.8e10
        cfg = OracleConfig(pulse_width=1e-6 * T)
        report = oracle_report(build_rbi_asymmetric(k, T), SR, GravityEnv(9.81), REST, cfg)
        dz, dv = report.closure_residuals
        v_scale = constants.HBAR * 2.0 * k / SR.mass
        assert abs(dv) <= 1e-9 * v_scale
        assert abs(dz) <= 1e-9 * v_scale * 2.0 * T

    def test_gradient_is_refused_by_the_quadrature(self):
        cfg = OracleConfig(pulse_width=1e-6)
        with pytest.raises(ValueError, match="uniform"):
            proper_time_numeric(build_mzi(1e7, 0.1), SR, GravityEnv(9.81, gradient=1e-4), REST, cfg)

    def test_report_serializes_with_stable_keys(self):
        cfg = OracleConfig(pulse_width=1e-7, steps_per_segment=100)
        report = oracle_report(build_mzi(1e7, 0.1), SR, FLAT, REST, cfg)
        import json

        payload = json.loads(report.as_report_json())
        assert set(payload) == {
            "sigma",
            "steps",
            "pulse_shape",
            "delta_tau_numeric",
            "delta_tau_closed",
            "rel_residual",
            "gravito_recoil_numeric",
            "total_phase_numeric",
            "closure_residuals",
        }


class TestActionNumeric:
    def test_action_identity_against_the_closed_decomposition(self):
        seq = build_rbi_double_loop(1e7, 0.1)
        cfg = OracleConfig(pulse_width=1e-6 * 0.4)
        actions = action_numeric(seq, SR, GravityEnv(9.81), InitialConditions(0.3, -0.8), cfg)
        assert actions.identity_residual <= 1e-8

    def test_laser_part_is_the_exact_phase_sum(self):
        from lpai import Pulse

        pulses = tuple(
            Pulse(p.t, p.k_upper, p.k_lower, 0.3 * i, -0.1 * i)
            for i, p in enumerate(build_rbi_double_loop(1e7, 0.1).pulses)
        )
        seq = PulseSequence(pulses)
        cfg = OracleConfig(pulse_width=1e-7, steps_per_segment=100)
        actions = action_numeric(seq, SR, FLAT, REST, cfg)
        assert actions.laser_part == laser_phase(seq)

    def test_pulse_free_action_is_zero_with_undefined_identity(self):
        seq = PulseSequence((), duration=1.0)
        actions = action_numeric(seq, SR, GravityEnv(9.81), REST, OracleConfig(pulse_width=1e-3))
        assert actions.total == 0.0
        assert actions.recoil_part == 0.0
        assert actions.gravito_recoil_part == 0.0
        assert math.isnan(actions.identity_residual)


class TestGradientStepper:
    def test_harmonic_restoring_force_reproduces_the_oscillator(self):
        omega = 3.0
        seq = PulseSequence((), duration=2.0)
        env = GravityEnv(0.0, gradient=omega**2)
        ics = InitialConditions(z0=0.01, v0=0.0)
        traj = integrate_branch(seq, 1, SR, env, ics, OracleConfig(pulse_width=1e-3))
        expected = 0.01 * np.cos(omega * traj.t)
        assert np.max(np.abs(traj.z - expected)) <= 1e-6 * 0.01

    def test_gradient_with_pulses_is_allowed_in_the_integrator(self):
        seq = build_rbi_asymmetric(1e7, 0.1)
        env = GravityEnv(9.81, gradient=1e-6)
        traj = integrate_branch(seq, 1, SR, env, REST, OracleConfig(pulse_width=1e-4))
        assert np.all(np.isfinite(traj.z))


class TestConvergence:
    def test_residual_decreases_with_width_and_fits_a_power_law(self):
        T = 0.325
        study = convergence_study(
            build_rbi_asymmetric(1.8e10, T),
            SR,
            GravityEnv(9.81),
            REST,
            [T * 1e-3, T * 1e-4, T * 1e-5],
            steps_per_segment=100,
        )
        assert all(a > b for a, b in zip(study.residuals, study.residuals[1:]))
        assert 0.9 < study.fitted_exponent < 1.1
        assert study.floor == 1e-12

    def test_non_decreasing_widths_are_rejected(self):
        with pytest.raises(OracleConfigError, match="strictly decreasing"):
            convergence_study(build_mzi(1e7, 0.1), SR, FLAT, REST, [1e-5, 1e-4])

    def test_a_single_width_is_rejected(self):
        with pytest.raises(OracleConfigError, match="at least two"):
            convergence_study(build_mzi(1e7, 0.1), SR, FLAT, REST, [1e-5])


class TestKernels:
    def rand_problem(self, n=5000, seed=2):
        rng = np.random.default_rng(seed)
        h = rng.uniform(1e-5, 1e-3, n)
        return (h, rng.normal(size=n), rng.normal(size=n), rng.normal(size=n), 0.3, -1.7)

    def test_loop_and_cumsum_paths_are_bitwise_identical(self):
        h, al, am, ar, z0, v0 = self.rand_problem()
        z_np, v_np = _kernels.march_rk4_numpy(h, al, am, ar, z0, v0)
        z_py, v_py = _kernels._march_rk4_loop(h, al, am, ar, z0, v0)
        np.testing.assert_array_equal(z_np, z_py)
        np.testing.assert_array_equal(v_np, v_py)

    def test_dispatcher_matches_the_numpy_reference_bitwise(self):
        h, al, am, ar, z0, v0 = self.rand_problem(seed=4)
        z_ref, v_ref = _kernels.march_rk4_numpy(h, al, am, ar, z0, v0)
        z, v = _kernels.march_rk4(h, al, am, ar, z0, v0)
        np.testing.assert_array_equal(z, z_ref)
        np.testing.assert_array_equal(v, v_ref)

    def test_gradient_stepper_reduces_to_the_plain_march_at_zero_gradient(self):
        h, al, am, ar, z0, v0 = self.rand_problem(n=500, seed=6)
        z_ref, v_ref = _kernels.march_rk4(h, al, am, ar, z0, v0)
        z, v = _kernels.march_gradient(h, al, am, ar, 0.0, z0, v0)
        np.testing.assert_allclose(z, z_ref, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(v, v_ref, rtol=1e-10, atol=1e-12)

    def test_disable_flag_forces_the_numpy_path_with_identical_numbers(self):
        T = 0.325
        seq = build_rbi_asymmetric(1.8e10, T)
        cfg = OracleConfig(pulse_width=1e-6 * T, steps_per_segment=100)
        here = proper_time_numeric(seq, SR, GravityEnv(9.81), REST, cfg)
        script = (
            "import lpai._kernels as K\n"
            "print(K.using_numba())\n"
            "from lpai import (GravityEnv, InitialConditions, OracleConfig, Species,\n"
            "                  build_rbi_asymmetric, proper_time_numeric)\n"
            f"seq = build_rbi_asymmetric(1.8e10, {T!r})\n"
            f"cfg = OracleConfig(pulse_width={cfg.pulse_width!r}, steps_per_segment=100)\n"
            "v = proper_time_numeric(seq, Species(1.443157e-25), GravityEnv(9.81),\n"
            "                        InitialConditions(), cfg)\n"
            "print(repr(v))\n"
        )
        env = dict(os.environ, LPAI_DISABLE_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True
        )
        lines = out.stdout.strip().splitlines()
        assert lines[0] == "False"
        assert lines[1] == repr(here)
