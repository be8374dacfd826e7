"""Independent numeric cross-check of the closed-form phase decomposition.

The closed forms treat laser kicks as instantaneous.  This module replaces
each kick by a finite window of width sigma carrying the same impulse
(top-hat a = hbar*k/(m*sigma), or a raised cosine with the same area),
integrates the classical motion with a fixed-step RK4 aligned to the window
edges, and evaluates the proper-time difference and the interaction action by
composite Simpson quadrature.  Nothing here reuses the closed-form results
except in the final residual comparison.

Accuracy notes, which the tests lean on:

- The grid places breakpoints at every window edge and an even number of
  steps per segment, so Simpson pairs never straddle a discontinuity.  For
  top-hat windows the acceleration is constant on every step (edge samples
  take the one-sided value belonging to the step), which makes both the RK4
  march and the quadrature exact up to rounding; what remains in the residual
  is genuinely the physics of the finite width.
- The proper-time integrand is evaluated from a separately integrated
  branch-difference system (initial conditions zero, kick-difference forcing,
  gravity cancels), as -dv*(v1+v2)/2 + g*dz.  Forming v1 - v2 from the two
  branch solutions instead would inherit the rounding of the large common
  free-fall signal and ruin the gravity-independence of the result.
- Pulse windows span [t_ell, t_ell + sigma].  For sequences closed in phase
  space the common sigma/2 centroid shift drops out of every closed-form
  quantity, so no recentering is needed.

A nonzero gravity gradient switches integrate_branch to a slower,
state-dependent stepper with acceleration -g - gradient*z + pulses; that path
is exploratory (the closed forms assume a uniform field) and the quadrature
entry points refuse it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from . import constants, _kernels
from .core import (
    GravityEnv,
    InitialConditions,
    PulseSequence,
    Species,
    require_valid,
)
from .errors import OracleAccuracyError, OracleConfigError
from .phase import gravito_recoil_phase, laser_phase, recoil_phase
from .phase import proper_time_difference as proper_time_closed

_SHAPES = ("tophat", "cosine")
_IMPULSE_HARD_LIMIT = 1e-6
_RESIDUAL_FLOOR = 1e-12


@dataclass(frozen=True)
class OracleConfig:
    """Finite-pulse-width integration parameters."""

    pulse_width: float
    steps_per_segment: int = 400
    pulse_shape: str = "tophat"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.pulse_width) and self.pulse_width > 0.0):
            raise OracleConfigError(f"pulse_width must be positive, got {self.pulse_width!r}")
        if self.steps_per_segment < 100:
            raise OracleConfigError(
                f"steps_per_segment must be at least 100, got {self.steps_per_segment!r}"
            )
        if self.pulse_shape not in _SHAPES:
            raise OracleConfigError(
                f"pulse_shape must be one of {_SHAPES}, got {self.pulse_shape!r}"
            )


@dataclass(frozen=True)
class SampledTrajectory:
    """One branch on the integration grid: node times, positions, velocities."""

    t: np.ndarray
    z: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class OracleActions:
    """Numeric interaction action per hbar, decomposed."""

    total: float
    recoil_part: float
    gravito_recoil_part: float
    laser_part: float
    identity_residual: float  # relative, nan when the closed form is undefined


@dataclass(frozen=True)
class OracleResult:
    """Numeric-versus-closed-form comparison for one configuration."""

    sigma: float
    steps_per_segment: int
    pulse_shape: str
    delta_tau_numeric: float
    delta_tau_closed: float
    residual_vs_closed_form: float
    gravito_recoil_numeric: float
    total_phase_numeric: float
    closure_residuals: tuple[float, float]  # (position m, velocity m/s) at grid end

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    def as_report_json(self, indent: int | None = 2) -> str:
        report = {
            "sigma": self.sigma,
            "steps": self.steps_per_segment,
            "pulse_shape": self.pulse_shape,
            "delta_tau_numeric": self.delta_tau_numeric,
            "delta_tau_closed": self.delta_tau_closed,
            "rel_residual": self.residual_vs_closed_form,
            "gravito_recoil_numeric": self.gravito_recoil_numeric,
            "total_phase_numeric": self.total_phase_numeric,
            "closure_residuals": list(self.closure_residuals),
        }
        return json.dumps(report, indent=indent)


@dataclass(frozen=True)
class ConvergenceStudy:
    """Residual against the closed form for a decreasing list of widths."""

    widths: tuple[float, ...]
    residuals: tuple[float, ...]
    fitted_exponent: float
    floor: float


def _check_config(seq: PulseSequence, cfg: OracleConfig) -> None:
    times = seq.times
    sigma = cfg.pulse_width
    if len(times) >= 2:
        spacing = min(b - a for a, b in zip(times[:-1], times[1:]))
        if not sigma < 0.5 * spacing:
            raise OracleConfigError(
                f"pulse_width {sigma!r} must be smaller than half the minimum "
                f"pulse spacing {spacing!r}"
            )
    for t in times:
        if t + sigma <= t:
            raise OracleConfigError(
                f"pulse_width {sigma!r} is below the time resolution at t = {t!r}"
            )


@dataclass(frozen=True)
class _Grid:
    ts: np.ndarray
    t_mid: np.ndarray
    h: np.ndarray
    windows: tuple[tuple[int, int], ...]  # node index span of each pulse window


def _build_grid(seq: PulseSequence, cfg: OracleConfig) -> _Grid:
    times = seq.times
    sigma = cfg.pulse_width
    window_ends = [t + sigma for t in times]
    t_lo = min([0.0, *times])
    t_stop = max([seq.duration, *window_ends]) if times else seq.duration
    breakpoints = sorted({t_lo, t_stop, *times, *window_ends})

    n = cfg.steps_per_segment + (cfg.steps_per_segment % 2)
    pieces = [np.linspace(a, b, n + 1)[:-1] for a, b in zip(breakpoints[:-1], breakpoints[1:])]
    pieces.append(np.array([breakpoints[-1]]))
    ts = np.concatenate(pieces)

    position = {bp: i for i, bp in enumerate(breakpoints)}
    windows = tuple(
        (position[t] * n, position[end] * n) for t, end in zip(times, window_ends)
    )
    h = np.diff(ts)
    t_mid = ts[:-1] + 0.5 * h
    return _Grid(ts=ts, t_mid=t_mid, h=h, windows=windows)


def _stage_accels(
    grid: _Grid, seq: PulseSequence, ks: Sequence[float], cfg: OracleConfig, mass: float, g: float
):
    """Acceleration arrays (left, mid, right) for one forcing: -g plus windows.

    Steps are assigned to windows by index through grid.windows rather than
    by comparing stage times against the window edges: t_ell + sigma - t_ell
    does not round back to sigma in general, and one misassigned edge sample
    costs a whole Simpson weight of impulse.  For the same reason the
    amplitude is normalized by the realized width ts[i1] - ts[i0] instead of
    the nominal one; otherwise every kick is off by a relative eps * t/sigma
    and gravity couples to the broken closure.
    """
    n_steps = grid.h.size
    a_left = np.full(n_steps, -float(g))
    a_mid = np.full(n_steps, -float(g))
    a_right = np.full(n_steps, -float(g))
    for (i0, i1), p, k in zip(grid.windows, seq.pulses, ks):
        if k == 0.0:
            continue
        width = grid.ts[i1] - grid.ts[i0]
        amp = constants.HBAR * k / (mass * width)
        steps = slice(i0, i1)
        if cfg.pulse_shape == "tophat":
            a_left[steps] += amp
            a_mid[steps] += amp
            a_right[steps] += amp
        else:
            for stage_t, arr in (
                (grid.ts[:-1], a_left),
                (grid.t_mid, a_mid),
                (grid.ts[1:], a_right),
            ):
                x = np.clip(stage_t[steps] - p.t, 0.0, width)
                arr[steps] += amp * (1.0 - np.cos(2.0 * np.pi * x / width))
    return a_left, a_mid, a_right


def _march(grid: _Grid, accels, z0: float, v0: float):
    a_left, a_mid, a_right = accels
    return _kernels.march_rk4(grid.h, a_left, a_mid, a_right, z0, v0)


def _simpson(f: np.ndarray, ts: np.ndarray) -> float:
    """Composite Simpson over consecutive node pairs, fsum-reduced."""
    if f.size < 3:
        return 0.0
    widths = ts[2::2] - ts[:-2:2]
    terms = (widths / 6.0) * (f[:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
    return math.fsum(terms)


def _branch_ks(seq: PulseSequence, branch: int) -> list[float]:
    if branch == 1:
        return [p.k_upper for p in seq.pulses]
    if branch == 2:
        return [p.k_lower for p in seq.pulses]
    raise ValueError(f"branch must be 1 or 2, got {branch!r}")


def _impulse_check(
    grid: _Grid,
    v: np.ndarray,
    ks: Sequence[float],
    mass: float,
    g: float,
    cfg: OracleConfig,
) -> None:
    scale = max((constants.HBAR * abs(k) / mass for k in ks), default=0.0)
    if scale == 0.0:
        return
    worst = 0.0
    for (i0, i1), k in zip(grid.windows, ks):
        width = grid.ts[i1] - grid.ts[i0]
        expected = constants.HBAR * k / mass - g * width
        worst = max(worst, abs((v[i1] - v[i0]) - expected))
    if worst > _IMPULSE_HARD_LIMIT * scale:
        raise OracleAccuracyError(
            f"velocity change per pulse off by {worst / scale:.3e} relative "
            f"(limit {_IMPULSE_HARD_LIMIT:.0e}); raise steps_per_segment"
        )


def integrate_branch(
    seq: PulseSequence,
    branch: int,
    species: Species,
    env: GravityEnv,
    ics: InitialConditions,
    cfg: OracleConfig,
) -> SampledTrajectory:
    """Integrate one branch with finite-width pulses; returns node samples.

    A nonzero gravity gradient is accepted here (only here) and switches to
    the state-dependent stepper; the impulse check is skipped in that case
    because the restoring term adds a legitimate position-dependent drift.
    """
    require_valid(seq, structural_only=True)
    _check_config(seq, cfg)
    grid = _build_grid(seq, cfg)
    ks = _branch_ks(seq, branch)
    accels = _stage_accels(grid, seq, ks, cfg, species.mass, env.g)
    if env.gradient != 0.0:
        z, v = _kernels.march_gradient(
            grid.h, accels[0], accels[1], accels[2], env.gradient, ics.z0, ics.v0
        )
    else:
        z, v = _march(grid, accels, ics.z0, ics.v0)
        _impulse_check(grid, v, ks, species.mass, env.g, cfg)
    return SampledTrajectory(t=grid.ts, z=z, v=v)


@dataclass(frozen=True)
class _RunBundle:
    grid: _Grid
    z1: np.ndarray
    v1: np.ndarray
    z2: np.ndarray
    v2: np.ndarray
    dz: np.ndarray
    dv: np.ndarray
    zg: np.ndarray
    vg: np.ndarray


def _run(seq, species, env, ics, cfg) -> _RunBundle:
    require_valid(seq, structural_only=True)
    env.require_uniform()
    _check_config(seq, cfg)
    grid = _build_grid(seq, cfg)
    m = species.mass
    k1 = _branch_ks(seq, 1)
    k2 = _branch_ks(seq, 2)
    dk = [a - b for a, b in zip(k1, k2)]

    acc1 = _stage_accels(grid, seq, k1, cfg, m, env.g)
    acc2 = _stage_accels(grid, seq, k2, cfg, m, env.g)
    accd = _stage_accels(grid, seq, dk, cfg, m, 0.0)

    z1, v1 = _march(grid, acc1, ics.z0, ics.v0)
    z2, v2 = _march(grid, acc2, ics.z0, ics.v0)
    dz, dv = _march(grid, accd, 0.0, 0.0)

    _impulse_check(grid, v1, k1, m, env.g, cfg)
    _impulse_check(grid, v2, k2, m, env.g, cfg)

    accg = _stage_accels(grid, seq, [0.0] * len(k1), cfg, m, env.g)
    zg, vg = _march(grid, accg, ics.z0, ics.v0)
    return _RunBundle(grid, z1, v1, z2, v2, dz, dv, zg, vg)


def proper_time_numeric(
    seq: PulseSequence,
    species: Species,
    env: GravityEnv,
    ics: InitialConditions,
    cfg: OracleConfig,
) -> float:
    """Branch proper-time difference by quadrature on the integrated motion."""
    run = _run(seq, species, env, ics, cfg)
    f = (-0.5 * run.dv * (run.v1 + run.v2) + env.g * run.dz) / constants.C**2
    return _simpson(f, run.grid.ts)


def _window_integral(grid: _Grid, cfg: OracleConfig, pulse_t: float, span, values) -> float:
    i0, i1 = span
    ts = grid.ts[i0 : i1 + 1]
    width = ts[-1] - ts[0]
    if cfg.pulse_shape == "tophat":
        w = np.full(ts.shape, 1.0 / width)
    else:
        x = np.clip(ts - pulse_t, 0.0, width)
        w = (1.0 - np.cos(2.0 * np.pi * x / width)) / width
    return _simpson(w * values[i0 : i1 + 1], ts)


def action_numeric(
    seq: PulseSequence,
    species: Species,
    env: GravityEnv,
    ics: InitialConditions,
    cfg: OracleConfig,
) -> OracleActions:
    """Interaction action per hbar by window quadrature, decomposed.

    total = sum over pulses of k^(1)*avg(z1) - k^(2)*avg(z2) plus the laser
    terms, where avg is the window-weighted average of the integrated branch
    position.  The gravito-recoil part repeats the sum with the differential
    wave number against the pulse-free trajectory; the recoil part is the
    remainder.  identity_residual compares total against its closed-form
    counterpart 2*recoil + gravito_recoil + laser, relative to the larger of
    the two natural scales, and is nan when the closed form refuses the
    input (open or degenerate sequences).
    """
    run = _run(seq, species, env, ics, cfg)
    grid = run.grid

    kick_terms: list[float] = []
    gravito_terms: list[float] = []
    for p, span in zip(seq.pulses, grid.windows):
        if p.k_upper != 0.0:
            kick_terms.append(p.k_upper * _window_integral(grid, cfg, p.t, span, run.z1))
        if p.k_lower != 0.0:
            kick_terms.append(-p.k_lower * _window_integral(grid, cfg, p.t, span, run.z2))
        if p.delta_k != 0.0:
            gravito_terms.append(p.delta_k * _window_integral(grid, cfg, p.t, span, run.zg))
    kick_total = math.fsum(kick_terms)
    gravito_part = math.fsum(gravito_terms)
    laser_part = math.fsum(x for p in seq.pulses for x in (p.phi_upper, -p.phi_lower))
    total = kick_total + laser_part
    recoil_part = kick_total - gravito_part

    try:
        closed = (
            2.0 * recoil_phase(seq, species)
            + gravito_recoil_phase(seq, env, ics)
            + laser_phase(seq)
        )
    except ValueError:
        identity_residual = math.nan
    else:
        scale = max(abs(closed), _action_scale(seq, species, env, ics))
        diff = abs(total - closed)
        identity_residual = diff / scale if scale > 0.0 else (0.0 if diff == 0.0 else math.inf)

    return OracleActions(
        total=total,
        recoil_part=recoil_part,
        gravito_recoil_part=gravito_part,
        laser_part=laser_part,
        identity_residual=identity_residual,
    )


def _time_span(seq: PulseSequence) -> float:
    times = seq.times
    if not times:
        return seq.duration
    return max(seq.duration, times[-1]) - min(0.0, times[0])


def _k_max(seq: PulseSequence) -> float:
    return max(
        (max(abs(p.k_upper), abs(p.k_lower)) for p in seq.pulses),
        default=0.0,
    )


def _delta_tau_scale(seq: PulseSequence, species: Species) -> float:
    vr = constants.HBAR * _k_max(seq) / (species.mass * constants.C)
    return vr * vr * _time_span(seq)


def _action_scale(seq, species, env, ics) -> float:
    kmax = _k_max(seq)
    span = _time_span(seq)
    z_scale = abs(ics.z0) + abs(ics.v0) * span + 0.5 * abs(env.g) * span * span
    recoil_scale = constants.HBAR * kmax * kmax * span / species.mass
    return recoil_scale + kmax * z_scale


def oracle_report(
    seq: PulseSequence,
    species: Species,
    env: GravityEnv,
    ics: InitialConditions,
    cfg: OracleConfig,
) -> OracleResult:
    """Full numeric-versus-closed-form comparison for a closed sequence."""
    run = _run(seq, species, env, ics, cfg)
    grid = run.grid

    f = (-0.5 * run.dv * (run.v1 + run.v2) + env.g * run.dz) / constants.C**2
    dtau_num = _simpson(f, grid.ts)

    gravito_terms = [
        p.delta_k * _window_integral(grid, cfg, p.t, span, run.zg)
        for p, span in zip(seq.pulses, grid.windows)
        if p.delta_k != 0.0
    ]
    gravito_num = math.fsum(gravito_terms)
    laser_part = math.fsum(x for p in seq.pulses for x in (p.phi_upper, -p.phi_lower))

    dtau_closed = proper_time_closed(seq, species)
    omega_c = species.mass * constants.C**2 / constants.HBAR
    total_num = omega_c * dtau_num + gravito_num + laser_part

    diff = abs(dtau_num - dtau_closed)
    denom = max(abs(dtau_closed), _delta_tau_scale(seq, species))
    residual = diff / denom if denom > 0.0 else (0.0 if diff == 0.0 else math.inf)

    return OracleResult(
        sigma=cfg.pulse_width,
        steps_per_segment=cfg.steps_per_segment,
        pulse_shape=cfg.pulse_shape,
        delta_tau_numeric=dtau_num,
        delta_tau_closed=dtau_closed,
        residual_vs_closed_form=residual,
        gravito_recoil_numeric=gravito_num,
        total_phase_numeric=total_num,
        closure_residuals=(float(run.dz[-1]), float(run.dv[-1])),
    )


def convergence_study(
    seq: PulseSequence,
    species: Species,
    env: GravityEnv,
    ics: InitialConditions,
    widths: Iterable[float],
    *,
    steps_per_segment: int = 400,
    pulse_shape: str = "tophat",
) -> ConvergenceStudy:
    """Residual versus closed form over a strictly decreasing list of widths.

    Raises OracleAccuracyError if the residual grows between two widths that
    both sit above the rounding floor; fits log residual against log width
    over the above-floor points and reports the slope (nan when fewer than
    two points qualify).
    """
    widths = [float(w) for w in widths]
    if len(widths) < 2:
        raise OracleConfigError("need at least two widths for a convergence study")
    if any(b >= a for a, b in zip(widths[:-1], widths[1:])):
        raise OracleConfigError(f"widths must be strictly decreasing, got {widths!r}")

    residuals = []
    for w in widths:
        cfg = OracleConfig(pulse_width=w, steps_per_segment=steps_per_segment, pulse_shape=pulse_shape)
        residuals.append(oracle_report(seq, species, env, ics, cfg).residual_vs_closed_form)

    for (w_a, r_a), (w_b, r_b) in zip(zip(widths, residuals), zip(widths[1:], residuals[1:])):
        if r_a > _RESIDUAL_FLOOR and r_b > _RESIDUAL_FLOOR and r_b >= r_a:
            raise OracleAccuracyError(
                f"residual failed to decrease from width {w_a!r} ({r_a:.3e}) "
                f"to {w_b!r} ({r_b:.3e})"
            )

    above = [(w, r) for w, r in zip(widths, residuals) if r > _RESIDUAL_FLOOR]
    if len(above) >= 2:
        logs_w = np.log([w for w, _ in above])
        logs_r = np.log([r for _, r in above])
        exponent = float(np.polyfit(logs_w, logs_r, 1)[0])
    else:
        exponent = math.nan

    return ConvergenceStudy(
        widths=tuple(widths),
        residuals=tuple(residuals),
        fitted_exponent=exponent,
        floor=_RESIDUAL_FLOOR,
    )
