"""Core data types for branch-dependent light-pulse interferometry.

Conventions used throughout the package:

* SI units everywhere; phases in radians; actions are always divided by hbar.
* An interferometer has two branches.  Branch 1 is the "upper" arm, branch 2
  the "lower" arm, and every signed difference is branch 1 minus branch 2.
* A pulse at time ``t`` transfers momentum ``hbar*k`` to a branch and imprints
  the laser phase ``phi`` on it.  Kicks take effect immediately *after* the
  pulse time, so sampling a trajectory exactly at a pulse time returns the
  pre-kick state.
* Equal pulse times are rejected rather than merged.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

from . import constants


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


@dataclass(frozen=True)
class Species:
    """A structureless atom of fixed rest mass."""

    mass: float  # kg
    label: str = ""

    def __post_init__(self) -> None:
        if not (_finite(self.mass) and self.mass > 0.0):
            raise ValueError(f"mass must be positive and finite, got {self.mass!r}")


def compton_frequency(species: Species) -> float:
    """Rest-energy angular frequency m c^2 / hbar in rad/s."""
    return species.mass * constants.C**2 / constants.HBAR


@dataclass(frozen=True)
class ClockPair:
    """Two internal states of one atom, split in energy by hbar*splitting_omega.

    The excited state "a" and ground state "b" carry rest masses
    ``mean_mass +/- delta_m/2`` with ``delta_m = hbar*splitting_omega/c**2``.
    ``eta = 1/(1 - (delta_m/(2*mean_mass))**2)`` is the exact correction that
    relates the state-resolved phases to mean-mass quantities; it is 1.0
    exactly for a vanishing splitting.
    """

    mean_mass: float        # kg
    splitting_omega: float  # rad/s, >= 0
    label: str = ""

    def __post_init__(self) -> None:
        if not (_finite(self.mean_mass) and self.mean_mass > 0.0):
            raise ValueError(f"mean_mass must be positive and finite, got {self.mean_mass!r}")
        if not (_finite(self.splitting_omega) and self.splitting_omega >= 0.0):
            raise ValueError(
                f"splitting_omega must be non-negative and finite, got {self.splitting_omega!r}"
            )
        if self.delta_m >= 2.0 * self.mean_mass:
            raise ValueError(
                "splitting too large: the ground-state mass would not be positive"
            )

    @property
    def delta_m(self) -> float:
        """Rest-mass difference hbar*splitting_omega/c^2 in kg."""
        return constants.HBAR * self.splitting_omega / constants.C**2

    @property
    def mass_a(self) -> float:
        """Excited-state mass, kg."""
        return self.mean_mass + 0.5 * self.delta_m

    @property
    def mass_b(self) -> float:
        """Ground-state mass, kg."""
        return self.mean_mass - 0.5 * self.delta_m

    @property
    def eta(self) -> float:
        x = self.delta_m / (2.0 * self.mean_mass)
        return 1.0 / (1.0 - x * x)

    def state_species(self, state: str) -> Species:
        if state == "a":
            return Species(self.mass_a, label=f"{self.label}|a" if self.label else "a")
        if state == "b":
            return Species(self.mass_b, label=f"{self.label}|b" if self.label else "b")
        raise ValueError(f"state must be 'a' or 'b', got {state!r}")


@dataclass(frozen=True)
class Pulse:
    """One light pulse: its time, per-branch wave numbers and laser phases.

    ``k_upper``/``k_lower`` are the momentum transfers divided by hbar (1/m)
    that branch 1 / branch 2 receive; zero means the branch is not addressed.
    This is a plain container: field validation lives in
    :func:`validate_sequence`, which reports instead of raising.
    """

    t: float          # s
    k_upper: float    # 1/m
    k_lower: float    # 1/m
    phi_upper: float = 0.0  # rad
    phi_lower: float = 0.0  # rad

    @property
    def delta_k(self) -> float:
        return self.k_upper - self.k_lower


@dataclass(frozen=True)
class PulseSequence:
    """An ordered pulse train plus the interferometer duration.

    ``duration`` defaults to the last pulse time.  ``name`` is an optional
    label carried through the geometry file format; it never affects physics.
    """

    pulses: tuple[Pulse, ...]
    duration: float | None = None
    name: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.duration is None:
            last = self.pulses[-1].t if self.pulses else 0.0
            object.__setattr__(self, "duration", last)

    @property
    def n_pulses(self) -> int:
        return len(self.pulses)

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(p.t for p in self.pulses)


@dataclass(frozen=True)
class Violation:
    """One validation finding: the broken rule, the pulse it names, a message."""

    rule: str
    pulse_index: int | None
    message: str


_PULSE_FIELDS = ("t", "k_upper", "k_lower", "phi_upper", "phi_lower")

# Rules that make a sequence unusable even for bare kinematics.  "too few
# pulses" is excluded: trajectories and the numeric integrator are well
# defined for zero or one pulse, only interference needs at least two.
STRUCTURAL_RULES = ("non-finite field", "non-monotone times", "duration before last pulse")


def validate_sequence(seq: PulseSequence) -> list[Violation]:
    """Check a sequence against its invariants and report every violation.

    Never raises; returns an empty list for a valid sequence.  The result is
    deterministic and idempotent: pulses are scanned in order, sequence-level
    rules afterwards.
    """
    out: list[Violation] = []
    for i, p in enumerate(seq.pulses):
        for name in _PULSE_FIELDS:
            v = getattr(p, name)
            if not _finite(v):
                out.append(Violation("non-finite field", i, f"pulse {i}: {name} = {v!r}"))
        if i > 0 and _finite(p.t) and _finite(seq.pulses[i - 1].t) and p.t <= seq.pulses[i - 1].t:
            out.append(
                Violation(
                    "non-monotone times",
                    i,
                    f"pulse {i}: t = {p.t!r} does not exceed previous t = {seq.pulses[i-1].t!r}",
                )
            )
    if not _finite(seq.duration):
        out.append(Violation("non-finite field", None, f"duration = {seq.duration!r}"))
    elif seq.pulses and _finite(seq.pulses[-1].t) and seq.duration < seq.pulses[-1].t:
        out.append(
            Violation(
                "duration before last pulse",
                None,
                f"duration {seq.duration!r} < last pulse time {seq.pulses[-1].t!r}",
            )
        )
    if len(seq.pulses) < 2:
        out.append(
            Violation("too few pulses", None, f"{len(seq.pulses)} pulse(s); interference needs >= 2")
        )
    return out


def require_valid(seq: PulseSequence, *, structural_only: bool = False) -> None:
    """Raise ValueError listing all violations; optionally skip the pulse-count rule."""
    bad = validate_sequence(seq)
    if structural_only:
        bad = [v for v in bad if v.rule in STRUCTURAL_RULES]
    if bad:
        detail = "; ".join(f"[{v.rule}] {v.message}" for v in bad)
        raise ValueError(f"invalid pulse sequence: {detail}")


@dataclass(frozen=True)
class GravityEnv:
    """Uniform gravitational environment: acceleration -g along z.

    ``gradient`` (1/s^2) is carried for validation and exploratory numeric
    integration only; every closed-form result requires it to be zero.
    """

    g: float            # m/s^2
    gradient: float = 0.0  # 1/s^2

    def __post_init__(self) -> None:
        if not _finite(self.g):
            raise ValueError(f"g must be finite, got {self.g!r}")
        if not _finite(self.gradient):
            raise ValueError(f"gradient must be finite, got {self.gradient!r}")

    def require_uniform(self) -> None:
        if self.gradient != 0.0:
            raise ValueError(
                "closed-form phases are only defined for a uniform field (gradient = 0); "
                f"got gradient = {self.gradient!r}"
            )


@dataclass(frozen=True)
class InitialConditions:
    """Launch position and velocity of the undiffracted trajectory at t = 0."""

    z0: float = 0.0  # m
    v0: float = 0.0  # m/s

    def __post_init__(self) -> None:
        if not (_finite(self.z0) and _finite(self.v0)):
            raise ValueError(f"initial conditions must be finite, got ({self.z0!r}, {self.v0!r})")


@dataclass(frozen=True)
class PhaseBreakdown:
    """Interferometer phase split into its three closed-form contributions.

    ``total_phase = recoil_phase + gravito_recoil + laser_phase`` holds by
    construction (the constructor computes the sum once), with
    ``recoil_phase = compton_frequency * delta_tau``.
    """

    delta_tau: float       # s, proper-time difference between the branches
    recoil_phase: float    # rad
    gravito_recoil: float  # rad
    laser_phase: float     # rad
    total_phase: float     # rad

    @classmethod
    def assemble(
        cls, delta_tau: float, recoil_phase: float, gravito_recoil: float, laser_phase: float
    ) -> "PhaseBreakdown":
        total = recoil_phase + gravito_recoil + laser_phase
        return cls(delta_tau, recoil_phase, gravito_recoil, laser_phase, total)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def as_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent)

    def as_table(self) -> str:
        units = {
            "delta_tau": "s",
            "recoil_phase": "rad",
            "gravito_recoil": "rad",
            "laser_phase": "rad",
            "total_phase": "rad",
        }
        rows = [(name, f"{value:+.16e}", units[name]) for name, value in self.as_dict().items()]
        width = max(len(name) for name, _, _ in rows)
        return "\n".join(f"{name:<{width}}  {val} {unit}" for name, val, unit in rows)
