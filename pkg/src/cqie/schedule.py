"""Time-dependent control protocols and annealer energy scales.

A protocol is a pair of piecewise-linear controls: s(t) selects the point
on the annealer energy curves A(s), B(s); g(t) gates the longitudinal
field.  The instantaneous Hamiltonian coefficients (all in GHz) are

    bx = A(s(t)) / 2                  transverse field
    bz = (B(s(t)) / 2) * g(t) * h_bar longitudinal field
    jz = (B(s(t)) / 2) * J            coupling strength

The internal energy convention used by every engine in this package is

    E = -bx * sum sigma_x + bz * sum sigma_z - jz * sum_(ij) sigma_z sigma_z

with the target computational state |0> mapped to sigma_z = -1, so a
positive h_bar drives the register toward all-|0> and a positive J is
ferromagnetic (alignment is favoured).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidArgumentError

# Minimum control-segment length in microseconds (hardware time resolution).
TIME_RESOLUTION_US = 0.01


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation through (t, value) breakpoints; evaluation
    outside the breakpoint range is an error."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or len(self.times) < 2:
            raise InvalidArgumentError("need >= 2 matching breakpoints")
        t = np.asarray(self.times)
        if not np.all(np.diff(t) > 0):
            raise InvalidArgumentError("breakpoint times must strictly increase")

    @property
    def t_min(self) -> float:
        return self.times[0]

    @property
    def t_max(self) -> float:
        return self.times[-1]

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < self.t_min - 1e-12) or np.any(t_arr > self.t_max + 1e-12):
            raise InvalidArgumentError(
                f"evaluation at t={t} outside [{self.t_min}, {self.t_max}]")
        out = np.interp(np.clip(t_arr, self.t_min, self.t_max),
                        self.times, self.values)
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


class ProtocolVariant(str, Enum):
    ORIGINAL = "original"
    QUENCH = "quench"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ProtocolSchedule:
    s_of_t: PiecewiseLinear
    g_of_t: PiecewiseLinear
    duration: float  # microseconds
    s_bar: float
    h_bar: float
    j_coupling: float
    variant: ProtocolVariant

    def __post_init__(self):
        for name, pl in (("s", self.s_of_t), ("g", self.g_of_t)):
            if pl.t_min != 0.0 or abs(pl.t_max - self.duration) > 1e-12:
                raise InvalidArgumentError(
                    f"{name}(t) must span [0, duration={self.duration}]")
            if np.min(np.diff(np.asarray(pl.times))) < TIME_RESOLUTION_US - 1e-12:
                raise InvalidArgumentError(
                    f"{name}(t) has a segment shorter than {TIME_RESOLUTION_US} us")
        if abs(self.s_of_t(0.0) - 1.0) > 1e-12 or abs(self.g_of_t(0.0)) > 1e-12:
            raise InvalidArgumentError("protocol must start at s=1, g=0")

    def fingerprint(self) -> str:
        h = hashlib.sha256(self.to_json().encode())
        return h.hexdigest()[:16]

    def to_json(self) -> str:
        return json.dumps({
            "variant": self.variant.value,
            "duration_us": self.duration,
            "s_bar": self.s_bar,
            "h_bar": self.h_bar,
            "j_coupling": self.j_coupling,
            "s_breakpoints": [list(p) for p in
                              zip(self.s_of_t.times, self.s_of_t.values)],
            "g_breakpoints": [list(p) for p in
                              zip(self.g_of_t.times, self.g_of_t.values)],
        }, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "ProtocolSchedule":
        d = json.loads(text)
        s_t, s_v = zip(*d["s_breakpoints"])
        g_t, g_v = zip(*d["g_breakpoints"])
        return ProtocolSchedule(
            s_of_t=PiecewiseLinear(tuple(s_t), tuple(s_v)),
            g_of_t=PiecewiseLinear(tuple(g_t), tuple(g_v)),
            duration=d["duration_us"], s_bar=d["s_bar"], h_bar=d["h_bar"],
            j_coupling=d["j_coupling"], variant=ProtocolVariant(d["variant"]))


def _check_protocol_args(s_bar: float, h_bar: float) -> None:
    if not 0.0 < s_bar <= 1.0:
        raise InvalidArgumentError(f"s_bar must be in (0, 1], got {s_bar}")
    if h_bar < 0:
        raise InvalidArgumentError(f"h_bar must be >= 0, got {h_bar}")


def make_original_protocol(s_bar: float, h_bar: float, j: float) -> ProtocolSchedule:
    """30 us cycle: s dips 1 -> s_bar -> 1 while g ramps 0 -> 1 -> 0."""
    _check_protocol_args(s_bar, h_bar)
    return ProtocolSchedule(
        s_of_t=PiecewiseLinear((0.0, 10.0, 20.0, 30.0), (1.0, s_bar, s_bar, 1.0)),
        g_of_t=PiecewiseLinear((0.0, 10.0, 20.0, 30.0), (0.0, 0.0, 1.0, 0.0)),
        duration=30.0, s_bar=s_bar, h_bar=h_bar, j_coupling=j,
        variant=ProtocolVariant.ORIGINAL)


def make_quench_protocol(s_bar: float, h_bar: float, j: float) -> ProtocolSchedule:
    """Variant holding g at 1 until t=30 us, then dropping it in 0.01 us.

    s follows the original shape and is held at 1 for the final 0.01 us.
    """
    _check_protocol_args(s_bar, h_bar)
    return ProtocolSchedule(
        s_of_t=PiecewiseLinear((0.0, 10.0, 20.0, 30.0, 30.01),
                               (1.0, s_bar, s_bar, 1.0, 1.0)),
        g_of_t=PiecewiseLinear((0.0, 10.0, 20.0, 30.0, 30.01),
                               (0.0, 0.0, 1.0, 1.0, 0.0)),
        duration=30.01, s_bar=s_bar, h_bar=h_bar, j_coupling=j,
        variant=ProtocolVariant.QUENCH)


# s value at and above which the default transverse-field curve is zero;
# protocols that never go below this are purely classical.
A_CUTOFF_S = 0.5


@dataclass(frozen=True)
class EnergyScales:
    """Annealer energy curves A(s), B(s) in GHz over s in [0, 1]."""

    a_of_s: PiecewiseLinear
    b_of_s: PiecewiseLinear

    def __post_init__(self):
        for pl in (self.a_of_s, self.b_of_s):
            if pl.t_min != 0.0 or pl.t_max != 1.0:
                raise InvalidArgumentError("energy curves must span s in [0, 1]")
        a_vals = np.asarray(self.a_of_s.values)
        if np.any(np.diff(a_vals) > 1e-12) or abs(a_vals[-1]) > 1e-9:
            raise InvalidArgumentError("A(s) must be nonincreasing with A(1)=0")
        b_vals = np.asarray(self.b_of_s.values)
        if np.any(np.diff(b_vals) < -1e-12) or b_vals[-1] <= 0:
            raise InvalidArgumentError("B(s) must be nondecreasing, positive at s=1")


def linear_energy_scales(a_max: float, b_max: float) -> EnergyScales:
    """Linear surrogate for unpublished hardware curves.

    A(s) = a_max*(1-s) on the quantum side, truncated to zero for
    s >= 0.5 so that the s_bar=0.6 protocol carries no transverse field;
    B(s) = b_max*s.
    """
    if a_max < 0:
        raise InvalidArgumentError(f"a_max must be >= 0, got {a_max}")
    if b_max <= 0:
        raise InvalidArgumentError(f"b_max must be > 0, got {b_max}")
    return EnergyScales(
        a_of_s=PiecewiseLinear((0.0, 0.4, A_CUTOFF_S, 1.0),
                               (a_max, 0.6 * a_max, 0.0, 0.0)),
        b_of_s=PiecewiseLinear((0.0, 1.0), (0.0, b_max)))


def load_energy_scales_csv(path) -> EnergyScales:
    """Tabulated curves: header `s,A_GHz,B_GHz`, s increasing over [0, 1]."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "s,A_GHz,B_GHz":
            raise InvalidArgumentError(
                f"expected header 's,A_GHz,B_GHz', got {header!r}")
        rows = [tuple(float(x) for x in line.split(",")) for line in fh if line.strip()]
    if not rows or rows[0][0] != 0.0 or rows[-1][0] != 1.0:
        raise InvalidArgumentError("energy-scale table must span s from 0 to 1")
    s, a, b = zip(*rows)
    return EnergyScales(a_of_s=PiecewiseLinear(s, a), b_of_s=PiecewiseLinear(s, b))


@dataclass(frozen=True)
class HamiltonianParams:
    """Instantaneous Hamiltonian coefficients in GHz (see module docstring
    for the sign convention)."""

    bx: float
    bz: float
    jz: float


def instantaneous_params(sched: ProtocolSchedule, scales: EnergyScales,
                         t: float) -> HamiltonianParams:
    """Evaluate the schedule and energy curves at time t (microseconds)."""
    if not 0.0 <= t <= sched.duration + 1e-12:
        raise InvalidArgumentError(
            f"t={t} outside protocol domain [0, {sched.duration}]")
    s = sched.s_of_t(t)
    g = sched.g_of_t(t)
    half_b = scales.b_of_s(s) / 2.0
    return HamiltonianParams(
        bx=scales.a_of_s(s) / 2.0,
        bz=half_b * g * sched.h_bar,
        jz=half_b * sched.j_coupling)


def classical_flag(sched: ProtocolSchedule,
                   scales: EnergyScales | None = None,
                   tol: float = 1e-9) -> bool:
    """True iff the transverse field stays zero over the whole protocol."""
    if scales is None:
        scales = linear_energy_scales(6.0, 12.0)
    # s(t) is piecewise linear and A(s) nonincreasing, so the maximum of
    # A(s(t)) is attained at the minimum of s over the breakpoints.
    s_min = min(sched.s_of_t.values)
    return scales.a_of_s(s_min) <= tol


def default_energy_scales() -> EnergyScales:
    """The package default: linear surrogate with a_max=6, b_max=12 GHz."""
    return linear_energy_scales(6.0, 12.0)
