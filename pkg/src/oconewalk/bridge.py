"""Space discretization of sampled continuous paths and the cosine-product
characteristic-function machinery.

A sampled path is discretized at mesh a by recording the successive times
its value moves a away from the last recorded level, which yields a lattice
path within a of the original (exactly so when crossings are exact).  For a
fair walk read through such a lattice, the characteristic function of a
step-function integral is a finite product of cosine powers that converges,
as the mesh shrinks, to the Gaussian exponential exp(-1/2 sum lambda_j^2
delta<M>_j); ``cf_ocone_test`` compares both sides on Monte Carlo samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .paths import LatticePath

DEFAULT_MESHES = tuple(2.0 ** -n for n in range(1, 11))


class BreakpointBeyondHorizon(ValueError):
    """A step-function breakpoint exceeds the available time range."""


class SampledContinuousPath:
    """Continuous path observed on an increasing time grid, started at 0.

    ``exact_crossings`` marks paths (scaled lattice walks sampled at their
    own step times) whose level crossings the grid resolves exactly.
    """

    def __init__(self, times, values, exact_crossings: bool = False):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be aligned 1-d arrays")
        if times.size == 0 or times[0] != 0.0 or values[0] != 0.0:
            raise ValueError("path must start at (t, x) = (0, 0)")
        if np.any(np.diff(times) <= 0):
            raise ValueError("non-monotone time grid")
        self.times = times
        self.values = values
        self.exact_crossings = bool(exact_crossings)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def value_at(self, t: float) -> float:
        if t > self.times[-1]:
            raise BreakpointBeyondHorizon(f"t={t} beyond horizon {self.times[-1]}")
        return float(np.interp(t, self.times, self.values))

    def reflected(self, level: float) -> "SampledContinuousPath":
        """Mirror about ``level`` after the first grid point hitting it exactly."""
        hits = np.nonzero(self.values == level)[0]
        if hits.size == 0:
            return self
        t = hits[0]
        vals = self.values.copy()
        vals[t + 1 :] = 2.0 * level - vals[t + 1 :]
        return SampledContinuousPath(self.times, vals, self.exact_crossings)


class QVRecord:
    """Nondecreasing quadratic-variation record on a time grid."""

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("times and values must be aligned 1-d arrays")
        if values[0] != 0.0 or np.any(np.diff(values) < 0):
            raise ValueError("quadratic variation must start at 0 and be nondecreasing")
        self.times = times
        self.values = values

    def at(self, t: float) -> float:
        if t > self.times[-1]:
            raise BreakpointBeyondHorizon(f"t={t} beyond horizon {self.times[-1]}")
        return float(np.interp(t, self.times, self.values))


@dataclass(frozen=True)
class StepFunction:
    """h = sum_j coefficients[j] * 1_{]breakpoints[j], breakpoints[j+1]]}."""

    breakpoints: tuple[float, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(t) for t in self.breakpoints)
        co = tuple(float(c) for c in self.coefficients)
        if len(bp) != len(co) + 1:
            raise ValueError("need one more breakpoint than coefficients")
        if bp[0] != 0.0 or any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing from 0")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "coefficients", co)

    @property
    def t_end(self) -> float:
        return self.breakpoints[-1]


# ---------------------------------------------------------------------------
# discretization

def discretize(path: SampledContinuousPath, mesh: float) -> LatticePath:
    """Lattice path of the successive +-mesh moves of the sampled path.

    Crossing times between samples are located by linear interpolation; when
    the input flags exact crossings the interpolation is exact because every
    crossing coincides with a grid point.
    """
    if mesh <= 0:
        raise ValueError("mesh must be positive")
    times, values = path.times, path.values
    jump_times: list[float] = []
    jump_signs: list[int] = []
    level = 0.0
    anchor_t, anchor_v = float(times[0]), float(values[0])
    for i in range(1, times.size):
        t1, v1 = float(times[i]), float(values[i])
        while abs(v1 - level) >= mesh:
            direction = 1 if v1 > level else -1
            target = level + direction * mesh
            frac = (target - anchor_v) / (v1 - anchor_v)
            t_cross = anchor_t + frac * (t1 - anchor_t)
            jump_times.append(t_cross)
            jump_signs.append(direction)
            level = target
            anchor_t, anchor_v = t_cross, target
        anchor_t, anchor_v = t1, v1
    return LatticePath(mesh, jump_times, jump_signs, path.t_end)


@dataclass(frozen=True)
class SupGapReport:
    gap: float
    mesh: float
    slack: float
    bound_holds: bool
    exact: bool

    def to_json_obj(self) -> dict:
        return {
            "sup_gap": self.gap,
            "mesh": self.mesh,
            "interpolation_slack": self.slack,
            "bound_holds": self.bound_holds,
            "exact_crossings": self.exact,
        }


def lattice_values_at(lat: LatticePath, times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    jt = np.asarray(lat.jump_times)
    steps = np.concatenate([[0.0], lat.mesh * np.cumsum(lat.jump_signs)])
    counts = np.searchsorted(jt, times, side="right")
    return steps[counts]


def sup_gap(path: SampledContinuousPath, lat: LatticePath) -> SupGapReport:
    """Largest |path - lattice| over the sample grid.

    For exact-crossing inputs the gap never exceeds the mesh; otherwise the
    crossing times are interpolated and the bound is honest only up to the
    largest single-segment movement, reported as slack.
    """
    if lat.t_end != path.t_end:
        raise ValueError("path and lattice horizons differ")
    gaps = np.abs(path.values - lattice_values_at(lat, path.times))
    gap = float(gaps.max())
    if path.exact_crossings:
        slack = 0.0
    else:
        slack = float(np.abs(np.diff(path.values)).max(initial=0.0))
    return SupGapReport(gap, lat.mesh, slack, gap <= lat.mesh + slack, path.exact_crossings)


# ---------------------------------------------------------------------------
# step integrals and characteristic functions

def stochastic_step_integral(path, h: StepFunction) -> float:
    """sum_j lambda_j (M_{t_j} - M_{t_{j-1}}) over the step function's blocks."""
    if isinstance(path, LatticePath) and h.t_end > path.t_end:
        # sampled paths guard their own horizon in value_at
        raise BreakpointBeyondHorizon(
            f"breakpoint {h.t_end} beyond horizon {path.t_end}"
        )
    value = path.value_at
    total = 0.0
    for lam, t0, t1 in zip(h.coefficients, h.breakpoints, h.breakpoints[1:]):
        total += lam * (value(t1) - value(t0))
    return total


def cos_product(qv: QVRecord, h: StepFunction, mesh: float) -> float:
    """prod_j cos(lambda_j * mesh)^(u_j - u_{j-1}) with u_j = floor(qv(t_j)/mesh^2).

    Defined only while every |lambda_j| * mesh stays below pi/2, where the
    cosine is positive; as the mesh shrinks the product approaches
    ``limit_exponential`` at second order in the mesh.
    """
    if mesh <= 0:
        raise ValueError("mesh must be positive")
    for lam in h.coefficients:
        if abs(lam) * mesh >= math.pi / 2:
            raise ValueError(
                f"|lambda|*mesh = {abs(lam) * mesh} leaves the positive cosine range"
            )
    inv2 = mesh ** -2
    u = [math.floor(inv2 * qv.at(t)) for t in h.breakpoints]
    out = 1.0
    for lam, u0, u1 in zip(h.coefficients, u, u[1:]):
        out *= math.cos(lam * mesh) ** (u1 - u0)
    return out


def limit_exponential(qv: QVRecord, h: StepFunction) -> float:
    """exp(-1/2 sum_j lambda_j^2 (qv(t_j) - qv(t_{j-1})))."""
    total = 0.0
    for lam, t0, t1 in zip(h.coefficients, h.breakpoints, h.breakpoints[1:]):
        total += lam * lam * (qv.at(t1) - qv.at(t0))
    return math.exp(-0.5 * total)


def convergence_order(qv: QVRecord, h: StepFunction, meshes=None) -> tuple[float, list]:
    """Fitted slope of log |cos_product - limit| against log mesh."""
    meshes = DEFAULT_MESHES[3:] if meshes is None else tuple(meshes)
    limit = limit_exponential(qv, h)
    rows = []
    for a in meshes:
        err = abs(cos_product(qv, h, a) - limit)
        rows.append((a, err))
    xs = np.log([a for a, e in rows])
    ys = np.log([e for a, e in rows])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, rows


# ---------------------------------------------------------------------------
# Monte Carlo characteristic-function comparison

@dataclass(frozen=True)
class CFReport:
    lhs: complex
    rhs: float
    stderr: float
    z: float
    n: int
    passed: bool

    def to_json_obj(self) -> dict:
        return {
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": self.rhs,
            "abs_difference": abs(self.lhs - self.rhs),
            "stderr": self.stderr,
            "z": self.z,
            "n": self.n,
            "passed": self.passed,
        }


def cf_ocone_test_arrays(dM: np.ndarray, dQ: np.ndarray, h: StepFunction,
                         z: float = 3.0) -> CFReport:
    """Compare E exp(i sum lambda dM) with E exp(-1/2 sum lambda^2 dQ).

    ``dM`` and ``dQ`` hold per-sample path and quadratic-variation increments
    over the step function's blocks, shape (n, k).  The threshold is z times
    the combined standard error of both empirical means.
    """
    dM = np.asarray(dM, dtype=float)
    dQ = np.asarray(dQ, dtype=float)
    n = dM.shape[0]
    if n < 2:
        raise ValueError("at least two samples required")
    lam = np.asarray(h.coefficients)
    if dM.shape[1] != lam.size or dQ.shape != dM.shape:
        raise ValueError("increment arrays must match the step function blocks")
    ints = dM @ lam
    lhs_samples = np.exp(1j * ints)
    rhs_samples = np.exp(-0.5 * (dQ @ (lam * lam)))
    lhs = complex(lhs_samples.mean())
    rhs = float(rhs_samples.mean())
    se2 = (
        lhs_samples.real.var(ddof=1) + lhs_samples.imag.var(ddof=1)
        + rhs_samples.var(ddof=1)
    ) / n
    stderr = math.sqrt(se2)
    passed = abs(lhs - rhs) <= z * stderr
    return CFReport(lhs, rhs, stderr, z, n, passed)


def cf_ocone_test(samples, h: StepFunction, z: float = 3.0) -> CFReport:
    """Array-free entry point: ``samples`` is an iterable of (path, qv) pairs."""
    dM_rows = []
    dQ_rows = []
    for path, qv in samples:
        value = path.value_at
        dM_rows.append([
            value(t1) - value(t0)
            for t0, t1 in zip(h.breakpoints, h.breakpoints[1:])
        ])
        dQ_rows.append([
            qv.at(t1) - qv.at(t0)
            for t0, t1 in zip(h.breakpoints, h.breakpoints[1:])
        ])
    if not dM_rows:
        raise ValueError("empty sample set")
    return cf_ocone_test_arrays(np.array(dM_rows), np.array(dQ_rows), h, z)
