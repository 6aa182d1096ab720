"""Seedable samplers and statistical reflection/independence tests.

Counter-based Philox streams keyed by (seed, role) make every sampler
reproducible: the same spec, seed and sample count produce byte-identical
reports regardless of platform.  Discrete samplers return whole-path value
matrices; continuous samplers return (path, quadratic variation) pairs or
per-block increment arrays for the characteristic-function harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np
from scipy.stats import chi2

from .bridge import QVRecord, SampledContinuousPath, StepFunction
from .laws import PathLaw
from .paths import SkipFreePath, WalkPath, to_text

KINDS = (
    "bernoulli-walk",
    "ocone-time-change",
    "ce1",
    "ce2",
    "brownian-grid",
    "brownian-walk",
    "dependent-time-change",
)

_DISCRETE_KINDS = ("bernoulli-walk", "ocone-time-change", "ce1", "ce2",
                   "dependent-time-change")

MIN_EXPECTED_CELL = 5.0


class UndersizedSample(ValueError):
    """Not enough data per cell even after merging."""


@dataclass(frozen=True, eq=False)
class SamplerSpec:
    """Description of a sampler: kind, parameters and master seed.

    Discrete kinds use ``horizon``; continuous kinds use ``t_end``/``dt``
    (grid) or ``mesh`` (scaled walk).  The time-changed kinds accept an
    explicit exact time-change law (discrete) or slow/fast rates drawn at
    ``switch_time`` (continuous); the dependent kind reuses the same knobs
    but keys the rate to the driving path's sign.
    """

    kind: str
    seed: int = 0
    horizon: int | None = None
    mesh: float | None = None
    t_end: float | None = None
    dt: float | None = None
    time_change_law: PathLaw | None = None
    rate_slow: float = 0.5
    rate_fast: float = 2.0
    switch_time: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def describe(self) -> dict:
        out = {"kind": self.kind, "seed": self.seed}
        for key in ("horizon", "mesh", "t_end", "dt", "switch_time"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.kind.endswith("time-change"):
            out["rate_slow"] = self.rate_slow
            out["rate_fast"] = self.rate_fast
            if self.time_change_law is not None:
                out["time_change_support"] = len(self.time_change_law)
        return out


_ROLE_PRIMARY = 0
_ROLE_REFLECTED = 1
_ROLE_TIME_CHANGE = 2


def _rng(spec: SamplerSpec, role: int) -> np.random.Generator:
    kind_code = KINDS.index(spec.kind)
    seq = np.random.SeedSequence([spec.seed, role, kind_code])
    return np.random.Generator(np.random.Philox(seq))


def _require(spec: SamplerSpec, **fields):
    for name, needed in fields.items():
        if needed and getattr(spec, name) is None:
            raise ValueError(f"{spec.kind} sampler needs {name}")


# ---------------------------------------------------------------------------
# discrete samplers: (n, m+1) value matrices

def _signs(rng, shape) -> np.ndarray:
    return (2 * rng.integers(0, 2, size=shape, dtype=np.int64) - 1)


def _values_from_steps(steps: np.ndarray) -> np.ndarray:
    n = steps.shape[0]
    return np.hstack([np.zeros((n, 1), dtype=np.int64), np.cumsum(steps, axis=1)])


def _ce1_steps(rng, n: int, m: int) -> np.ndarray:
    k = m if m < 3 else m - 1
    free = _signs(rng, (n, k))
    steps = np.empty((n, m), dtype=np.int64)
    j = 0
    for col in range(1, m + 1):
        if col == 3:
            steps[:, 2] = steps[:, 1]
            continue
        steps[:, col - 1] = free[:, j]
        j += 1
    return steps


def _ce2_steps(rng, n: int, m: int) -> np.ndarray:
    blocks = m.bit_length()
    bits = _signs(rng, (n, blocks))
    block_of = [col.bit_length() - 1 for col in range(1, m + 1)]
    return bits[:, block_of]


def _time_change_matrix(law: PathLaw) -> tuple[np.ndarray, np.ndarray]:
    paths = sorted(law.support, key=lambda p: p.values)
    mat = np.array([p.values for p in paths], dtype=np.int64)
    probs = np.array([float(law.support[p]) for p in paths])
    probs = probs / probs.sum()
    return mat, probs


def discrete_values(spec: SamplerSpec, n: int, role: int = _ROLE_PRIMARY) -> np.ndarray:
    """Sample n paths of a discrete kind as an (n, horizon+1) value matrix."""
    if spec.kind not in _DISCRETE_KINDS:
        raise ValueError(f"{spec.kind} is not a discrete path sampler")
    _require(spec, horizon=True)
    m = spec.horizon
    rng = _rng(spec, role)
    if spec.kind == "bernoulli-walk":
        return _values_from_steps(_signs(rng, (n, m)))
    if spec.kind == "ce1":
        return _values_from_steps(_ce1_steps(rng, n, m))
    if spec.kind == "ce2":
        return _values_from_steps(_ce2_steps(rng, n, m))
    if spec.kind == "ocone-time-change":
        _require(spec, time_change_law=True)
        if spec.time_change_law.horizon != m:
            raise ValueError("time change law horizon differs from spec horizon")
        changes, probs = _time_change_matrix(spec.time_change_law)
        walk = _values_from_steps(_signs(rng, (n, m)))
        pick = _rng(spec, _ROLE_TIME_CHANGE + role).choice(len(probs), size=n, p=probs)
        gather = changes[pick]
        return np.take_along_axis(walk, gather, axis=1)
    # dependent-time-change: pauses keyed to the walk's first step
    walk = _values_from_steps(_signs(rng, (n, m)))
    cols = np.arange(m + 1)
    fast = cols
    slow = (cols + 1) // 2
    gather = np.where((walk[:, 1] > 0)[:, None], fast[None, :], slow[None, :])
    return np.take_along_axis(walk, gather, axis=1)


def reflect_values_batch(values: np.ndarray, a: int) -> np.ndarray:
    """Vectorized reflection of an (n, L) value matrix at integer level a."""
    hits = values == a
    any_hit = hits.any(axis=1)
    first = np.where(any_hit, hits.argmax(axis=1), values.shape[1])
    cols = np.arange(values.shape[1])[None, :]
    return np.where(cols <= first[:, None], values, 2 * a - values)


@dataclass
class DiscretePathBatch:
    """Sampled discrete paths held as a value matrix."""

    values: np.ndarray
    kind: str

    def __len__(self):
        return self.values.shape[0]

    def paths(self) -> Iterator[SkipFreePath]:
        walk_like = self.kind in ("bernoulli-walk", "ce1", "ce2")
        cls = WalkPath if walk_like else SkipFreePath
        for row in self.values:
            yield cls(tuple(int(v) for v in row))

    def __iter__(self):
        return self.paths()


def sample(spec: SamplerSpec, n: int):
    """Draw n i.i.d. paths according to the spec.

    Discrete kinds return a DiscretePathBatch; continuous kinds return a
    list of (SampledContinuousPath, QVRecord) pairs suitable for
    ``cf_ocone_test``.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if spec.kind in _DISCRETE_KINDS:
        return DiscretePathBatch(discrete_values(spec, n), spec.kind)
    if spec.kind == "brownian-grid":
        return _sample_brownian_grid(spec, n)
    return _sample_brownian_walk(spec, n)


def _sample_brownian_grid(spec: SamplerSpec, n: int):
    _require(spec, t_end=True, dt=True)
    steps = int(round(spec.t_end / spec.dt))
    times = np.linspace(0.0, steps * spec.dt, steps + 1)
    rng = _rng(spec, _ROLE_PRIMARY)
    incs = rng.standard_normal((n, steps)) * math.sqrt(spec.dt)
    values = np.hstack([np.zeros((n, 1)), np.cumsum(incs, axis=1)])
    qv = QVRecord(times, times.copy())
    return [
        (SampledContinuousPath(times, values[i]), qv) for i in range(n)
    ]


def _sample_brownian_walk(spec: SamplerSpec, n: int):
    _require(spec, t_end=True, mesh=True)
    eta = spec.mesh
    steps = int(round(spec.t_end / (eta * eta)))
    times = (eta * eta) * np.arange(steps + 1)
    rng = _rng(spec, _ROLE_PRIMARY)
    qv = QVRecord(times, (eta * eta) * np.arange(steps + 1))
    out = []
    for i in range(n):
        walk = np.concatenate([[0], np.cumsum(_signs(rng, steps))])
        out.append(
            (SampledContinuousPath(times, eta * walk, exact_crossings=True), qv)
        )
    return out


# ---------------------------------------------------------------------------
# scaled-walk discretization statistics (vectorized; walk mesh = detect mesh / 2)

def walk_gap_and_crossings(spec: SamplerSpec, detect_mesh: float, n: int,
                           batch: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample sup gap and crossing count for exact scaled-walk samples.

    The walk moves by detect_mesh/2 each tick of duration (detect_mesh/2)^2,
    so each 2-tick round either crosses one detection level (its ticks
    agree, probability 1/2) or returns to the previous level; a horizon of
    t_end spans 2 * t_end / detect_mesh^2 rounds.  The lattice jumps exactly
    at the closing tick of each crossing round, which is what ``discretize``
    finds on these paths.
    """
    _require(spec, t_end=True)
    rounds = int(round(2.0 * spec.t_end / (detect_mesh * detect_mesh)))
    rng = _rng(spec, _ROLE_PRIMARY)
    gaps = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    eta = detect_mesh / 2.0
    done = 0
    while done < n:
        b = min(batch, n - done)
        steps = 2 * rng.integers(0, 2, size=(b, 2 * rounds), dtype=np.int8) - 1
        walk = np.zeros((b, 2 * rounds + 1), dtype=np.int32)
        np.cumsum(steps, axis=1, dtype=np.int32, out=walk[:, 1:])
        nets = steps.reshape(b, rounds, 2).sum(axis=2, dtype=np.int32) // 2
        levels = np.zeros((b, rounds + 1), dtype=np.int32)
        np.cumsum(nets, axis=1, dtype=np.int32, out=levels[:, 1:])
        # lattice value at tick k is levels[k // 2], in units of 2 * eta
        walk -= 2 * np.repeat(levels, 2, axis=1)[:, : 2 * rounds + 1]
        np.abs(walk, out=walk)
        gaps[done : done + b] = eta * walk.max(axis=1)
        counts[done : done + b] = (nets != 0).sum(axis=1)
        done += b
    return gaps, counts


def crossing_counts(spec: SamplerSpec, detect_mesh: float, n: int) -> np.ndarray:
    """Crossing counts only, drawn at round granularity (Binomial(R, 1/2)).

    Each 2-tick round of the half-mesh walk crosses independently with
    probability 1/2 (see ``walk_gap_and_crossings``), so the count over a
    t_end horizon is binomial over its 2 * t_end / mesh^2 rounds.
    """
    _require(spec, t_end=True)
    rounds = int(round(2.0 * spec.t_end / (detect_mesh * detect_mesh)))
    rng = _rng(spec, _ROLE_PRIMARY)
    return rng.binomial(rounds, 0.5, size=n)


# ---------------------------------------------------------------------------
# characteristic-function sample arrays

def cf_increment_arrays(spec: SamplerSpec, h: StepFunction, n: int
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample (path increment, qv increment) arrays over h's blocks."""
    rng = _rng(spec, _ROLE_PRIMARY)
    breaks = np.asarray(h.breakpoints)
    dt = np.diff(breaks)
    k = dt.size
    if spec.kind == "brownian-grid":
        dq = np.broadcast_to(dt, (n, k)).copy()
        dm = rng.standard_normal((n, k)) * np.sqrt(dt)
        return dm, dq
    if spec.kind == "brownian-walk":
        _require(spec, mesh=True)
        eta = spec.mesh
        ticks = np.round(dt / (eta * eta)).astype(np.int64)
        if not np.allclose(ticks * eta * eta, dt):
            raise ValueError("breakpoints must be multiples of mesh^2")
        ups = rng.binomial(ticks, 0.5, size=(n, k))
        dm = eta * (2.0 * ups - ticks)
        dq = np.broadcast_to(eta * eta * ticks.astype(float), (n, k)).copy()
        return dm, dq
    if spec.kind == "ocone-time-change":
        rates = np.where(
            _rng(spec, _ROLE_TIME_CHANGE).integers(0, 2, size=n) == 1,
            spec.rate_fast,
            spec.rate_slow,
        )
        dq = rates[:, None] * dt[None, :]
        dm = rng.standard_normal((n, k)) * np.sqrt(dq)
        return dm, dq
    if spec.kind == "dependent-time-change":
        return _dependent_cf_arrays(spec, h, n, rng)
    raise ValueError(f"{spec.kind} does not support characteristic-function sampling")


def _dependent_cf_arrays(spec: SamplerSpec, h: StepFunction, n: int, rng
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Time change running at unit rate, switching at ``switch_time`` to a
    rate keyed to the sign of the path value there (no independence)."""
    switch = spec.switch_time
    times = np.union1d(np.asarray(h.breakpoints), [switch])
    times = times[times <= h.t_end]
    if switch not in times:
        raise ValueError("switch time must not exceed the last breakpoint")
    seg = np.diff(times)
    pre = times[1:] <= switch
    gauss = rng.standard_normal((n, seg.size))
    # unit rate before the switch
    pre_var = np.where(pre, seg, 0.0)
    pre_incs = gauss * np.sqrt(pre_var)
    value_at_switch = pre_incs.sum(axis=1)
    rates = np.where(value_at_switch > 0, spec.rate_fast, spec.rate_slow)
    var = np.where(pre[None, :], seg[None, :], rates[:, None] * seg[None, :])
    incs = np.where(pre[None, :], pre_incs, gauss * np.sqrt(var))
    # aggregate refined segments back onto h's blocks
    block = np.searchsorted(np.asarray(h.breakpoints), times[1:], side="left") - 1
    dm = np.zeros((n, len(h.coefficients)))
    dq = np.zeros((n, len(h.coefficients)))
    for j in range(seg.size):
        dm[:, block[j]] += incs[:, j]
        dq[:, block[j]] += var[:, j]
    return dm, dq


# ---------------------------------------------------------------------------
# cylinder statistics

def cylinder_codes(values: np.ndarray, depth: int) -> np.ndarray:
    """Base-3 code of the first ``depth`` increments of each path."""
    if depth > values.shape[1] - 1:
        raise ValueError(f"depth {depth} exceeds horizon {values.shape[1] - 1}")
    incs = np.diff(values[:, : depth + 1], axis=1) + 1
    weights = 3 ** np.arange(depth, dtype=np.int64)
    return incs.astype(np.int64) @ weights


def decode_cylinder(code: int, depth: int) -> str:
    chars = []
    for _ in range(depth):
        chars.append("-0+"[code % 3])
        code //= 3
    return "".join(chars)


def exact_cylinder_masses(law: PathLaw, depth: int) -> dict[str, Fraction]:
    """Exact cylinder masses of a law at the given depth."""
    out: dict[str, Fraction] = {}
    for path, mass in law.support.items():
        key = to_text(path.truncated(depth), with_horizon=False)
        out[key] = out.get(key, Fraction(0)) + mass
    return out


# ---------------------------------------------------------------------------
# chi-square machinery

def _merge_adjacent(codes: np.ndarray, counts: list[np.ndarray],
                    min_expected: float) -> tuple[list[tuple], list[np.ndarray]]:
    """Greedy lexicographic merge until pooled expected counts clear the bar."""
    total = sum(int(c.sum()) for c in counts)
    shares = [c.sum() / total for c in counts]
    groups: list[tuple] = []
    grouped = [[] for _ in counts]
    acc = np.zeros(len(counts))
    members: list = []
    for idx in np.argsort(codes):
        members.append(codes[idx])
        for s, cnt in enumerate(counts):
            acc[s] += cnt[idx]
        pooled = acc.sum()
        if all(pooled * share >= min_expected for share in shares):
            groups.append(tuple(members))
            for s in range(len(counts)):
                grouped[s].append(acc[s])
            acc = np.zeros(len(counts))
            members = []
    if members:
        if groups:
            groups[-1] = groups[-1] + tuple(members)
            for s in range(len(counts)):
                grouped[s][-1] += acc[s]
        else:
            groups.append(tuple(members))
            for s in range(len(counts)):
                grouped[s].append(acc[s])
    return groups, [np.array(g) for g in grouped]


@dataclass(frozen=True)
class TestReport:
    """Outcome of a cylinder-based chi-square test.

    ``table_rows`` holds the full merged contingency table for CSV export;
    it is not serialized into the JSON report.
    """

    test: str
    statistic: float
    df: int
    p_value: float
    n_samples: int
    depth: int
    alpha: float
    decision: str
    witness_cells: tuple[dict, ...]
    spec: dict
    extras: dict = field(default_factory=dict)
    table_rows: tuple[dict, ...] = ()

    @property
    def reject(self) -> bool:
        return self.decision == "reject"

    def to_json_obj(self) -> dict:
        return {
            "test": self.test,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "n_samples": self.n_samples,
            "cylinder_depth": self.depth,
            "alpha": self.alpha,
            "decision": self.decision,
            "witness_cells": list(self.witness_cells),
            "spec": self.spec,
            **self.extras,
        }


def reflect_two_sample_test(spec: SamplerSpec, a: int, n: int, depth: int,
                            alpha: float = 0.05) -> TestReport:
    """Chi-square two-sample comparison of M-samples against reflected samples.

    Both sample sets come from independent seed-derived streams; the second
    set is pushed through the reflection at level ``a`` before its cylinder
    counts (path prefixes of the given depth) are tabulated.
    """
    if depth > (spec.horizon or 0):
        raise ValueError("depth exceeds the sampler horizon")
    vals1 = discrete_values(spec, n, _ROLE_PRIMARY)
    vals2 = reflect_values_batch(discrete_values(spec, n, _ROLE_REFLECTED), a)
    c1 = cylinder_codes(vals1, depth)
    c2 = cylinder_codes(vals2, depth)
    codes = np.union1d(c1, c2)
    count1 = np.bincount(np.searchsorted(codes, c1), minlength=codes.size).astype(float)
    count2 = np.bincount(np.searchsorted(codes, c2), minlength=codes.size).astype(float)
    groups, (g1, g2) = _merge_adjacent(codes, [count1, count2], MIN_EXPECTED_CELL)
    if len(groups) < 2:
        raise UndersizedSample(
            f"only {len(groups)} usable cylinder group(s) after merging"
        )
    n1, n2 = g1.sum(), g2.sum()
    pooled = (g1 + g2) / (n1 + n2)
    e1, e2 = n1 * pooled, n2 * pooled
    contrib = (g1 - e1) ** 2 / e1 + (g2 - e2) ** 2 / e2
    stat = float(contrib.sum())
    df = len(groups) - 1
    p = float(chi2.sf(stat, df))
    order = np.argsort(contrib)[::-1][:3]
    witnesses = tuple(
        {
            "cells": [decode_cylinder(int(c), depth) for c in groups[i]],
            "observed": [int(g1[i]), int(g2[i])],
            "expected": [float(e1[i]), float(e2[i])],
            "contribution": float(contrib[i]),
        }
        for i in order
    )
    table = tuple(
        {
            "cells": " ".join(decode_cylinder(int(c), depth) for c in groups[i]),
            "observed_1": int(g1[i]),
            "observed_2": int(g2[i]),
            "expected_1": float(e1[i]),
            "expected_2": float(e2[i]),
        }
        for i in range(len(groups))
    )
    return TestReport(
        test="reflect-two-sample",
        statistic=stat,
        df=df,
        p_value=p,
        n_samples=n,
        depth=depth,
        alpha=alpha,
        decision="reject" if p < alpha else "accept",
        witness_cells=witnesses,
        spec=spec.describe(),
        extras={"level": a, "n_groups": len(groups)},
        table_rows=table,
    )


def _walk_prefix_codes(values: np.ndarray, depth: int, j: int) -> np.ndarray:
    """Code of the first j non-flat steps within the first ``depth`` steps."""
    incs = np.diff(values[:, : depth + 1], axis=1)
    move = incs != 0
    order = np.cumsum(move, axis=1)
    codes = np.zeros(values.shape[0], dtype=np.int64)
    for jj in range(1, j + 1):
        pos = np.argmax(order == jj, axis=1)
        sign = np.take_along_axis(incs, pos[:, None], axis=1)[:, 0]
        codes |= (sign > 0).astype(np.int64) << (jj - 1)
    return codes


def ocone_independence_test(spec: SamplerSpec, n: int, depth: int,
                            alpha: float = 0.05) -> TestReport:
    """Chi-square independence of (embedded-walk prefix, QV trajectory).

    Columns are the flat/move patterns of the first ``depth`` steps; rows
    are the first j embedded-walk steps, with j the largest walk depth every
    sampled trajectory exposes (at least 1; samples shorter than j are
    dropped and reported).  A deterministic QV trajectory yields a single
    column and a trivial accept.
    """
    if depth > (spec.horizon or 0):
        raise ValueError("depth exceeds the sampler horizon")
    values = discrete_values(spec, n, _ROLE_PRIMARY)
    incs = np.diff(values[:, : depth + 1], axis=1)
    move = incs != 0
    qv_codes = move.astype(np.int64) @ (1 << np.arange(depth, dtype=np.int64))
    distinct = np.unique(qv_codes)
    base = {
        "test": "ocone-independence",
        "n_samples": n,
        "depth": depth,
        "alpha": alpha,
        "spec": spec.describe(),
    }
    if distinct.size == 1:
        return TestReport(
            statistic=0.0, df=0, p_value=1.0, decision="accept",
            witness_cells=(), extras={"note": "single QV column", "walk_depth": 0},
            **base,
        )
    k_per = move.sum(axis=1)
    j = max(1, int(k_per.min()))
    keep = k_per >= j
    values, qv_codes = values[keep], qv_codes[keep]
    walk_codes = _walk_prefix_codes(values, depth, j)
    rows = np.unique(walk_codes)
    cols = np.unique(qv_codes)
    table = np.zeros((rows.size, cols.size))
    ri = np.searchsorted(rows, walk_codes)
    ci = np.searchsorted(cols, qv_codes)
    np.add.at(table, (ri, ci), 1.0)
    table, rows, cols = _merge_table(table, rows, cols)
    if table.shape[0] < 2 or table.shape[1] < 2:
        raise UndersizedSample("contingency table collapsed below 2x2")
    total = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / total
    if expected.min() < MIN_EXPECTED_CELL:
        raise UndersizedSample(
            f"minimum expected cell {expected.min():.2f} below {MIN_EXPECTED_CELL}"
        )
    contrib = (table - expected) ** 2 / expected
    stat = float(contrib.sum())
    df = (table.shape[0] - 1) * (table.shape[1] - 1)
    p = float(chi2.sf(stat, df))
    flat = np.argsort(contrib, axis=None)[::-1][:3]
    witnesses = tuple(
        {
            "walk_prefix": _decode_walk(rows[i // table.shape[1]], j),
            "qv_pattern": _decode_qv(cols[i % table.shape[1]], depth),
            "observed": float(table.flat[i]),
            "expected": float(expected.flat[i]),
            "contribution": float(contrib.flat[i]),
        }
        for i in flat
    )
    table_rows = tuple(
        {
            "walk_prefix": _decode_walk(rows[r], j),
            "qv_pattern": _decode_qv(cols[c], depth),
            "observed": float(table[r, c]),
            "expected": float(expected[r, c]),
        }
        for r in range(table.shape[0])
        for c in range(table.shape[1])
    )
    return TestReport(
        statistic=stat, df=df, p_value=p,
        decision="reject" if p < alpha else "accept",
        witness_cells=witnesses,
        extras={"walk_depth": j, "retained": int(keep.sum())},
        table_rows=table_rows,
        **base,
    )


def _decode_walk(code, j: int) -> str:
    return "".join("+" if code >> k & 1 else "-" for k in range(j))


def _decode_qv(code, depth: int) -> str:
    return "".join("1" if code >> k & 1 else "0" for k in range(depth))


def _merge_table(table: np.ndarray, rows: np.ndarray, cols: np.ndarray):
    """Merge the smallest-marginal row/column into its lexicographic
    neighbor until all expected counts clear the bar (or a 2x2 remains)."""
    rows = [(int(r),) for r in rows]
    cols = [(int(c),) for c in cols]
    while table.shape[0] > 1 and table.shape[1] > 1:
        total = table.sum()
        expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / total
        if expected.min() >= MIN_EXPECTED_CELL:
            break
        r_marg = table.sum(axis=1)
        c_marg = table.sum(axis=0)
        if (r_marg.min() <= c_marg.min() and table.shape[0] > 2) or table.shape[1] <= 2:
            if table.shape[0] <= 2:
                break
            i = int(r_marg.argmin())
            k = i - 1 if i > 0 else 1
            table[k] += table[i]
            rows[k] = rows[k] + rows[i]
            table = np.delete(table, i, axis=0)
            rows.pop(i)
        else:
            i = int(c_marg.argmin())
            k = i - 1 if i > 0 else 1
            table[:, k] += table[:, i]
            cols[k] = cols[k] + cols[i]
            table = np.delete(table, i, axis=1)
            cols.pop(i)
    return table, [r[0] for r in rows], [c[0] for c in cols]


def rejection_rate(make_spec, a: int, n: int, depth: int, alpha: float,
                   n_seeds: int, seed0: int = 0) -> float:
    """Fraction of seeds on which the two-sample reflection test rejects."""
    rejections = 0
    for s in range(seed0, seed0 + n_seeds):
        report = reflect_two_sample_test(make_spec(s), a, n, depth, alpha)
        rejections += report.reject
    return rejections / n_seeds
