import json
import math
from fractions import Fraction

import numpy as np
import pytest

from oconewalk.bridge import StepFunction, cf_ocone_test, cf_ocone_test_arrays, discretize, sup_gap
from oconewalk.counterexamples import ce1_law, ce2_law
from oconewalk.laws import PathLaw, bernoulli_walk_spec, enumerate_law
from oconewalk.montecarlo import (
    SamplerSpec,
    UndersizedSample,
    cf_increment_arrays,
    crossing_counts,
    cylinder_codes,
    decode_cylinder,
    discrete_values,
    exact_cylinder_masses,
    ocone_independence_test,
    reflect_two_sample_test,
    reflect_values_batch,
    sample,
    walk_gap_and_crossings,
)
from oconewalk.paths import SkipFreePath, reflect, to_text


def ocone_change_law() -> PathLaw:
    return PathLaw(3, {
        SkipFreePath((0, 1, 1, 2)): Fraction(1, 2),
        SkipFreePath((0, 1, 2, 3)): Fraction(1, 2),
    })


# --- samplers -----------------------------------------------------------------

def test_spec_validation():
    with pytest.raises(ValueError):
        SamplerSpec("nope")
    with pytest.raises(ValueError):
        SamplerSpec("bernoulli-walk", seed=-1)
    with pytest.raises(ValueError):
        discrete_values(SamplerSpec("bernoulli-walk", seed=1), 5)  # no horizon


def test_sampling_is_reproducible():
    spec = SamplerSpec("ce1", seed=7, horizon=5)
    a = discrete_values(spec, 100)
    b = discrete_values(spec, 100)
    assert np.array_equal(a, b)
    other = discrete_values(SamplerSpec("ce1", seed=8, horizon=5), 100)
    assert not np.array_equal(a, other)


def test_report_is_byte_identical_for_fixed_seed():
    spec = SamplerSpec("bernoulli-walk", seed=3, horizon=6)
    r1 = reflect_two_sample_test(spec, 1, 2000, 3)
    r2 = reflect_two_sample_test(spec, 1, 2000, 3)
    assert json.dumps(r1.to_json_obj()) == json.dumps(r2.to_json_obj())


def test_bernoulli_frequencies_converge():
    spec = SamplerSpec("bernoulli-walk", seed=1, horizon=3)
    vals = discrete_values(spec, 80000)
    codes = cylinder_codes(vals, 3)
    _, counts = np.unique(codes, return_counts=True)
    freqs = counts / len(codes)
    se = math.sqrt(0.125 * 0.875 / 80000)
    assert np.all(np.abs(freqs - 0.125) <= 4 * se)


def test_ce1_sampler_stays_on_the_exact_support():
    spec = SamplerSpec("ce1", seed=5, horizon=3)
    batch = sample(spec, 500)
    support = set(ce1_law(3).support)
    assert set(batch.paths()) <= support


def test_ce2_sampler_stays_on_the_exact_support():
    spec = SamplerSpec("ce2", seed=5, horizon=7)
    batch = sample(spec, 300)
    assert set(batch.paths()) <= set(ce2_law(7).support)


def test_degenerate_time_change_is_a_shifted_walk():
    identity = PathLaw(3, {SkipFreePath((0, 1, 2, 3)): Fraction(1)})
    spec = SamplerSpec("ocone-time-change", seed=2, horizon=3,
                       time_change_law=identity)
    vals = discrete_values(spec, 4000)
    assert set(np.unique(np.abs(np.diff(vals)))) == {1}
    codes = cylinder_codes(vals, 3)
    freqs = np.bincount(np.searchsorted(np.unique(codes), codes)) / 4000
    assert np.all(np.abs(freqs - 0.125) <= 4 * math.sqrt(0.125 * 0.875 / 4000))


def test_batch_reflection_matches_scalar():
    spec = SamplerSpec("ocone-time-change", seed=4, horizon=4,
                       time_change_law=PathLaw(4, {
                           SkipFreePath((0, 0, 1, 1, 2)): Fraction(1, 2),
                           SkipFreePath((0, 1, 2, 3, 4)): Fraction(1, 2),
                       }))
    vals = discrete_values(spec, 200)
    for a in (-1, 0, 1, 2):
        batch = reflect_values_batch(vals, a)
        for i in range(len(vals)):
            expected = reflect(SkipFreePath(tuple(vals[i])), a).values
            assert tuple(batch[i]) == expected


# --- two-sample reflection test ------------------------------------------------

def test_two_sample_accepts_the_fair_walk():
    spec = SamplerSpec("bernoulli-walk", seed=2, horizon=8)
    report = reflect_two_sample_test(spec, 1, 40000, 4)
    assert report.decision == "accept"
    assert report.df >= 1
    assert 0 <= report.p_value <= 1


def test_two_sample_rejects_ce1_at_level_two():
    spec = SamplerSpec("ce1", seed=12, horizon=3)
    report = reflect_two_sample_test(spec, 2, 100000, 3)
    assert report.decision == "reject"
    assert report.p_value < 1e-6
    top = report.witness_cells[0]
    assert "++-" in top["cells"] or "+++" in top["cells"]


def test_two_sample_accepts_ce2_at_level_one():
    spec = SamplerSpec("ce2", seed=12, horizon=7)
    report = reflect_two_sample_test(spec, 1, 100000, 7)
    assert report.decision == "accept"


def test_two_sample_merges_sparse_cells():
    spec = SamplerSpec("bernoulli-walk", seed=1, horizon=8)
    report = reflect_two_sample_test(spec, 1, 200, 8)
    assert report.extras["n_groups"] < 2 ** 8
    with pytest.raises(UndersizedSample):
        reflect_two_sample_test(spec, 1, 4, 8)


def test_two_sample_depth_guard():
    spec = SamplerSpec("bernoulli-walk", seed=1, horizon=4)
    with pytest.raises(ValueError):
        reflect_two_sample_test(spec, 1, 100, 9)


# --- independence test ----------------------------------------------------------

def test_independence_accepts_ocone_sampler():
    spec = SamplerSpec("ocone-time-change", seed=21, horizon=3,
                       time_change_law=ocone_change_law())
    report = ocone_independence_test(spec, 50000, 3)
    assert report.decision == "accept"
    assert report.extras["walk_depth"] >= 1


def test_independence_rejects_dependent_sampler():
    spec = SamplerSpec("dependent-time-change", seed=21, horizon=6)
    report = ocone_independence_test(spec, 50000, 6)
    assert report.decision == "reject"
    assert report.p_value < 1e-6


def test_independence_trivial_for_deterministic_qv():
    spec = SamplerSpec("bernoulli-walk", seed=21, horizon=5)
    report = ocone_independence_test(spec, 2000, 4)
    assert report.decision == "accept"
    assert report.df == 0 and report.p_value == 1.0


# --- characteristic-function sampling -------------------------------------------

def test_cf_arrays_pass_for_independent_kinds():
    h = StepFunction((0.0, 1.0, 2.0), (1.0, -0.5))
    for kind, kw in (
        ("brownian-grid", {"t_end": 2.0, "dt": 0.05}),
        ("ocone-time-change", {"t_end": 2.0, "dt": 0.05}),
        ("brownian-walk", {"t_end": 2.0, "mesh": 2 ** -4}),
    ):
        spec = SamplerSpec(kind, seed=31, **kw)
        dm, dq = cf_increment_arrays(spec, h, 40000)
        report = cf_ocone_test_arrays(dm, dq, h)
        assert report.passed, kind


def test_cf_arrays_fail_for_dependent_kind():
    h = StepFunction((0.0, 1.0, 2.0), (1.0, 1.0))
    spec = SamplerSpec("dependent-time-change", seed=31, t_end=2.0, dt=0.05)
    dm, dq = cf_increment_arrays(spec, h, 40000)
    report = cf_ocone_test_arrays(dm, dq, h)
    assert not report.passed
    assert abs(report.lhs - report.rhs) > 10 * report.stderr


def test_cf_pairs_and_arrays_agree():
    h = StepFunction((0.0, 0.5, 1.0), (1.0, 2.0))
    spec = SamplerSpec("brownian-grid", seed=8, t_end=1.0, dt=0.05)
    pairs = sample(spec, 500)
    r1 = cf_ocone_test(pairs, h)
    dm = np.array([
        [p.value_at(t1) - p.value_at(t0)
         for t0, t1 in zip(h.breakpoints, h.breakpoints[1:])]
        for p, _ in pairs
    ])
    dq = np.array([
        [q.at(t1) - q.at(t0)
         for t0, t1 in zip(h.breakpoints, h.breakpoints[1:])]
        for _, q in pairs
    ])
    r2 = cf_ocone_test_arrays(dm, dq, h)
    assert r1.lhs == pytest.approx(r2.lhs)
    assert r1.rhs == pytest.approx(r2.rhs)


def test_brownian_walk_sample_paths_are_exact():
    spec = SamplerSpec("brownian-walk", seed=3, t_end=0.25, mesh=2 ** -3)
    pairs = sample(spec, 3)
    for path, qv in pairs:
        assert path.exact_crossings
        report = sup_gap(path, discretize(path, 2 ** -2))
        assert report.bound_holds and report.gap <= 2 ** -2


# --- scaled-walk statistics ------------------------------------------------------

def test_walk_gap_and_crossings_match_discretize():
    from oconewalk.bridge import SampledContinuousPath
    from oconewalk.montecarlo import KINDS

    spec = SamplerSpec("brownian-walk", seed=17, t_end=1.0)
    mesh = 2 ** -3
    gaps, counts = walk_gap_and_crossings(spec, mesh, 40)
    # rebuild the exact same paths from the stream and run the scalar ops
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([17, 0, KINDS.index("brownian-walk")])))
    rounds = int(round(2.0 / mesh ** 2))
    eta = mesh / 2
    steps = 2 * rng.integers(0, 2, size=(40, 2 * rounds), dtype=np.int8) - 1
    times = eta * eta * np.arange(2 * rounds + 1)
    for i in range(40):
        values = eta * np.concatenate([[0], np.cumsum(steps[i])])
        path = SampledContinuousPath(times, values, exact_crossings=True)
        lat = discretize(path, mesh)
        report = sup_gap(path, lat)
        assert report.gap == gaps[i]
        assert len(lat.jump_times) == counts[i]
        assert report.bound_holds


def test_crossing_counts_distribution():
    spec = SamplerSpec("brownian-walk", seed=9, t_end=1.0)
    mesh = 2 ** -5
    counts = crossing_counts(spec, mesh, 50000)
    rounds = 2 * 4 ** 5
    assert counts.max() <= rounds
    mean = mesh ** 2 * counts.mean()
    se = mesh ** 2 * counts.std(ddof=1) / math.sqrt(len(counts))
    assert abs(mean - 1.0) <= 3 * se


# --- helpers ----------------------------------------------------------------------

def test_cylinder_code_round_trip():
    vals = discrete_values(SamplerSpec("bernoulli-walk", seed=2, horizon=5), 20)
    codes = cylinder_codes(vals, 4)
    for i, code in enumerate(codes):
        text = decode_cylinder(int(code), 4)
        path = SkipFreePath(tuple(vals[i][:5]))
        assert to_text(path, with_horizon=False) == text


def test_exact_cylinder_masses():
    law = enumerate_law(bernoulli_walk_spec(), 3)
    masses = exact_cylinder_masses(law, 2)
    assert masses == {
        "++": Fraction(1, 4), "+-": Fraction(1, 4),
        "-+": Fraction(1, 4), "--": Fraction(1, 4),
    }


def test_time_change_sampler_matches_exact_law():
    from oconewalk.laws import enumerate_law as _enum, ocone_time_change_spec

    change = ocone_change_law()
    law = _enum(ocone_time_change_spec(change), 3)
    spec = SamplerSpec("ocone-time-change", seed=6, horizon=3,
                       time_change_law=change)
    n = 50000
    vals = discrete_values(spec, n)
    codes = cylinder_codes(vals, 3)
    uniq, cnt = np.unique(codes, return_counts=True)
    seen = {decode_cylinder(int(c), 3): k for c, k in zip(uniq, cnt)}
    exact = exact_cylinder_masses(law, 3)
    assert set(seen) <= set(exact)
    for cell, mass in exact.items():
        p = float(mass)
        se = math.sqrt(p * (1 - p) / n)
        assert abs(seen.get(cell, 0) / n - p) <= 4 * se
