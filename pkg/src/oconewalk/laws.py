"""Exact finite-horizon laws of skip-free processes, in rational arithmetic.

A PathLaw maps paths of one fixed horizon to positive Fractions summing to
one.  The engine pushes laws through reflections, compares them exactly,
conditions the embedded walk on the quadratic-variation trajectory and runs
the finite-horizon Ocone check (product structure of (walk, QV) plus
uniformity of every conditional walk law).  No floating point anywhere.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping

from .paths import (
    SkipFreePath,
    WalkPath,
    all_walks,
    embedded_walk,
    parse_path,
    paste_walk,
    quadratic_variation,
    reflect,
    to_text,
    walk_from_bits,
)

DEFAULT_HORIZON_CAP = 16


class HorizonCapExceeded(ValueError):
    """Requested horizon above the exact-enumeration cap."""


class HorizonMismatch(ValueError):
    """Laws (or spec and law) live on different horizons."""


@dataclass(frozen=True)
class PathLaw:
    """Exact finitely supported distribution over paths of one horizon."""

    horizon: int
    support: Mapping[SkipFreePath, Fraction]

    def __post_init__(self):
        support = dict(self.support)
        total = Fraction(0)
        for path, mass in support.items():
            if path.horizon != self.horizon:
                raise HorizonMismatch(
                    f"path horizon {path.horizon} != law horizon {self.horizon}"
                )
            if not isinstance(mass, Fraction) or mass <= 0:
                raise ValueError(f"mass of {path} must be a positive Fraction")
            total += mass
        if total != 1:
            raise ValueError(f"masses sum to {total}, expected 1")
        object.__setattr__(self, "support", support)

    def mass(self, path: SkipFreePath) -> Fraction:
        return self.support.get(path, Fraction(0))

    def items_sorted(self):
        return sorted(self.support.items(), key=lambda kv: kv[0].values)

    def __len__(self):
        return len(self.support)

    def to_json_obj(self) -> list[dict]:
        return [
            {"path": to_text(p, with_horizon=False), "num": m.numerator, "den": m.denominator}
            for p, m in self.items_sorted()
        ]

    @classmethod
    def from_json_obj(cls, rows: Iterable[dict]) -> "PathLaw":
        support: dict[SkipFreePath, Fraction] = {}
        horizon = None
        for row in rows:
            p = parse_path(row["path"])
            if horizon is None:
                horizon = p.horizon
            support[p] = support.get(p, Fraction(0)) + Fraction(row["num"], row["den"])
        if horizon is None:
            raise ValueError("empty law")
        return cls(horizon, support)

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "PathLaw":
        return cls.from_json_obj(json.loads(text))


def _accumulate(pairs: Iterable[tuple[SkipFreePath, Fraction]], m: int) -> PathLaw:
    support: dict[SkipFreePath, Fraction] = {}
    for path, mass in pairs:
        support[path] = support.get(path, Fraction(0)) + mass
    return PathLaw(m, support)


# ---------------------------------------------------------------------------
# process specifications

@dataclass(frozen=True)
class ProcessSpec:
    """Named generator of exact laws: ``enumerate_pairs(m)`` yields (path, mass)."""

    name: str
    enumerate_pairs: Callable[[int], Iterable[tuple[SkipFreePath, Fraction]]]


def bernoulli_walk_spec() -> ProcessSpec:
    def gen(m: int):
        mass = Fraction(1, 2 ** m)
        for w in all_walks(m):
            yield w, mass

    return ProcessSpec("bernoulli-walk", gen)


def zero_process_spec() -> ProcessSpec:
    def gen(m: int):
        yield SkipFreePath(tuple([0] * (m + 1))), Fraction(1)

    return ProcessSpec("zero", gen)


def table_spec(law: PathLaw, name: str = "table") -> ProcessSpec:
    def gen(m: int):
        if m != law.horizon:
            raise HorizonMismatch(f"table law has horizon {law.horizon}, requested {m}")
        yield from law.support.items()

    return ProcessSpec(name, gen)


def validate_time_change(law: PathLaw):
    """A time change is an increasing skip-free path: steps in {0, 1}."""
    for path in law.support:
        if any(d not in (0, 1) for d in path.increments):
            raise ValueError(f"time change {path} must have steps in {{0, 1}}")


def ocone_time_change_spec(time_change_law: PathLaw) -> ProcessSpec:
    """Fair walk composed with an independent increasing time change.

    The joint law is enumerated over (walk, change) pairs, the walk uniform
    over the steps the change actually consumes.
    """
    validate_time_change(time_change_law)

    def gen(m: int):
        if m != time_change_law.horizon:
            raise HorizonMismatch(
                f"time change horizon {time_change_law.horizon}, requested {m}"
            )
        for change, mass_a in time_change_law.support.items():
            k = change.values[-1]
            walk_mass = Fraction(1, 2 ** k)
            for w in all_walks(k):
                path = SkipFreePath(tuple(w.values[j] for j in change.values))
                yield path, mass_a * walk_mass

    return ProcessSpec("ocone-time-change", gen)


def enumerate_law(spec: ProcessSpec, m: int, cap: int = DEFAULT_HORIZON_CAP) -> PathLaw:
    """Exact law of the process at horizon m (validates mass normalization)."""
    if m > cap:
        raise HorizonCapExceeded(f"horizon {m} above cap {cap}")
    if m < 0:
        raise ValueError("horizon must be nonnegative")
    return _accumulate(spec.enumerate_pairs(m), m)


# ---------------------------------------------------------------------------
# pushforward and comparison

def pushforward_reflect(law: PathLaw, a: int) -> PathLaw:
    """Image law under reflection at level a (an involution on laws)."""
    return _accumulate(
        ((reflect(p, a), mass) for p, mass in law.support.items()), law.horizon
    )


@dataclass(frozen=True)
class LawComparison:
    equal: bool
    witness: tuple[SkipFreePath, Fraction, Fraction] | None = None

    def __bool__(self):
        return self.equal

    def witness_json(self):
        if self.witness is None:
            return None
        path, m1, m2 = self.witness
        return {
            "path": to_text(path, with_horizon=False),
            "mass_left": [m1.numerator, m1.denominator],
            "mass_right": [m2.numerator, m2.denominator],
        }


def laws_equal(l1: PathLaw, l2: PathLaw) -> LawComparison:
    """Exact equality with the first discrepancy (in path order) as witness."""
    if l1.horizon != l2.horizon:
        raise HorizonMismatch(f"horizons {l1.horizon} vs {l2.horizon}")
    paths = sorted(set(l1.support) | set(l2.support), key=lambda p: p.values)
    for p in paths:
        m1, m2 = l1.mass(p), l2.mass(p)
        if m1 != m2:
            return LawComparison(False, (p, m1, m2))
    return LawComparison(True)


# ---------------------------------------------------------------------------
# conditioning on the quadratic-variation trajectory

def conditional_embedded_law(law: PathLaw) -> dict[tuple[int, ...], PathLaw]:
    """Partition by QV trajectory; per class, the exact law of the embedded walk.

    Every path of a class shares the class's flat-step pattern, so its
    embedded walk has exactly qv[-1] steps.
    """
    classes: dict[tuple[int, ...], dict[WalkPath, Fraction]] = {}
    totals: dict[tuple[int, ...], Fraction] = {}
    for path, mass in law.support.items():
        qv = quadratic_variation(path)
        walk = embedded_walk(path).walk
        classes.setdefault(qv, {})
        classes[qv][walk] = classes[qv].get(walk, Fraction(0)) + mass
        totals[qv] = totals.get(qv, Fraction(0)) + mass
    out: dict[tuple[int, ...], PathLaw] = {}
    for qv, table in classes.items():
        total = totals[qv]
        out[qv] = PathLaw(qv[-1], {w: m / total for w, m in table.items()})
    return out


def qv_marginal(law: PathLaw) -> dict[tuple[int, ...], Fraction]:
    marginal: dict[tuple[int, ...], Fraction] = {}
    for path, mass in law.support.items():
        qv = quadratic_variation(path)
        marginal[qv] = marginal.get(qv, Fraction(0)) + mass
    return marginal


def _is_uniform(cond: PathLaw) -> tuple[bool, WalkPath | None]:
    """Uniformity over the full walk space of the conditional's horizon."""
    k = cond.horizon
    expected = Fraction(1, 2 ** k)
    if len(cond) != 2 ** k:
        for bits in range(2 ** k):
            w = walk_from_bits(k, bits)
            if w not in cond.support:
                return False, w
    for w, mass in cond.items_sorted():
        if mass != expected:
            return False, w
    return True, None


@dataclass(frozen=True)
class OconeReport:
    """Finite-horizon Ocone verdict for an exact law.

    ``is_product``: the (embedded walk, QV trajectory) joint factorizes,
    classes censored at the horizon being compared on their common walk
    prefixes.  ``embedded_uniform``: every conditional walk law is uniform.
    ``stagnating_mass`` is the mass whose QV grows slower than time; the
    censored-prefix comparison below is a finite-horizon convention and is
    flagged in serialized reports.
    """

    is_product: bool
    embedded_uniform: bool
    witness: dict | None
    stagnating_mass: Fraction
    pasted: bool

    @property
    def is_ocone(self) -> bool:
        return self.is_product and self.embedded_uniform

    def to_json_obj(self) -> dict:
        return {
            "is_product": self.is_product,
            "embedded_uniform": self.embedded_uniform,
            "is_ocone": self.is_ocone,
            "witness": self.witness,
            "stagnating_mass": [
                self.stagnating_mass.numerator,
                self.stagnating_mass.denominator,
            ],
            "pasted": self.pasted,
            "censoring": "common-prefix comparison at the horizon",
        }


def _pasted_law(law: PathLaw) -> PathLaw:
    """Extend every terminally flat path with an independent fair walk."""
    pairs = []
    for path, mass in law.support.items():
        qv = quadratic_variation(path)
        t = qv.index(qv[-1])
        need = law.horizon - t
        if need == 0:
            pairs.append((path, mass))
            continue
        sub = Fraction(1, 2 ** need)
        for aux in all_walks(need):
            pairs.append((paste_walk(path, aux), mass * sub))
    return _accumulate(pairs, law.horizon)


def ocone_check(law: PathLaw, pasted: bool = False) -> OconeReport:
    """Exact finite-horizon surrogate of the Ocone property.

    With ``pasted`` the law is first transformed by pasting an independent
    fair walk onto every terminal flat stretch, removing the censoring that
    terminal stagnation causes.
    """
    if pasted:
        law = _pasted_law(law)
    marginal = qv_marginal(law)
    conditionals = conditional_embedded_law(law)
    m = law.horizon

    stagnating = sum(
        (mass for qv, mass in marginal.items() if qv[-1] < m), Fraction(0)
    )

    embedded_uniform = True
    witness = None
    for qv in sorted(conditionals):
        ok, bad_walk = _is_uniform(conditionals[qv])
        if not ok:
            embedded_uniform = False
            witness = {
                "kind": "non-uniform-conditional",
                "qv": list(qv),
                "walk": to_text(bad_walk, with_horizon=False),
                "conditional_mass": [
                    conditionals[qv].mass(bad_walk).numerator,
                    conditionals[qv].mass(bad_walk).denominator,
                ],
            }
            break

    # Product structure on common prefixes: for each realized walk length K,
    # the depth-K walk marginal over all classes observing >= K steps must
    # match each such class's own truncated conditional.
    is_product = True
    lengths = sorted({qv[-1] for qv in conditionals})
    for k in lengths:
        pool: dict[WalkPath, Fraction] = {}
        pool_mass = Fraction(0)
        truncated: dict[tuple[int, ...], dict[WalkPath, Fraction]] = {}
        for qv, cond in conditionals.items():
            if qv[-1] < k:
                continue
            pool_mass += marginal[qv]
            trunc: dict[WalkPath, Fraction] = {}
            for w, mass in cond.support.items():
                wk = WalkPath(w.values[: k + 1])
                trunc[wk] = trunc.get(wk, Fraction(0)) + mass
            truncated[qv] = trunc
            for w, mass in trunc.items():
                pool[w] = pool.get(w, Fraction(0)) + mass * marginal[qv]
        pool = {w: mass / pool_mass for w, mass in pool.items()}
        for qv, trunc in truncated.items():
            if qv[-1] != k:
                continue
            walks = set(pool) | set(trunc)
            for w in sorted(walks, key=lambda p: p.values):
                lhs = trunc.get(w, Fraction(0))
                rhs = pool.get(w, Fraction(0))
                if lhs != rhs:
                    is_product = False
                    if witness is None:
                        witness = {
                            "kind": "non-product",
                            "qv": list(qv),
                            "walk": to_text(w, with_horizon=False),
                            "conditional_mass": [lhs.numerator, lhs.denominator],
                            "pooled_mass": [rhs.numerator, rhs.denominator],
                        }
                    break
            if not is_product:
                break
        if not is_product:
            break

    return OconeReport(is_product, embedded_uniform, witness, stagnating, pasted)


# ---------------------------------------------------------------------------
# reflection-invariant fuzzing (exact laws invariant under levels {0,1,2})

def skipfree_orbits(m: int, levels=(0, 1, 2)) -> list[list[SkipFreePath]]:
    """Orbits of all 3^m skip-free paths under reflections at the levels."""
    paths = [SkipFreePath(tuple(v for v in _partial_sums(incs)))
             for incs in product((-1, 0, 1), repeat=m)]
    index = {p: i for i, p in enumerate(paths)}
    seen = [False] * len(paths)
    orbits = []
    for start, path in enumerate(paths):
        if seen[start]:
            continue
        orbit = []
        stack = [path]
        seen[start] = True
        while stack:
            cur = stack.pop()
            orbit.append(cur)
            for a in levels:
                nxt = reflect(cur, a)
                j = index[nxt]
                if not seen[j]:
                    seen[j] = True
                    stack.append(nxt)
        orbits.append(orbit)
    return orbits


def _partial_sums(incs):
    total = 0
    yield total
    for d in incs:
        total += d
        yield total


def random_invariant_law(
    m: int,
    rng: random.Random,
    levels=(0, 1, 2),
    walks_only: bool = False,
    max_orbits: int = 24,
) -> PathLaw:
    """Random exact law fixed by every reflection at the given levels.

    Masses are drawn per orbit of the reflection action and spread uniformly
    inside each orbit, which is exactly the invariant simplex.
    """
    orbits = skipfree_orbits(m, levels)
    if walks_only:
        orbits = [o for o in orbits if all(0 not in p.increments for p in o)]
    chosen = rng.sample(orbits, k=min(max_orbits, len(orbits)))
    weights = [rng.randint(1, 100) for _ in chosen]
    total = sum(weights)
    support: dict[SkipFreePath, Fraction] = {}
    for orbit, w in zip(chosen, weights):
        share = Fraction(w, total * len(orbit))
        for p in orbit:
            support[p] = support.get(p, Fraction(0)) + share
    return PathLaw(m, support)


def random_time_change_law(m: int, rng: random.Random, max_paths: int = 6) -> PathLaw:
    """Random exact law over increasing skip-free time changes of horizon m."""
    changes = [SkipFreePath(tuple(_partial_sums(incs)))
               for incs in product((0, 1), repeat=m)]
    chosen = rng.sample(changes, k=min(max_paths, len(changes)))
    weights = [rng.randint(1, 50) for _ in chosen]
    total = sum(weights)
    support: dict[SkipFreePath, Fraction] = {}
    for p, w in zip(chosen, weights):
        support[p] = support.get(p, Fraction(0)) + Fraction(w, total)
    return PathLaw(m, support)
