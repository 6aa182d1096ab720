"""Two walk laws invariant under reflection at levels 0 and 1 but not Ocone.

Counterexample 1 repeats its second coin: steps are e1, e2, e2, e4, e5, ...
for independent fair signs e.  Counterexample 2 keeps a constant step sign
on each dyadic block [2^k, 2^{k+1} - 1].  Both are symmetric and invariant
under reflection at level 1, yet their embedded-walk conditionals are far
from uniform, so neither is a time-changed fair walk.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .laws import PathLaw, LawComparison, laws_equal, pushforward_reflect
from .paths import WalkPath, to_text, walk_from_increments

CE1_HORIZON_CAP = 16
CE2_HORIZON_CAP = 31


def ce1_path(signs: tuple[int, ...], m: int) -> WalkPath:
    """Path of counterexample 1 from the free signs (e1, e2, e4, ..., em)."""
    free = iter(signs)
    incs = []
    e2 = None
    for n in range(1, m + 1):
        if n == 3:
            incs.append(e2)
            continue
        e = next(free)
        if n == 2:
            e2 = e
        incs.append(e)
    return walk_from_increments(incs)


def _ce1_free_count(m: int) -> int:
    return m if m < 3 else m - 1


def ce1_law(m: int) -> PathLaw:
    """Exact law of counterexample 1: step 3 forced equal to step 2."""
    if not 1 <= m <= CE1_HORIZON_CAP:
        raise ValueError(f"horizon {m} outside [1, {CE1_HORIZON_CAP}]")
    k = _ce1_free_count(m)
    mass = Fraction(1, 2 ** k)
    support = {ce1_path(signs, m): mass for signs in product((1, -1), repeat=k)}
    return PathLaw(m, support)


def ce2_block_count(m: int) -> int:
    """Number of dyadic sign blocks covering steps 1..m."""
    return m.bit_length()


def ce2_path(bits: tuple[int, ...], m: int) -> WalkPath:
    """Blockwise-constant-sign path: step n carries the sign of block log2(n)."""
    blocks = ce2_block_count(m)
    if len(bits) < blocks:
        raise ValueError(f"{blocks} sign bits required for horizon {m}, got {len(bits)}")
    incs = [bits[n.bit_length() - 1] for n in range(1, m + 1)]
    return walk_from_increments(incs)


def ce2_law(m: int) -> PathLaw:
    if not 1 <= m <= CE2_HORIZON_CAP:
        raise ValueError(f"horizon {m} outside [1, {CE2_HORIZON_CAP}]")
    blocks = ce2_block_count(m)
    mass = Fraction(1, 2 ** blocks)
    support = {ce2_path(bits, m): mass for bits in product((1, -1), repeat=blocks)}
    return PathLaw(m, support)


def is_block_complete(m: int) -> bool:
    """Horizons 1, 3, 7, 15, ... at which every sign block is fully observed."""
    return (m + 1) & m == 0 and m >= 1


# ---------------------------------------------------------------------------
# invariance reports

@dataclass(frozen=True)
class LevelCheck:
    level: int
    comparison: LawComparison

    @property
    def invariant(self) -> bool:
        return self.comparison.equal

    def to_json_obj(self) -> dict:
        return {
            "level": self.level,
            "invariant": self.invariant,
            "witness": self.comparison.witness_json(),
        }


@dataclass(frozen=True)
class InvarianceReport:
    which: int
    m: int
    checks: tuple[LevelCheck, ...]

    @property
    def all_invariant(self) -> bool:
        return all(c.invariant for c in self.checks)

    def check_for(self, level: int) -> LevelCheck:
        for c in self.checks:
            if c.level == level:
                return c
        raise KeyError(level)

    def to_json_obj(self) -> dict:
        return {
            "counterexample": self.which,
            "m": self.m,
            "levels": [c.to_json_obj() for c in self.checks],
            "all_invariant": self.all_invariant,
        }


def _invariance_checks(law: PathLaw, levels) -> tuple[LevelCheck, ...]:
    return tuple(
        LevelCheck(a, laws_equal(law, pushforward_reflect(law, a))) for a in levels
    )


def ce1_invariance_report(m: int, levels=(0, 1, 2, 3)) -> InvarianceReport:
    """Reflection invariance of counterexample 1 per level.

    Levels 0, 1 and 3 preserve the law; level 2 breaks it as soon as m >= 3
    (the reflected all-up path acquires mass its preimage never had).
    """
    return InvarianceReport(1, m, _invariance_checks(ce1_law(m), levels))


def ce2_invariance_report(m: int, levels=(0, 1, 2)) -> InvarianceReport:
    """Reflection invariance of counterexample 2 at a block-complete horizon."""
    if not is_block_complete(m):
        raise ValueError(
            f"horizon {m} is not block-complete (use 1, 3, 7, 15 or 31)"
        )
    return InvarianceReport(2, m, _invariance_checks(ce2_law(m), levels))


def support_rows(law: PathLaw) -> list[dict]:
    """CSV-ready rows of a law's support."""
    return [
        {"path": to_text(p, with_horizon=False), "num": mass.numerator, "den": mass.denominator}
        for p, mass in law.items_sorted()
    ]
