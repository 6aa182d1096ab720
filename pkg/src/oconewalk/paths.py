"""Integer path types and their elementary reflection transforms.

A skip-free path is a finite integer sequence started at 0 whose steps lie
in {-1, 0, +1}; a walk additionally excludes flat steps.  Reflection at an
integer level a fixes the path up to its first passage at a and mirrors it
about a afterwards.  The quadratic variation counts the squared steps, and
the embedded walk reads the path at the successive unit increases of its
quadratic variation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, Sequence, Union

INFINITY = math.inf

_INC_CHARS = {1: "+", -1: "-", 0: "0"}
_CHAR_INCS = {"+": 1, "-": -1, "0": 0}


class InsufficientAuxWalk(ValueError):
    """Auxiliary walk too short to extend a stagnating path to its horizon."""


@dataclass(frozen=True, eq=False)
class SkipFreePath:
    """Finite path (v_0, ..., v_m) with v_0 = 0 and |v_k - v_{k-1}| <= 1.

    Equality and hashing go by values alone, so a walk and a skip-free path
    with the same values are interchangeable as dictionary keys.
    """

    values: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values or values[0] != 0:
            raise ValueError("path must start at 0")
        for a, b in zip(values, values[1:]):
            if abs(b - a) > 1:
                raise ValueError(f"step from {a} to {b} exceeds 1 in modulus")

    def __eq__(self, other):
        return isinstance(other, SkipFreePath) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    @property
    def horizon(self) -> int:
        return len(self.values) - 1

    @property
    def increments(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.values, self.values[1:]))

    def truncated(self, j: int) -> "SkipFreePath":
        """Prefix (v_0, ..., v_j)."""
        if not 0 <= j <= self.horizon:
            raise ValueError(f"truncation index {j} outside [0, {self.horizon}]")
        return type(self)(self.values[: j + 1])

    def __iter__(self):
        return iter(self.values)

    def __repr__(self):
        return f"{type(self).__name__}({self.values})"


@dataclass(frozen=True, eq=False)
class WalkPath(SkipFreePath):
    """Skip-free path with every step in {-1, +1} (element of Λ^m)."""

    def __post_init__(self):
        super().__post_init__()
        if any(b == a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("walk may not contain flat steps")


def walk_from_increments(incs: Iterable[int]) -> WalkPath:
    return WalkPath(tuple(accumulate(incs, initial=0)))


def skipfree_from_increments(incs: Iterable[int]) -> SkipFreePath:
    return SkipFreePath(tuple(accumulate(incs, initial=0)))


def walk_to_bits(w: WalkPath) -> int:
    """Canonical m-bit encoding: bit k set iff step k+1 goes up."""
    bits = 0
    for k, inc in enumerate(w.increments):
        if inc > 0:
            bits |= 1 << k
    return bits


def walk_from_bits(m: int, bits: int) -> WalkPath:
    if not 0 <= bits < (1 << m):
        raise ValueError(f"bits {bits} out of range for horizon {m}")
    return walk_from_increments(1 if bits >> k & 1 else -1 for k in range(m))


def all_walks(m: int) -> Iterable[WalkPath]:
    """Enumerate Λ^m in bit-encoding order."""
    for bits in range(1 << m):
        yield walk_from_bits(m, bits)


# ---------------------------------------------------------------------------
# text / JSON serialization ("<horizon>:<signed increments>", bare increments
# and JSON value arrays are all accepted; round-trips are bit exact)

def to_text(p: SkipFreePath, with_horizon: bool = True) -> str:
    body = "".join(_INC_CHARS[i] for i in p.increments)
    return f"{p.horizon}:{body}" if with_horizon else body


def parse_path(text: str, walk: bool = False) -> SkipFreePath:
    """Parse "m:++-0+", bare "++-0+" or a JSON array of values."""
    text = text.strip()
    if text.startswith("["):
        values = json.loads(text)
        return WalkPath(tuple(values)) if walk else SkipFreePath(tuple(values))
    if ":" in text:
        head, _, body = text.partition(":")
        try:
            m = int(head)
        except ValueError:
            raise ValueError(f"malformed horizon prefix in {text!r}") from None
        if m != len(body):
            raise ValueError(f"horizon {m} does not match {len(body)} increments")
    else:
        body = text
    try:
        incs = [_CHAR_INCS[c] for c in body]
    except KeyError as exc:
        raise ValueError(f"invalid increment character {exc.args[0]!r}") from None
    return walk_from_increments(incs) if walk else skipfree_from_increments(incs)


def parse_walk(text: str) -> WalkPath:
    return parse_path(text, walk=True)


# ---------------------------------------------------------------------------
# first passage and reflections

PathLike = Union[SkipFreePath, WalkPath]


def first_passage(p: PathLike, a: int):
    """Smallest k with v_k = a, or INFINITY when the level is never hit.

    T_0 = 0 always, since every path starts at 0.
    """
    for k, v in enumerate(p.values):
        if v == a:
            return k
    return INFINITY


def reflect(p: PathLike, a: int) -> PathLike:
    """Mirror the path about level a after its first passage T_a.

    Values are kept for k <= T_a and mapped to 2a - v_k afterwards; the path
    is returned unchanged when T_a >= horizon.  Preserves the quadratic
    variation and is an involution.  Negative levels are supported directly.
    """
    t = first_passage(p, a)
    if t >= p.horizon:
        return p
    vals = p.values[: t + 1] + tuple(2 * a - v for v in p.values[t + 1 :])
    return type(p)(vals)


def exit_time(p: PathLike, a: int):
    """σ_a: first k with |v_k| = a (INFINITY if the exit never happens)."""
    for k, v in enumerate(p.values):
        if abs(v) == a:
            return k
    return INFINITY


def exit_reflect(p: PathLike, a: int) -> PathLike:
    """Flip all increments strictly after the first exit time from ]-a, a[.

    Equals reflect(p, a) when level a is hit first, reflect(p, -a) when -a
    is hit first, and p itself when neither is reached.
    """
    if a < 0:
        raise ValueError("exit level must be nonnegative")
    s = exit_time(p, a)
    if s >= p.horizon:
        return p
    anchor = p.values[s]
    vals = p.values[: s + 1] + tuple(2 * anchor - v for v in p.values[s + 1 :])
    return type(p)(vals)


# ---------------------------------------------------------------------------
# quadratic variation, embedded walk, pasting

QuadraticVariation = tuple[int, ...]


def quadratic_variation(p: SkipFreePath) -> QuadraticVariation:
    """([M]_0, ..., [M]_m) with [M]_n the number of non-flat steps before n."""
    return tuple(accumulate((d * d for d in p.increments), initial=0))


@dataclass(frozen=True)
class EmbeddedWalk:
    """Walk prefix S^M = (M at each unit rise of [M]) plus stagnation data.

    ``settle_time`` is the first index at which the quadratic variation
    reaches its final value; ``stagnated`` records whether the path spends
    time flat after that index (so the walk is censored by the horizon).
    """

    walk: WalkPath
    settle_time: int
    stagnated: bool


def embedded_walk(p: SkipFreePath) -> EmbeddedWalk:
    qv = quadratic_variation(p)
    total = qv[-1]
    vals = [0]
    settle = 0
    for k in range(1, len(qv)):
        if qv[k] == qv[k - 1]:
            continue
        vals.append(p.values[k])
        settle = k
    walk = WalkPath(tuple(vals))
    assert walk.horizon == total
    return EmbeddedWalk(walk, settle, settle < p.horizon)


def paste_walk(p: SkipFreePath, aux: WalkPath) -> SkipFreePath:
    """Replace the terminal flat stretch of p by aux started at its level.

    With T the first index at which [M] reaches [M]_m, the result agrees
    with p on [0, T] and continues as p_T + aux afterwards, so the pasted
    path has no flat step after T.
    """
    qv = quadratic_variation(p)
    t = qv.index(qv[-1])
    need = p.horizon - t
    if aux.horizon < need:
        raise InsufficientAuxWalk(
            f"auxiliary walk supplies {aux.horizon} steps, {need} required"
        )
    base = p.values[t]
    vals = p.values[: t + 1] + tuple(base + aux.values[j] for j in range(1, need + 1))
    return SkipFreePath(vals)


# ---------------------------------------------------------------------------
# continuous-time lattice paths

class LatticePath:
    """Pure-jump path with jumps of modulus ``mesh`` at strictly increasing times.

    The value at t is mesh * sum of signs of the jumps that occurred by t and
    the quadratic variation is mesh^2 * (number of jumps by t).
    """

    def __init__(self, mesh: float, jump_times: Sequence[float],
                 jump_signs: Sequence[int], t_end: float):
        if mesh <= 0:
            raise ValueError("mesh must be positive")
        jump_times = tuple(float(t) for t in jump_times)
        jump_signs = tuple(int(s) for s in jump_signs)
        if len(jump_times) != len(jump_signs):
            raise ValueError("jump times and signs must align")
        if any(s not in (-1, 1) for s in jump_signs):
            raise ValueError("jump signs must be -1 or +1")
        if any(t <= 0 for t in jump_times[:1]) or any(
            b <= a for a, b in zip(jump_times, jump_times[1:])
        ):
            raise ValueError("jump times must be strictly increasing and positive")
        if jump_times and jump_times[-1] > t_end:
            raise ValueError("jump beyond horizon")
        self.mesh = float(mesh)
        self.jump_times = jump_times
        self.jump_signs = jump_signs
        self.t_end = float(t_end)

    def _count(self, t: float) -> int:
        n = 0
        for tau in self.jump_times:
            if tau > t:
                break
            n += 1
        return n

    def value_at(self, t: float) -> float:
        n = self._count(t)
        return self.mesh * sum(self.jump_signs[:n])

    def qv_at(self, t: float) -> float:
        return self.mesh * self.mesh * self._count(t)

    def __eq__(self, other):
        return (
            isinstance(other, LatticePath)
            and self.mesh == other.mesh
            and self.jump_times == other.jump_times
            and self.jump_signs == other.jump_signs
            and self.t_end == other.t_end
        )

    def __repr__(self):
        return (
            f"LatticePath(mesh={self.mesh}, jumps={len(self.jump_times)}, "
            f"t_end={self.t_end})"
        )


@dataclass(frozen=True)
class LatticeWalk:
    """Embedded integer walk of a lattice path plus its time-change record."""

    walk: WalkPath
    mesh: float
    jump_times: tuple[float, ...]

    def scaled_values(self) -> tuple[float, ...]:
        return tuple(self.mesh * v for v in self.walk.values)


def lattice_embedded_walk(lat: LatticePath) -> LatticeWalk:
    """Read the lattice path at its jump times, rescaled to an integer walk.

    Reconstruction identity: value_at(t) == mesh * walk[qv_at(t) / mesh^2]
    holds at every time.
    """
    walk = walk_from_increments(lat.jump_signs)
    return LatticeWalk(walk, lat.mesh, lat.jump_times)


def reflect_lattice(lat: LatticePath, level: int) -> LatticePath:
    """Reflect a lattice path at ``level * mesh`` (jump times unchanged)."""
    walk = walk_from_increments(lat.jump_signs)
    t = first_passage(walk, level)
    if t >= walk.horizon:
        return lat
    signs = lat.jump_signs[:t] + tuple(-s for s in lat.jump_signs[t:])
    return LatticePath(lat.mesh, lat.jump_times, signs, lat.t_end)
