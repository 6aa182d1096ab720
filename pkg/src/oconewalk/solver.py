"""Constructive solver producing reflection words over the levels {0, 1, 2}.

Any two walks of the same horizon are connected by a finite composition of
reflections at levels 0, 1 and 2.  ``solve_to_alternating`` builds a word
carrying a walk onto the alternating target (0,1,0,1,...) by induction on
the horizon; ``solve`` composes two such words through the involution
property.  ``orbit_graph`` provides the independent breadth-first oracle
over the orbit graph of Λ^m.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .paths import (
    WalkPath,
    all_walks,
    first_passage,
    reflect,
    walk_from_bits,
    walk_to_bits,
)

ReflectionWord = tuple[int, ...]

SOLVER_LEVELS = (0, 1, 2)
_BASE_MAX = 3
DEFAULT_ORBIT_CAP = 12


class HorizonMismatch(ValueError):
    """Source and target walk horizons differ."""


def apply_word(s: WalkPath, word) -> WalkPath:
    """Apply reflections left to right: word (a_1, ..., a_k) acts as Θ^{a_k}∘...∘Θ^{a_1}."""
    cur = s
    for a in word:
        cur = reflect(cur, a)
    return cur


def reduce_word(word) -> ReflectionWord:
    """Cancel adjacent equal letters (each reflection is an involution)."""
    stack: list[int] = []
    for a in word:
        if stack and stack[-1] == a:
            stack.pop()
        else:
            stack.append(a)
    return tuple(stack)


def alternating_path(m: int) -> WalkPath:
    """The target walk (0,1,0,1,...,0,1) / (0,1,...,1,0) of horizon m."""
    return WalkPath(tuple((k % 2) for k in range(m + 1)))


def _bfs_words_from(source: WalkPath, levels=SOLVER_LEVELS) -> dict[int, ReflectionWord]:
    """Shortest words from ``source`` to every reachable walk, by BFS."""
    m = source.horizon
    start = walk_to_bits(source)
    words: dict[int, ReflectionWord] = {start: ()}
    queue = deque([start])
    while queue:
        bits = queue.popleft()
        cur = walk_from_bits(m, bits)
        for a in levels:
            nxt = walk_to_bits(reflect(cur, a))
            if nxt not in words:
                words[nxt] = words[bits] + (a,)
                queue.append(nxt)
    return words


_alt_memo: dict[tuple[int, int], ReflectionWord] = {}
_base_memo: dict[int, dict[int, ReflectionWord]] = {}


def solve_to_alternating(s: WalkPath) -> list[int]:
    """Word over {0,1,2} mapping s onto the alternating walk of its horizon.

    Built by induction on the horizon: horizons up to 3 are solved by
    exhaustive search; a longer walk is first solved on its one-step
    truncation and, when the last two steps point the same way, conjugated
    through an auxiliary target ending one level beyond the alternating
    range (value 2 or -1, with middle word (2,) or (0,1,0) respectively).
    Every emitted letter moves the current walk (its first passage at the
    letter's level falls before the horizon).
    """
    if s.horizon < 1:
        raise ValueError("walk must have horizon >= 1")
    return list(_solve_alt(s))


def _solve_alt(s: WalkPath) -> ReflectionWord:
    m = s.horizon
    key = (m, walk_to_bits(s))
    cached = _alt_memo.get(key)
    if cached is not None:
        return cached
    if s == alternating_path(m):
        word: ReflectionWord = ()
    elif m <= _BASE_MAX:
        # BFS once from the alternating walk; invert by reversing the word.
        table = _base_memo.get(m)
        if table is None:
            table = _base_memo[m] = _bfs_words_from(alternating_path(m))
        word = tuple(reversed(table[walk_to_bits(s)]))
    else:
        prefix = WalkPath(s.values[:-1])
        b_word = _solve_alt(prefix)
        inc = s.increments
        if inc[-2] * inc[-1] == -1:
            # Each effective reflection of the prefix flips the last two
            # steps together, so the prefix word already finishes the job.
            word = b_word
        else:
            q = m - 1
            if q % 2 == 0:
                target = WalkPath(alternating_path(q - 1).values + (2,))
                mid: ReflectionWord = (2,)
            else:
                target = WalkPath(alternating_path(q - 1).values + (-1,))
                mid = (0, 1, 0)
            d_word = b_word + tuple(reversed(_solve_alt(target)))
            word = reduce_word(
                d_word + mid + tuple(reversed(d_word)) + b_word
            )
    _alt_memo[key] = word
    return word


def solve(s: WalkPath, t: WalkPath) -> list[int]:
    """Word over {0,1,2} with apply_word(s, word) == t.

    Concatenates the word from s to the alternating walk with the reversal
    of the word from t (reversal inverts a word since reflections are
    involutive).
    """
    if s.horizon != t.horizon:
        raise HorizonMismatch(
            f"horizons differ: {s.horizon} vs {t.horizon}"
        )
    word = reduce_word(_solve_alt(s) + tuple(reversed(_solve_alt(t))))
    return list(word)


def clear_solver_cache():
    _alt_memo.clear()
    _base_memo.clear()


# ---------------------------------------------------------------------------
# breadth-first oracle over the orbit graph

@dataclass
class OrbitGraph:
    """Orbit graph of Λ^m under reflections at the given levels.

    Vertices are walk bit-encodings 0 .. 2^m - 1; s ~ reflect(s, a) for each
    level a.  Components are frozen sets of encodings.
    """

    m: int
    levels: tuple[int, ...]
    components: list[frozenset[int]] = field(default_factory=list)
    _neighbors: list[tuple[int, ...]] = field(default_factory=list, repr=False)

    @property
    def n_components(self) -> int:
        return len(self.components)

    def component_of(self, s: WalkPath) -> frozenset[int]:
        bits = walk_to_bits(s)
        for comp in self.components:
            if bits in comp:
                return comp
        raise KeyError(s)

    def same_component(self, s: WalkPath, t: WalkPath) -> bool:
        return walk_to_bits(t) in self.component_of(s)

    def shortest_word(self, s: WalkPath, t: WalkPath) -> list[int] | None:
        """Minimal-length word from s to t, or None when unreachable."""
        start, goal = walk_to_bits(s), walk_to_bits(t)
        if start == goal:
            return []
        parents: dict[int, tuple[int, int]] = {start: (-1, -1)}
        queue = deque([start])
        while queue:
            bits = queue.popleft()
            for a, nxt in zip(self.levels, self._neighbors[bits]):
                if nxt in parents:
                    continue
                parents[nxt] = (bits, a)
                if nxt == goal:
                    word: list[int] = []
                    cur = nxt
                    while cur != start:
                        cur, letter = parents[cur]
                        word.append(letter)
                    word.reverse()
                    return word
                queue.append(nxt)
        return None

    def eccentricity(self, bits: int) -> int:
        dist = {bits: 0}
        queue = deque([bits])
        ecc = 0
        while queue:
            cur = queue.popleft()
            for nxt in self._neighbors[cur]:
                if nxt not in dist:
                    dist[nxt] = dist[cur] + 1
                    ecc = max(ecc, dist[nxt])
                    queue.append(nxt)
        return ecc

    def component_diameters(self) -> list[int]:
        return [max(self.eccentricity(b) for b in comp) for comp in self.components]

    def census_row(self, with_diameters: bool = True) -> dict:
        row = {
            "m": self.m,
            "levels": " ".join(str(a) for a in self.levels),
            "n_components": self.n_components,
        }
        row["max_component_diameter"] = (
            max(self.component_diameters()) if with_diameters else None
        )
        return row


def orbit_graph(m: int, levels=SOLVER_LEVELS, cap: int = DEFAULT_ORBIT_CAP) -> OrbitGraph:
    """Build the full orbit graph of Λ^m (2^m vertices) under the levels."""
    if not 1 <= m <= cap:
        raise ValueError(f"horizon {m} outside [1, {cap}]")
    levels = tuple(levels)
    neighbors = []
    for w in all_walks(m):
        neighbors.append(tuple(walk_to_bits(reflect(w, a)) for a in levels))
    seen = [False] * (1 << m)
    components = []
    for start in range(1 << m):
        if seen[start]:
            continue
        comp = []
        seen[start] = True
        queue = deque([start])
        while queue:
            bits = queue.popleft()
            comp.append(bits)
            for nxt in neighbors[bits]:
                if not seen[nxt]:
                    seen[nxt] = True
                    queue.append(nxt)
        components.append(frozenset(comp))
    return OrbitGraph(m=m, levels=levels, components=components, _neighbors=neighbors)


def word_is_effective(s: WalkPath, word) -> bool:
    """Check that every letter strictly moves the walk it is applied to."""
    cur = s
    for a in word:
        if first_passage(cur, a) > cur.horizon - 1:
            return False
        cur = reflect(cur, a)
    return True
