"""Collapse maps, acceptable moves and upper-echelon normal forms.

A collapse map over ``k`` retained particles and ``r`` Duhamel columns records,
for each column ``l = 1..r``, the row ``rho[l]`` of the contraction operator
``B_{rho[l], k+l}``.  Rows are 1-based and must satisfy ``rho[l] < k + l``.

Permutations are stored as 1-based tuples ``pi`` with ``pi[i-1] = pi(i)``; the
permutation labels the ordered time region ``t >= t_pi(1) >= ... >= t_pi(r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

DEFAULT_ENUMERATION_CAP = 10**7

Perm = Tuple[int, ...]


class CapExceededError(ValueError):
    """Raised when an enumeration would produce more maps than allowed."""


class MoveNotApplicable(ValueError):
    """Raised when an acceptable move is requested where its condition fails."""


@dataclass(frozen=True)
class CollapseMap:
    k: int
    rho: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rho", tuple(int(v) for v in self.rho))
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if len(self.rho) < 1:
            raise ValueError("a collapse map needs at least one column")
        for col, row in enumerate(self.rho, start=1):
            if not 1 <= row < self.k + col:
                raise ValueError(
                    f"column {col}: row {row} outside 1..{self.k + col - 1}"
                )

    @property
    def r(self) -> int:
        return len(self.rho)

    def operator(self, col: int) -> Tuple[int, int]:
        """Return ``(row, k + col)`` for the contraction in column ``col``."""
        return self.rho[col - 1], self.k + col

    def is_echelon(self) -> bool:
        return is_upper_echelon(self)

    def __str__(self):
        return f"k={self.k} rho={list(self.rho)}"


@dataclass(frozen=True)
class EchelonForm(CollapseMap):
    def __post_init__(self):
        super().__post_init__()
        if not is_upper_echelon(self):
            raise ValueError(f"rho={list(self.rho)} is not nondecreasing")


@dataclass(frozen=True)
class MoveTrace:
    moves: Tuple[int, ...]
    pi: Perm


@dataclass(frozen=True)
class SimplexDomain:
    t: float
    r: int
    perms: Tuple[Perm, ...]

    def __post_init__(self):
        if len(set(self.perms)) != len(self.perms):
            raise ValueError("simplex permutations must be pairwise distinct")
        for p in self.perms:
            if sorted(p) != list(range(1, self.r + 1)):
                raise ValueError(f"{p} is not a permutation of 1..{self.r}")

    @property
    def volume(self) -> float:
        return len(self.perms) * self.t**self.r / math.factorial(self.r)


@dataclass
class EchelonClass:
    """One equivalence class: its echelon representative and members."""

    form: EchelonForm
    members: List[CollapseMap] = field(default_factory=list)
    perms: List[Perm] = field(default_factory=list)
    traces: List[MoveTrace] = field(default_factory=list)

    def __len__(self):
        return len(self.members)


def identity_perm(r: int) -> Perm:
    return tuple(range(1, r + 1))


def map_count(k: int, r: int) -> int:
    return math.prod(k + l - 1 for l in range(1, r + 1))


def iter_collapse_maps(k: int, r: int) -> Iterator[CollapseMap]:
    for rho in product(*(range(1, k + l) for l in range(1, r + 1))):
        yield CollapseMap(k, rho)


def enumerate_collapse_maps(
    k: int, r: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> List[CollapseMap]:
    """All maps in lexicographic order of ``rho``."""
    if k < 1 or r < 1:
        raise ValueError("k and r must both be >= 1")
    count = map_count(k, r)
    if count > cap:
        raise CapExceededError(f"{count} collapse maps for k={k}, r={r} exceed cap {cap}")
    return list(iter_collapse_maps(k, r))


def is_upper_echelon(m: CollapseMap) -> bool:
    return all(a <= b for a, b in zip(m.rho, m.rho[1:]))


def move_applicable(m: CollapseMap, col: int) -> bool:
    if not 1 <= col < m.r:
        return False
    a, b = m.rho[col - 1], m.rho[col]
    return b < a and b < m.k + col


def _swap_columns(m: CollapseMap, pi: Perm, col: int) -> Tuple[CollapseMap, Perm]:
    rho = list(m.rho)
    rho[col - 1], rho[col] = rho[col], rho[col - 1]
    # the particles created in columns col and col+1 trade labels downstream
    x, y = m.k + col, m.k + col + 1
    for i in range(col + 1, m.r):
        if rho[i] == x:
            rho[i] = y
        elif rho[i] == y:
            rho[i] = x
    swap = {col: col + 1, col + 1: col}
    new_pi = tuple(swap.get(v, v) for v in pi)
    return CollapseMap(m.k, rho), new_pi


def apply_move(
    m: CollapseMap, pi: Optional[Perm], col: int
) -> Tuple[CollapseMap, Perm]:
    """Apply the acceptable move at column ``col`` (1-based).

    Allowed iff ``rho[col+1] < rho[col]``; the highlights of columns ``col`` and
    ``col+1`` are exchanged, rows ``k+col`` and ``k+col+1`` are exchanged in all
    later columns, and the time labels ``col``/``col+1`` are swapped in ``pi``.
    """
    if pi is None:
        pi = identity_perm(m.r)
    if len(pi) != m.r:
        raise ValueError("permutation length does not match r")
    if not move_applicable(m, col):
        raise MoveNotApplicable(f"no acceptable move at column {col} for {m}")
    return _swap_columns(m, pi, col)


def undo_move(m: CollapseMap, pi: Perm, col: int) -> Tuple[CollapseMap, Perm]:
    """Inverse of :func:`apply_move`: requires an ascent that a move produced."""
    if not 1 <= col < m.r:
        raise MoveNotApplicable(f"column {col} out of range")
    a, b = m.rho[col - 1], m.rho[col]
    if not (a < b and b < m.k + col):
        raise MoveNotApplicable(f"column {col} of {m} is not the image of a move")
    return _swap_columns(m, pi, col)


def applicable_moves(m: CollapseMap) -> List[int]:
    return [c for c in range(1, m.r) if move_applicable(m, c)]


def reduce_to_echelon(m: CollapseMap) -> Tuple[EchelonForm, MoveTrace]:
    """Bubble the map into upper echelon form, always moving at the leftmost descent."""
    pi = identity_perm(m.r)
    moves: List[int] = []
    ceiling = m.r * m.r
    current = m
    while True:
        col = next((c for c in range(1, current.r) if move_applicable(current, c)), None)
        if col is None:
            break
        current, pi = _swap_columns(current, pi, col)
        moves.append(col)
        assert len(moves) <= ceiling, f"reduction of {m} exceeded {ceiling} moves"
    return EchelonForm(current.k, current.rho), MoveTrace(tuple(moves), pi)


def replay(m: CollapseMap, trace: MoveTrace) -> Tuple[CollapseMap, Perm]:
    pi = identity_perm(m.r)
    for col in trace.moves:
        m, pi = apply_move(m, pi, col)
    return m, pi


def partition_classes(
    k: int, r: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Dict[EchelonForm, EchelonClass]:
    """Group every collapse map by the echelon form it reduces to.

    Raises ``AssertionError`` if two members of one class share a permutation,
    since the simplices of a class must have disjoint interiors.
    """
    classes: Dict[EchelonForm, EchelonClass] = {}
    for m in enumerate_collapse_maps(k, r, cap):
        form, trace = reduce_to_echelon(m)
        cls = classes.setdefault(form, EchelonClass(form))
        cls.members.append(m)
        cls.perms.append(trace.pi)
        cls.traces.append(trace)
    for cls in classes.values():
        if len(set(cls.perms)) != len(cls.perms):
            raise AssertionError(f"class of {cls.form} has repeated permutations")
    return dict(sorted(classes.items(), key=lambda kv: kv[0].rho))


def time_domain(cls: EchelonClass, t: float) -> SimplexDomain:
    if t < 0:
        raise ValueError("time horizon must be nonnegative")
    return SimplexDomain(float(t), cls.form.r, tuple(cls.perms))


def move_graph_sinks(m: CollapseMap) -> set:
    """Echelon forms reachable from ``m`` by any sequence of moves (brute force)."""
    seen = {m.rho}
    stack = [m]
    sinks = set()
    while stack:
        cur = stack.pop()
        cols = applicable_moves(cur)
        if not cols:
            sinks.add(cur.rho)
        for c in cols:
            nxt, _ = _swap_columns(cur, identity_perm(cur.r), c)
            if nxt.rho not in seen:
                seen.add(nxt.rho)
                stack.append(nxt)
    return sinks


def class_summary(k: int, r: int, cap: int = DEFAULT_ENUMERATION_CAP) -> dict:
    classes = partition_classes(k, r, cap)
    return {
        "k": k,
        "r": r,
        "map_count": map_count(k, r),
        "class_count": len(classes),
        "bound": 2 ** (k + r),
    }


def parse_rho(text: str | Sequence[int]) -> Tuple[int, ...]:
    if isinstance(text, str):
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    return tuple(int(v) for v in text)
