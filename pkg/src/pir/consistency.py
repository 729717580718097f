"""Consistency of typing environments.

An environment is consistent when it can be produced from a partial map by
the structural rules (contraction, weakening, subtyping, revision).  The
rules act on one identifier at a time, so the decision runs per identifier:
a bounded search applies the rules backwards until a single assumption, the
origin, is left.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from pir.typesys import (
    CONSUMED,
    UNDEFINED,
    UNR,
    Affine,
    Chan,
    ProcType,
    Type,
    TypeEnv,
    Unique,
    Unrestricted,
    decrement,
    split,
    subtype,
)


@dataclass(frozen=True)
class Move:
    """One forward structural step on a single identifier."""

    rule: str  # tCon, tSub, tWeak or tRev
    ident: object
    before: tuple[Type, ...]
    after: tuple[Type, ...]

    def __str__(self) -> str:
        b = ", ".join(map(str, self.before)) or "-"
        a = ", ".join(map(str, self.after)) or "-"
        return f"{self.rule} {self.ident}: {b}  =>  {a}"


@dataclass
class Consistency:
    ok: bool
    origin: TypeEnv | None = None
    moves: list[Move] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _state(types) -> tuple[Type, ...]:
    return tuple(sorted(types, key=str))


def _max_index(types) -> int:
    return max((t.attr.index for t in types if isinstance(t, Chan) and isinstance(t.attr, Unique)), default=0)


def search_bound(types, target: Type | None = None) -> int:
    """Move budget that dominates any minimal inverse derivation.

    Each affine or unrestricted element needs at most one lowering and one
    merge; a unique lineage needs at most one step per index level.
    """
    extra = [target] if target is not None else []
    return 2 * len(types) + _max_index(list(types) + extra) + 2


def _merges(t1: Type, t2: Type) -> list[Type]:
    if isinstance(t1, ProcType) and isinstance(t2, ProcType):
        return [t1]
    if not (isinstance(t1, Chan) and isinstance(t2, Chan)) or t1.objects != t2.objects:
        return []
    a1, a2 = t1.attr, t2.attr
    out = []
    if isinstance(a1, Unrestricted) and isinstance(a2, Unrestricted):
        out.append(t1)
    for aff, unq in ((a1, a2), (a2, a1)):
        if isinstance(aff, Affine) and isinstance(unq, Unique) and unq.index >= 1:
            out.append(t1.with_attr(Unique(unq.index - 1)))
    return out


def _lowerings(t: Type, max_index: int) -> list[Type]:
    if not isinstance(t, Chan):
        return []
    a = t.attr
    if isinstance(a, Affine):
        return [t.with_attr(UNR)]
    if isinstance(a, Unrestricted):
        return [t.with_attr(Unique(i)) for i in range(1, max_index + 2)]
    if a.index > 0:
        return [t.with_attr(Unique(a.index - 1))]
    return []


def _inverse_moves(state: tuple[Type, ...], max_index: int):
    """Yield (previous state, forward move) pairs for one backwards step.

    Weakening is never needed inside a non-empty lineage: a split whose half
    is later discarded can be replaced by subtyping the other half.
    """
    n = len(state)
    objects = {t.objects for t in state if isinstance(t, Chan)}
    for i in range(n):
        for j in range(i + 1, n):
            for merged in _merges(state[i], state[j]):
                rest = state[:i] + state[i + 1:j] + state[j + 1:]
                yield _state(rest + (merged,)), ("tCon", (merged,), (state[i], state[j]))
    for i, t in enumerate(state):
        rest = state[:i] + state[i + 1:]
        for low in _lowerings(t, max_index):
            yield _state(rest + (low,)), ("tSub", (low,), (t,))
        if isinstance(t, Chan) and t.attr == Unique(0):
            for objs in objects - {t.objects}:
                prev = Chan(objs, Unique(0))
                yield _state(rest + (prev,)), ("tRev", (prev,), (t,))


def _search(types, ident, target: Type | None, all_origins: bool = False):
    start = _state(types)
    bound = search_bound(start, target)
    max_index = _max_index(list(start) + ([target] if target is not None else []))

    def goal(s) -> bool:
        if target is None:
            return len(s) <= 1
        return s == (target,)

    parents = {start: None}
    frontier = deque([(start, 0)])
    found = []
    while frontier:
        s, d = frontier.popleft()
        if goal(s):
            found.append(s)
            if not all_origins:
                break
        if d >= bound:
            continue
        for prev, (rule, before_part, after_part) in _inverse_moves(s, max_index):
            if prev in parents:
                continue
            parents[prev] = (s, rule, before_part, after_part)
            frontier.append((prev, d + 1))
    if not found:
        return []
    results = []
    for s in found:
        moves = []
        cur = s
        while parents[cur] is not None:
            nxt, rule, before_part, after_part = parents[cur]
            moves.append(Move(rule, ident, before_part, after_part))
            cur = nxt
        results.append((s, moves))
    return results


def _by_ident(env: TypeEnv) -> dict:
    groups: dict = {}
    for u, t in env.entries():
        groups.setdefault(u, []).append(t)
    return groups


def is_consistent(env: TypeEnv) -> Consistency:
    """Decide consistency; on success return an origin partial map and the
    forward structural moves that rebuild ``env`` from it."""
    origin = []
    moves: list[Move] = []
    for u, types in _by_ident(env).items():
        res = _search(types, u, None)
        if not res:
            return Consistency(False)
        s, mv = res[0]
        origin.extend((u, t) for t in s)
        moves.extend(mv)
    return Consistency(True, TypeEnv(origin), moves)


def origins(types: list[Type]) -> list[Type]:
    """Every single assumption reachable backwards from ``types`` within the bound."""
    return [s[0] for s, _ in _search(types, None, None, all_origins=True) if len(s) == 1]


def derivable_from(origin: TypeEnv, env: TypeEnv) -> Consistency:
    """Can ``env`` be produced from the partial map ``origin`` by structural rules?"""
    src = origin.as_map()
    moves: list[Move] = []
    for u in src.keys() - env.identifiers():
        moves.append(Move("tWeak", u, (src[u],), ()))
    for u, types in _by_ident(env).items():
        if u not in src:
            return Consistency(False)
        res = _search(types, u, src[u])
        if not res:
            return Consistency(False)
        moves.extend(res[0][1])
    return Consistency(True, origin, moves)


def apply_moves(origin: TypeEnv, moves: list[Move]) -> TypeEnv:
    """Replay forward moves on ``origin``; raises ValueError on an illegal step."""
    env = origin
    for mv in moves:
        before = TypeEnv((mv.ident, t) for t in mv.before)
        after = TypeEnv((mv.ident, t) for t in mv.after)
        rest = env.minus(before)
        if rest is None:
            raise ValueError(f"move {mv} does not apply")
        if mv.rule == "tCon":
            (t,), (t1, t2) = mv.before, mv.after
            if (t1, t2) not in split(t):
                raise ValueError(f"{mv}: not a split")
        elif mv.rule == "tSub":
            (t1,), (t2,) = mv.before, mv.after
            if not subtype(t1, t2):
                raise ValueError(f"{mv}: not a subtype")
        elif mv.rule == "tRev":
            (t1,), (t2,) = mv.before, mv.after
            if not (isinstance(t1, Chan) and isinstance(t2, Chan) and t1.attr == t2.attr == Unique(0)):
                raise ValueError(f"{mv}: revision needs unq(0)")
        elif mv.rule == "tWeak":
            if len(mv.before) != 1 or mv.after:
                raise ValueError(f"{mv}: malformed weakening")
        env = rest + after
    return env


@dataclass
class LemmaCheck:
    ok: bool
    origin: TypeEnv
    decremented: TypeEnv
    counterexample: TypeEnv | None = None


def lemma1_check(env: TypeEnv, u, a1, a2, objects: tuple = ()) -> LemmaCheck:
    """Decrementing two assumptions of ``u`` keeps the environment derivable
    from the origin of the undecremented one.

    Every origin found for ``u`` is tried, not just the first.
    """
    t1, t2 = Chan(tuple(objects), a1), Chan(tuple(objects), a2)
    full = env.add(u, t1).add(u, t2)
    res = is_consistent(full)
    if not res:
        raise ValueError(f"precondition: {full} is not consistent")
    d1, d2 = decrement(t1), decrement(t2)
    if UNDEFINED in (d1, d2):
        raise ValueError("precondition: both decrements must be defined")
    after = env
    for d in (d1, d2):
        if d is not CONSUMED:
            after = after.add(u, d)
    base = res.origin
    candidates = [base]
    u_types = full.types_of(u)
    for alt in origins(u_types):
        if alt != base.as_map()[u]:
            candidates.append(base.restrict(base.identifiers() - {u}).add(u, alt))
    for origin in candidates:
        if not derivable_from(origin, after):
            return LemmaCheck(False, origin, after, after)
    return LemmaCheck(True, base, after)
