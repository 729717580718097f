"""Algorithmic typing: a backtracking search that emits checkable derivations.

Logical rules are applied syntax-directed.  Structural rules are applied on
demand: at prefix subjects, at output objects, on entry to a recursion, at
parallel splits and at the leaves (weakening).  Unknown object types (of
allocated channels, scoped names, revised unique channels) are metavariables
resolved by unification.  Every accepted derivation is re-checked by
``pir.derivation.validate`` before it is returned.
"""

from __future__ import annotations

import itertools
from collections import Counter, deque, namedtuple
from dataclasses import dataclass, field
from typing import Iterator

from pir.congruence import config_key
from pir.derivation import Derivation, Judgment, validate
from pir.semantics import canonical_config, successors
from pir.syntax import (
    Alloc,
    Configuration,
    Free,
    Input,
    Match,
    Name,
    Nil,
    Output,
    Par,
    Process,
    ProcVar,
    PVarRef,
    Rec,
    Scope,
    State,
    free_ids,
    identifiers,
    rename_apart,
)
from pir.typesys import (
    AFF,
    CONSUMED,
    PROC,
    UNR,
    Affine,
    Chan,
    ProcType,
    Type,
    TypeEnv,
    Unique,
    Unrestricted,
    decrement,
)

DEFAULT_BUDGET = 200_000

UNQ0 = Unique(0)


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NotTypable:
    """No derivation exists (within the syntactic index ceiling)."""

    reason: str
    judgment: Judgment | None = None
    rule: str | None = None

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        s = self.reason
        if self.judgment is not None:
            s += f"\n  deepest failing judgment ({self.rule}): {self.judgment}"
        return s


@dataclass(frozen=True)
class Inconclusive:
    """The search hit a bound before deciding."""

    reason: str

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return self.reason


Result = Derivation | NotTypable | Inconclusive


def verdict(result: Result) -> str:
    if isinstance(result, Derivation):
        return "ACCEPTED"
    if isinstance(result, NotTypable):
        return "REJECTED"
    return "INCONCLUSIVE"


# ---------------------------------------------------------------------------
# Metavariables and unification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OMeta:
    """An unknown object-type list."""

    id: int

    def __str__(self) -> str:
        return f"?o{self.id}"


@dataclass(frozen=True)
class TMeta(Type):
    """An unknown channel type."""

    id: int

    def __str__(self) -> str:
        return f"?t{self.id}"


def _walk_t(t, s):
    while isinstance(t, TMeta) and t in s:
        t = s[t]
    return t


def _walk_o(o, s):
    while isinstance(o, OMeta) and o in s:
        o = s[o]
    return o


def _metas(t, s) -> Iterator:
    t = _walk_t(t, s)
    if isinstance(t, TMeta):
        yield t
    elif isinstance(t, Chan):
        o = _walk_o(t.objects, s)
        if isinstance(o, OMeta):
            yield o
        else:
            for x in o:
                yield from _metas(x, s)


def _ground(t, s) -> bool:
    return next(_metas(t, s), None) is None


def _resolve(t, s):
    t = _walk_t(t, s)
    if isinstance(t, Chan):
        o = _walk_o(t.objects, s)
        if not isinstance(o, OMeta):
            o = tuple(_resolve(x, s) for x in o)
        return Chan(o, t.attr)
    return t


def _unify(a, b, s):
    a, b = _walk_t(a, s), _walk_t(b, s)
    if a == b:
        return s
    if isinstance(a, TMeta):
        return None if any(m == a for m in _metas(b, s)) else {**s, a: b}
    if isinstance(b, TMeta):
        return _unify(b, a, s)
    if isinstance(a, ProcType) or isinstance(b, ProcType):
        return None
    if a.attr != b.attr:
        return None
    return _unify_o(a.objects, b.objects, s)


def _unify_o(a, b, s):
    a, b = _walk_o(a, s), _walk_o(b, s)
    if a == b:
        return s
    if isinstance(a, OMeta):
        if any(any(m == a for m in _metas(x, s)) for x in b):
            return None
        return {**s, a: b}
    if isinstance(b, OMeta):
        return _unify_o(b, a, s)
    if len(a) != len(b):
        return None
    for x, y in zip(a, b):
        s = _unify(x, y, s)
        if s is None:
            return None
    return s


# ---------------------------------------------------------------------------
# Search state
# ---------------------------------------------------------------------------

# A raw derivation node; env is a tuple of (identifier, type) with metas.
_N = namedtuple("_N", "rule env proc premises")

# env: assumptions still available; taken: (tag, ident, type) set aside for the
# current rule; moves: (rule, full env before the move); s: substitution.
_St = namedtuple("_St", "env taken moves s")


def _full(st: _St) -> tuple:
    return st.env + tuple((u, t) for _, u, t in st.taken)


def _move(st: _St, rule: str, env: tuple) -> _St:
    return _St(env, st.taken, st.moves + ((rule, _full(st)),), st.s)


def _weaken(st: _St, i: int) -> _St:
    return _move(st, "tWeak", st.env[:i] + st.env[i + 1:])


def _split(st: _St, i: int, t1, t2) -> tuple[_St, int, int]:
    u = st.env[i][0]
    env = st.env[:i] + ((u, t1),) + st.env[i + 1:] + ((u, t2),)
    return _move(st, "tCon", env), i, len(env) - 1


def _replace(st: _St, i: int, t, rule: str) -> _St:
    u = st.env[i][0]
    return _move(st, rule, st.env[:i] + ((u, t),) + st.env[i + 1:])


def _take(st: _St, i: int, tag: str = "*") -> _St:
    u, t = st.env[i]
    return _St(st.env[:i] + st.env[i + 1:], st.taken + ((tag, u, t),), st.moves, st.s)


def _wrap(moves: tuple, node: _N) -> _N:
    for rule, env in reversed(moves):
        node = _N(rule, env, node.proc, (node,))
    return node


class _OutOfBudget(Exception):
    pass


_RULE_OF = {
    Nil: "tNil", Output: "tOut", Input: "tIn", Match: "tIf", Rec: "tRec", PVarRef: "tVar",
    Par: "tPar", Alloc: "tAll", Free: "tFree",
}


class _Search:
    def __init__(self, root: Process, env: TypeEnv, max_index: int | None, budget: int) -> None:
        self.ids = itertools.count()
        self.defaults: dict = {}
        self.calls = 0
        self.budget = budget
        self.cap = max_index
        self.pruned = False
        self.uses = Counter(u.text for u in identifiers(root))
        self.base_index = max((t.attr.index for _, t in env if isinstance(t, Chan) and isinstance(t.attr, Unique)), default=0)
        self.deepest: tuple = (-1, None, None, None)
        self.ok: dict = {}
        self.failed: set = set()
        self._fv: dict = {}

    # -- bookkeeping -------------------------------------------------------

    def ometa(self) -> OMeta:
        return OMeta(next(self.ids))

    def tmeta(self) -> TMeta:
        return TMeta(next(self.ids))

    def free(self, p: Process) -> frozenset:
        k = id(p)
        if k not in self._fv:
            self._fv[k] = free_ids(p)
        return self._fv[k]

    def index_ok(self, u, i: int) -> bool:
        if self.cap is not None:
            if i > self.cap:
                self.pruned = True
                return False
            return True
        return i <= self.base_index + self.uses[u.text] + 1

    def fail(self, depth: int, env: tuple, p: Process, s) -> None:
        if depth > self.deepest[0]:
            self.deepest = (depth, tuple((u, _resolve(t, s)) for u, t in env), p, _RULE_OF.get(type(p), "tRst"))

    # -- typing ------------------------------------------------------------

    def tc(self, env: tuple, p: Process, s, depth: int) -> Iterator[tuple[_N, dict]]:
        self.calls += 1
        if self.calls > self.budget:
            raise _OutOfBudget
        if all(_ground(t, s) for _, t in env):
            key = (frozenset(Counter((u, _resolve(t, s)) for u, t in env).items()), id(p))
            if key in self.failed:
                return
            if key in self.ok:
                yield self.ok[key], s
                return
            for node, s2 in self._tc(env, p, s, depth):
                node = _zonk_node(node, s2, self.defaults)
                self.ok[key] = node
                yield node, s
                return
            self.failed.add(key)
            self.fail(depth, env, p, s)
            return
        found = False
        for r in self._tc(env, p, s, depth):
            found = True
            yield r
        if not found:
            self.fail(depth, env, p, s)

    def _tc(self, env: tuple, p: Process, s, depth: int):
        st = _St(env, (), (), s)
        if isinstance(p, Nil):
            st = self._weaken_all(st, lambda u, t: False)
            yield _wrap(st.moves, _N("tNil", (), p, ())), s
        elif isinstance(p, PVarRef):
            yield from self._pvar(st, p)
        elif isinstance(p, Output):
            yield from self._output(st, p, depth)
        elif isinstance(p, Input):
            yield from self._input(st, p, depth)
        elif isinstance(p, Free):
            for st1 in self._free(st, p.subject):
                for node, s2 in self.tc(st1.env, p.cont, st1.s, depth + 1):
                    yield _wrap(st1.moves, _N("tFree", _full(st1), p, (node,))), s2
        elif isinstance(p, Match):
            yield from self._match(st, p, depth)
        elif isinstance(p, Rec):
            yield from self._rec(st, p, depth)
        elif isinstance(p, Par):
            yield from self._par(st, p, depth)
        elif isinstance(p, Alloc):
            prem = env + ((p.var, Chan(self.ometa(), UNQ0)),)
            for node, s2 in self.tc(prem, p.body, s, depth + 1):
                yield _N("tAll", env, p, (node,)), s2
        elif isinstance(p, Scope):
            if p.state is State.ALLOC:
                prem, rule = env + ((p.name, Chan(self.ometa(), UNQ0)),), "tRst1"
            else:
                prem, rule = env, "tRst2"
            for node, s2 in self.tc(prem, p.body, s, depth + 1):
                yield _N(rule, env, p, (node,)), s2
        else:
            raise TypeError(f"not a process: {p!r}")

    # -- leaves --------------------------------------------------------------

    def _weaken_all(self, st: _St, keep) -> _St:
        i = 0
        while i < len(st.env):
            u, t = st.env[i]
            if keep(u, t):
                i += 1
            else:
                st = _weaken(st, i)
        return st

    def _pvar(self, st: _St, p: PVarRef):
        kept = []

        def keep(u, t):
            if u == p.var and not kept and isinstance(_walk_t(t, st.s), ProcType):
                kept.append(u)
                return True
            return False

        st = self._weaken_all(st, keep)
        if kept:
            yield _wrap(st.moves, _N("tVar", st.env, p, ())), st.s

    # -- getting assumptions ready ---------------------------------------------

    def _candidates(self, st: _St, u) -> list[int]:
        seen, out = set(), []
        for i, (v, t) in enumerate(st.env):
            if v != u:
                continue
            k = _resolve(t, st.s)
            if k not in seen:
                seen.add(k)
                out.append(i)
        return out

    def _ready(self, st: _St, i: int, revise: bool = True):
        """Bind an unknown type, or revise a unique-now type to fresh objects."""
        u, t = st.env[i]
        t = _walk_t(t, st.s)
        if isinstance(t, TMeta):
            for a in (UNQ0, UNR, AFF):
                yield _St(st.env, st.taken, st.moves, {**st.s, t: Chan(self.ometa(), a)}), i
            return
        if revise and isinstance(t, Chan) and t.attr == UNQ0 and not isinstance(_walk_o(t.objects, st.s), OMeta):
            m = self.ometa()
            self.defaults[m] = t.objects
            yield _replace(st, i, Chan(m, UNQ0), "tRev"), i
            return
        yield st, i

    def _type(self, st: _St, i: int):
        return _walk_t(st.env[i][1], st.s)

    # -- prefix subjects -------------------------------------------------------

    def _subject(self, st: _St, u, arity: int):
        """Yield (state, type) with a decrementable channel assumption for ``u`` taken."""
        for i0 in self._candidates(st, u):
            for st1, i in self._ready(st, i0):
                t = self._type(st1, i)
                if not isinstance(t, Chan):
                    continue
                for st2, j in self._subject_options(st1, u, i, t):
                    yield from self._arity(_take(st2, j, "S"), self._type(st2, j), arity)

    def _subject_options(self, st: _St, u, i: int, t: Chan):
        a = t.attr
        if isinstance(a, (Affine, Unrestricted)):
            yield st, i
            return
        if a.index >= 1:
            yield st, i
        nxt = Unique(a.index + 1)
        if self.index_ok(u, nxt.index):
            st2, ia, iu = _split(st, i, t.with_attr(AFF), t.with_attr(nxt))
            yield st2, iu
            yield st2, ia
        yield _replace(st, i, t.with_attr(UNR), "tSub"), i

    def _arity(self, st: _St, t: Chan, arity: int):
        o = _walk_o(t.objects, st.s)
        if isinstance(o, OMeta):
            fresh = tuple(self.tmeta() for _ in range(arity))
            yield _St(st.env, st.taken, st.moves, {**st.s, o: fresh}), Chan(fresh, t.attr)
        elif len(o) == arity:
            yield st, Chan(o, t.attr)

    # -- output objects --------------------------------------------------------

    def _objects(self, st: _St, pairs: list):
        if not pairs:
            yield st
            return
        (v, want), rest = pairs[0], pairs[1:]
        for st1 in self._object(st, v, want):
            yield from self._objects(st1, rest)

    def _object(self, st: _St, v, want):
        """Yield states in which an assumption of exactly ``want`` for ``v`` is taken."""
        for i0 in self._candidates(st, v):
            for st1, i in self._ready(st, i0):
                t = self._type(st1, i)
                if not isinstance(t, Chan):
                    continue
                w = _walk_t(want, st1.s)
                if isinstance(w, TMeta):
                    for st2, j in self._any(st1, v, i, t):
                        s2 = _unify(w, self._type(st2, j), st2.s)
                        if s2 is not None:
                            yield _take(_St(st2.env, st2.taken, st2.moves, s2), j, "O")
                    continue
                if not isinstance(w, Chan):
                    continue
                s1 = _unify_o(t.objects, w.objects, st1.s)
                if s1 is None:
                    continue
                st1 = _St(st1.env, st1.taken, st1.moves, s1)
                for st2, j in self._exactly(st1, v, i, t, w.attr):
                    yield _take(st2, j, "O")

    def _any(self, st: _St, v, i: int, t: Chan):
        a = t.attr
        if isinstance(a, Affine):
            yield st, i
        elif isinstance(a, Unrestricted):
            st2, i1, _ = _split(st, i, t, t)
            yield st2, i1
        else:
            yield st, i
            if self.index_ok(v, a.index + 1):
                st2, ia, iu = _split(st, i, t.with_attr(AFF), t.with_attr(Unique(a.index + 1)))
                yield st2, ia
                yield st2, iu
            st2 = _replace(st, i, t.with_attr(UNR), "tSub")
            st3, i1, _ = _split(st2, i, t.with_attr(UNR), t.with_attr(UNR))
            yield st3, i1

    def _exactly(self, st: _St, v, i: int, t: Chan, want):
        a = t.attr
        if isinstance(want, Affine):
            if isinstance(a, Affine):
                yield st, i
            elif isinstance(a, Unrestricted):
                st2, i1, _ = _split(st, i, t, t)
                yield _replace(st2, i1, t.with_attr(AFF), "tSub"), i1
            elif self.index_ok(v, a.index + 1):
                st2, ia, _ = _split(st, i, t.with_attr(AFF), t.with_attr(Unique(a.index + 1)))
                yield st2, ia
        elif isinstance(want, Unrestricted):
            if isinstance(a, Unique):
                st = _replace(st, i, t.with_attr(UNR), "tSub")
                t = t.with_attr(UNR)
                a = UNR
            if isinstance(a, Unrestricted):
                st2, i1, _ = _split(st, i, t, t)
                yield st2, i1
        elif isinstance(a, Unique) and a.index <= want.index:
            # keep m affine copies for the continuation, send the rest
            k, cur, idx = a.index, st, i
            while True:
                if k == want.index:
                    yield cur, idx
                else:
                    yield _replace(cur, idx, t.with_attr(want), "tSub"), idx
                if k >= want.index or not self.index_ok(v, k + 1):
                    break
                cur, _, idx = _split(cur, idx, t.with_attr(AFF), t.with_attr(Unique(k + 1)))
                k += 1

    # -- rules with a subject ---------------------------------------------------

    def _output(self, st: _St, p: Output, depth: int):
        for st1, t in self._subject(st, p.subject, len(p.objects)):
            for st2 in self._objects(st1, list(zip(p.objects, t.objects))):
                prem = st2.env
                dec = decrement(t)
                if dec is not CONSUMED:
                    prem = prem + ((p.subject, dec),)
                for node, s3 in self.tc(prem, p.cont, st2.s, depth + 1):
                    yield _wrap(st2.moves, _N("tOut", _full(st2), p, (node,))), s3

    def _input(self, st: _St, p: Input, depth: int):
        for st1, t in self._subject(st, p.subject, len(p.params)):
            prem = st1.env
            dec = decrement(t)
            if dec is not CONSUMED:
                prem = prem + ((p.subject, dec),)
            prem = prem + tuple(zip(p.params, t.objects))
            for node, s2 in self.tc(prem, p.cont, st1.s, depth + 1):
                yield _wrap(st1.moves, _N("tIn", _full(st1), p, (node,))), s2

    def _free(self, st: _St, u):
        for i0 in self._candidates(st, u):
            for st1, i in self._ready(st, i0, revise=False):
                t = self._type(st1, i)
                if isinstance(t, Chan) and t.attr == UNQ0:
                    yield _take(st1, i, "F")

    def _match(self, st: _St, p: Match, depth: int):
        for u in (p.left, p.right):
            if not any(v == u and not isinstance(_walk_t(t, st.s), ProcType) for v, t in st.env):
                return
        for n1, s1 in self.tc(st.env, p.then, st.s, depth + 1):
            for n2, s2 in self.tc(st.env, p.else_, s1, depth + 1):
                yield _N("tIf", st.env, p, (n1, n2)), s2

    # -- recursion ------------------------------------------------------------

    def _rec(self, st: _St, p: Rec, depth: int):
        fv = self.free(p.body)
        s = st.s
        i = 0
        while i < len(st.env):
            u, t = st.env[i]
            t = _walk_t(t, s)
            if u not in fv or isinstance(t, Chan) and isinstance(t.attr, Affine):
                st = _weaken(st, i)
                continue
            if isinstance(t, TMeta):
                s = {**s, t: Chan(self.ometa(), UNR)}
                st = _St(st.env, st.taken, st.moves, s)
            elif isinstance(t, Chan) and isinstance(t.attr, Unique):
                if t.attr == UNQ0:
                    (st, i), = self._ready(st, i)
                    t = self._type(st, i)
                st = _replace(st, i, t.with_attr(UNR), "tSub")
            i += 1
        prem = st.env + ((p.binder, PROC),)
        for node, s2 in self.tc(prem, p.body, st.s, depth + 1):
            yield _wrap(st.moves, _N("tRec", st.env, p, (node,))), s2

    # -- parallel composition ---------------------------------------------------

    def _par(self, st: _St, p: Par, depth: int):
        fl, fr = self.free(p.left), self.free(p.right)
        for st1 in self._dist(st, fl, fr):
            left = tuple((u, t) for tag, u, t in st1.taken if tag == "L")
            right = tuple((u, t) for tag, u, t in st1.taken if tag == "R")
            concl = _full(st1)
            for n1, s1 in self.tc(left, p.left, st1.s, depth + 1):
                for n2, s2 in self.tc(right, p.right, s1, depth + 1):
                    yield _wrap(st1.moves, _N("tPar", concl, p, (n1, n2))), s2

    def _dist(self, st: _St, fl, fr):
        if not st.env:
            yield st
            return
        u, _ = st.env[0]
        inl, inr = u in fl, u in fr
        if not inl and not inr:
            yield from self._dist(_weaken(st, 0), fl, fr)
        elif not inr:
            yield from self._dist(_take(st, 0, "L"), fl, fr)
        elif not inl:
            yield from self._dist(_take(st, 0, "R"), fl, fr)
        else:
            for st1 in self._share(st, u):
                yield from self._dist(st1, fl, fr)

    def _share(self, st: _St, u):
        """Options for an assumption at position 0 whose identifier is used on both sides."""
        t = self._type(st, 0)
        if isinstance(t, TMeta):
            for st1, _ in self._ready(st, 0):
                yield from self._share(st1, u)
            return
        if isinstance(t, ProcType) or isinstance(t.attr, Unrestricted):
            st1, i1, i2 = _split(st, 0, t, t)
            yield _take(_take(st1, i2, "R"), i1, "L")
            return
        if isinstance(t.attr, Affine):
            yield _take(st, 0, "L")
            yield _take(st, 0, "R")
            return
        k = t.attr.index
        base, t0 = st, t
        if k == 0:
            (base, _), = self._ready(st, 0)
            t0 = self._type(base, 0)
        # one affine copy to one side, the unique remainder to the other
        if self.index_ok(u, k + 1):
            for aff_side, unq_side in (("L", "R"), ("R", "L")):
                st1, ia, iu = _split(base, 0, t0.with_attr(AFF), t0.with_attr(Unique(k + 1)))
                yield _take(_take(st1, iu, unq_side), ia, aff_side)
        yield _take(st, 0, "L")
        yield _take(st, 0, "R")
        # several affine copies to one side
        for aff_side, unq_side in (("L", "R"), ("R", "L")):
            cur, idx, m = base, 0, 0
            while self.index_ok(u, k + m + 1):
                cur, ia, idx = _split(cur, idx, t0.with_attr(AFF), t0.with_attr(Unique(k + m + 1)))
                cur = _take(cur, ia, aff_side)
                idx -= 1
                m += 1
                if m >= 2:
                    yield _take(cur, idx, unq_side)
        st1 = _replace(st, 0, t.with_attr(UNR), "tSub")
        st2, i1, i2 = _split(st1, 0, t.with_attr(UNR), t.with_attr(UNR))
        yield _take(_take(st2, i2, "R"), i1, "L")


# ---------------------------------------------------------------------------
# Zonking: from raw nodes to derivations
# ---------------------------------------------------------------------------


def _zonk_type(t, s, defaults):
    t = _walk_t(t, s)
    if isinstance(t, TMeta):
        return Chan((), UNR)
    if isinstance(t, ProcType):
        return t
    o = _walk_o(t.objects, s)
    seen = set()
    while isinstance(o, OMeta):
        if o in seen or o not in defaults:
            o = ()
            break
        seen.add(o)
        o = _walk_o(defaults[o], s)
    return Chan(tuple(_zonk_type(x, s, defaults) for x in o), t.attr)


def _zonk_node(n: _N, s, defaults) -> _N:
    env = tuple((u, _zonk_type(t, s, defaults)) for u, t in n.env)
    return _N(n.rule, env, n.proc, tuple(_zonk_node(c, s, defaults) for c in n.premises))


def _to_derivation(n: _N) -> Derivation:
    premises = tuple(_to_derivation(c) for c in n.premises)
    d = Derivation(n.rule, Judgment(TypeEnv(n.env), n.proc), premises)
    if d.rule in ("tSub", "tRev") and premises and premises[0].conclusion == d.conclusion:
        return premises[0]
    return d


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------


def infer(env: TypeEnv, p: Process, max_index: int | None = None, budget: int = DEFAULT_BUDGET) -> Result:
    """Search for a derivation of ``env |- p``.

    Binders of ``p`` are renamed apart from each other and from ``env`` first,
    so the derivation may type an alpha-variant of ``p``.  ``max_index`` caps
    unique indices; when the cap prunes a branch a failure is Inconclusive.
    """
    missing = sorted(u.text for u in free_ids(p) if not env.types_of(u) and not isinstance(u, ProcVar))
    if missing:
        return NotTypable(f"no assumption for free identifier(s) {', '.join(missing)}")
    unbound = sorted(u.text for u in free_ids(p) if isinstance(u, ProcVar) and PROC not in env.types_of(u))
    if unbound:
        return NotTypable(f"process variable(s) {', '.join(unbound)} without a proc assumption")
    q = rename_apart(p, {u.text for u in env.identifiers()})
    search = _Search(q, env, max_index, budget)
    rejected = 0
    try:
        for node, s in search.tc(tuple(env.entries()), q, {}, 0):
            d = _to_derivation(_zonk_node(node, s, search.defaults))
            if validate(d):
                return d
            rejected += 1
    except _OutOfBudget:
        return Inconclusive(f"search budget of {budget} judgments exhausted")
    if search.pruned:
        return Inconclusive(f"no derivation with unique indices up to {max_index}")
    depth, fenv, fp, rule = search.deepest
    judgment = Judgment(TypeEnv(fenv), fp) if fp is not None else None
    note = f" ({rejected} candidate derivation(s) failed validation)" if rejected else ""
    return NotTypable("no derivation found" + note, judgment, rule)


def check_config(env: TypeEnv, c: Configuration, max_index: int | None = None, budget: int = DEFAULT_BUDGET) -> Result:
    """Type a configuration: env must be a partial map of allocated channels."""
    if not c.closed:
        return NotTypable("configuration is not closed")
    if not env.is_partial_map():
        return NotTypable("environment is not a partial map")
    for u in sorted(env.identifiers(), key=lambda u: u.text):
        if isinstance(u, Name) and c.store.get(u) is not State.ALLOC:
            return NotTypable(f"channel not allocated in store: {u.text}")
    return infer(env, c.process, max_index, budget)


# ---------------------------------------------------------------------------
# Subject reduction at desk scale
# ---------------------------------------------------------------------------


@dataclass
class ProbeReport:
    states: int = 0
    typed: int = 0
    falsifications: list = field(default_factory=list)  # (steps, configuration)
    inconclusive: list = field(default_factory=list)
    truncated: bool = False

    @property
    def ok(self) -> bool:
        return not self.falsifications

    def summary(self) -> str:
        return (
            f"states {self.states}  typed {self.typed}  falsifications {len(self.falsifications)}  "
            f"inconclusive {len(self.inconclusive)}  truncated {'yes' if self.truncated else 'no'}"
        )


def _candidate_envs(env: TypeEnv, label, c: Configuration) -> list[TypeEnv]:
    live = {u for u in free_ids(c.process) if isinstance(u, Name) and c.store.get(u) is State.ALLOC}
    base = env.restrict(live)
    out = [base]
    if label.rule == "rCom":
        u = Name(label.subject)
        for t in base.types_of(u):
            if isinstance(t, Chan) and isinstance(t.attr, Unique) and t.attr.index >= 1:
                out.append(base.remove(u, t).add(u, decrement(t)))
    return out


def subject_reduction_probe(
    env: TypeEnv,
    c: Configuration,
    depth: int = 20,
    max_states: int = 100_000,
    budget: int = DEFAULT_BUDGET,
) -> ProbeReport:
    """Check that every configuration reachable within ``depth`` steps is typable.

    The environment for a successor is derived from the one that typed its
    predecessor, adjusted for the reduction that fired.
    """
    report = ProbeReport()
    start = canonical_config(c)
    first = check_config(env, start, budget=budget)
    if not isinstance(first, Derivation):
        raise ValueError(f"initial configuration is not typable: {first}")
    seen = {config_key(start)}
    queue = deque([(start, env, 0, ())])
    report.states = 1
    report.typed = 1
    while queue:
        cur, cur_env, d, path = queue.popleft()
        if d >= depth:
            if successors(cur):
                report.truncated = True
            continue
        for label, nxt in successors(cur):
            key = config_key(nxt)
            if key in seen:
                continue
            if len(seen) >= max_states:
                report.truncated = True
                continue
            seen.add(key)
            report.states += 1
            found, unsure = None, False
            for cand in _candidate_envs(cur_env, label, nxt):
                r = check_config(cand, nxt, budget=budget)
                if isinstance(r, Derivation):
                    found = cand
                    break
                unsure |= isinstance(r, Inconclusive)
            steps = path + (label,)
            if found is None:
                (report.inconclusive if unsure else report.falsifications).append((steps, nxt))
                continue
            report.typed += 1
            queue.append((nxt, found, d + 1, steps))
    return report
