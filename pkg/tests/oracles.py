"""Independent reference implementations used as test oracles.

None of these reuse the code paths they check: the successor oracle works
on the raw syntax tree after lifting scopes by hand, and the consistency
oracle is a closed-form characterization rather than a search.
"""

from __future__ import annotations

from collections import Counter

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
    Rec,
    Scope,
    State,
    all_texts,
)
from pir.typesys import Affine, ProcType, Unique, Unrestricted

# ---------------------------------------------------------------------------
# Renaming and substitution written from scratch
# ---------------------------------------------------------------------------


def _rename_name(p: Process, old: Name, new: Name) -> Process:
    """Replace free occurrences of the name ``old``; no capture is possible
    because ``new`` is globally fresh in every use below."""

    def r(u):
        return new if u == old else u

    if isinstance(p, Nil):
        return p
    if isinstance(p, Output):
        return Output(r(p.subject), tuple(r(v) for v in p.objects), _rename_name(p.cont, old, new))
    if isinstance(p, Input):
        return Input(r(p.subject), p.params, _rename_name(p.cont, old, new))
    if isinstance(p, Match):
        return Match(r(p.left), r(p.right), _rename_name(p.then, old, new), _rename_name(p.else_, old, new))
    if isinstance(p, Rec):
        return Rec(p.binder, _rename_name(p.body, old, new))
    if isinstance(p, Par):
        return Par(_rename_name(p.left, old, new), _rename_name(p.right, old, new))
    if isinstance(p, Scope):
        if p.name == old:
            return p
        return Scope(p.name, p.state, _rename_name(p.body, old, new))
    if isinstance(p, Alloc):
        return Alloc(p.var, _rename_name(p.body, old, new))
    if isinstance(p, Free):
        return Free(r(p.subject), _rename_name(p.cont, old, new))
    return p


def _freshen(p: Process, fresh) -> Process:
    """Rename every scope binder in ``p`` (at any depth) to a fresh name."""
    if isinstance(p, Scope):
        n = fresh()
        return Scope(n, p.state, _freshen(_rename_name(p.body, p.name, n), fresh))
    if isinstance(p, Output):
        return Output(p.subject, p.objects, _freshen(p.cont, fresh))
    if isinstance(p, Input):
        return Input(p.subject, p.params, _freshen(p.cont, fresh))
    if isinstance(p, Match):
        return Match(p.left, p.right, _freshen(p.then, fresh), _freshen(p.else_, fresh))
    if isinstance(p, Rec):
        return Rec(p.binder, _freshen(p.body, fresh))
    if isinstance(p, Par):
        return Par(_freshen(p.left, fresh), _freshen(p.right, fresh))
    if isinstance(p, Alloc):
        return Alloc(p.var, _freshen(p.body, fresh))
    if isinstance(p, Free):
        return Free(p.subject, _freshen(p.cont, fresh))
    return p


def _plug_vars(p: Process, m: dict) -> Process:
    """Substitute names for free variables.  Callers freshen scope binders
    first, so no substituted name can be captured."""

    def r(u):
        return m.get(u, u)

    if isinstance(p, Nil):
        return p
    if isinstance(p, Output):
        return Output(r(p.subject), tuple(r(v) for v in p.objects), _plug_vars(p.cont, m))
    if isinstance(p, Input):
        inner = {k: v for k, v in m.items() if k not in p.params}
        return Input(r(p.subject), p.params, _plug_vars(p.cont, inner))
    if isinstance(p, Match):
        return Match(r(p.left), r(p.right), _plug_vars(p.then, m), _plug_vars(p.else_, m))
    if isinstance(p, Rec):
        return Rec(p.binder, _plug_vars(p.body, m))
    if isinstance(p, Par):
        return Par(_plug_vars(p.left, m), _plug_vars(p.right, m))
    if isinstance(p, Scope):
        return Scope(p.name, p.state, _plug_vars(p.body, m))
    if isinstance(p, Alloc):
        inner = {k: v for k, v in m.items() if k != p.var}
        return Alloc(p.var, _plug_vars(p.body, inner))
    if isinstance(p, Free):
        return Free(r(p.subject), _plug_vars(p.cont, m))
    return p


def _unfold(body: Process, x, rec: Rec) -> Process:
    if isinstance(body, Nil):
        return body
    if type(body).__name__ == "PVarRef":
        return rec if body.var == x else body
    if isinstance(body, Rec):
        return body if body.binder == x else Rec(body.binder, _unfold(body.body, x, rec))
    if isinstance(body, Output):
        return Output(body.subject, body.objects, _unfold(body.cont, x, rec))
    if isinstance(body, Input):
        return Input(body.subject, body.params, _unfold(body.cont, x, rec))
    if isinstance(body, Match):
        return Match(body.left, body.right, _unfold(body.then, x, rec), _unfold(body.else_, x, rec))
    if isinstance(body, Par):
        return Par(_unfold(body.left, x, rec), _unfold(body.right, x, rec))
    if isinstance(body, Scope):
        return Scope(body.name, body.state, _unfold(body.body, x, rec))
    if isinstance(body, Alloc):
        return Alloc(body.var, _unfold(body.body, x, rec))
    if isinstance(body, Free):
        return Free(body.subject, _unfold(body.cont, x, rec))
    return body


# ---------------------------------------------------------------------------
# Successor oracle
# ---------------------------------------------------------------------------


class _Fresh:
    def __init__(self, used):
        self.used = set(used)
        self.k = 0

    def __call__(self) -> Name:
        while f"n{self.k}" in self.used:
            self.k += 1
        t = f"n{self.k}"
        self.used.add(t)
        return Name(t)


def _lift(p: Process, fresh) -> tuple[list, list]:
    """Pull every scope reachable through | and new to the top, renaming its
    name to a globally fresh one; return (scopes, active components)."""
    if isinstance(p, Nil):
        return [], []
    if isinstance(p, Par):
        s1, c1 = _lift(p.left, fresh)
        s2, c2 = _lift(p.right, fresh)
        return s1 + s2, c1 + c2
    if isinstance(p, Scope):
        n = fresh()
        s, c = _lift(_rename_name(p.body, p.name, n), fresh)
        return [(n, p.state)] + s, c
    return [], [p]


def _rebuild(scopes, comps) -> Process:
    proc = Nil()
    for c in reversed(comps):
        proc = c if isinstance(proc, Nil) else Par(c, proc)
    for n, s in reversed(scopes):
        proc = Scope(n, s, proc)
    return proc


def naive_successors(c: Configuration) -> list[tuple[str, Configuration]]:
    """Apply the six reduction axioms to every redex of the lifted process."""
    fresh = _Fresh(all_texts(c.process) | {n.text for n in c.store})
    scopes, comps = _lift(c.process, fresh)
    state = {**c.store, **dict(scopes)}
    out = []

    def emit(rule, new_comps, new_scopes=scopes, store=c.store):
        out.append((rule, Configuration(store, _rebuild(new_scopes, new_comps))))

    for i, p in enumerate(comps):
        others = comps[:i] + comps[i + 1:]
        if isinstance(p, Output) and state.get(p.subject) is State.ALLOC:
            for j, q in enumerate(comps):
                if j == i or not isinstance(q, Input) or q.subject != p.subject or len(q.params) != len(p.objects):
                    continue
                rest = [r for k, r in enumerate(comps) if k not in (i, j)]
                body = _plug_vars(_freshen(q.cont, fresh), dict(zip(q.params, p.objects)))
                emit("rCom", rest + [p.cont, body])
        elif isinstance(p, Rec):
            emit("rRec", others + [_unfold(_freshen(p.body, fresh), p.binder, p)])
        elif isinstance(p, Match):
            emit("rThen" if p.left == p.right else "rElse", others + [p.then if p.left == p.right else p.else_])
        elif isinstance(p, Alloc):
            n = fresh()
            emit("rAll", others + [Scope(n, State.ALLOC, _plug_vars(p.body, {p.var: n}))])
        elif isinstance(p, Free) and state.get(p.subject) is State.ALLOC:
            if p.subject in dict(scopes):
                flipped = [(m, State.DEALLOC if m == p.subject else s) for m, s in scopes]
                emit("rFree", others + [p.cont], flipped)
            else:
                emit("rFree", others + [p.cont], store={**c.store, p.subject: State.DEALLOC})
    return out


def naive_witnesses(c: Configuration) -> Counter:
    fresh = _Fresh(all_texts(c.process) | {n.text for n in c.store})
    scopes, comps = _lift(c.process, fresh)
    state = {**c.store, **dict(scopes)}
    found = Counter()
    scoped = dict(scopes)
    for i, p in enumerate(comps):
        if isinstance(p, (Output, Input)) and state.get(p.subject) is State.DEALLOC:
            found["eOut" if isinstance(p, Output) else "eIn", p.subject in scoped] += 1
        if isinstance(p, Output):
            for j, q in enumerate(comps):
                if j != i and isinstance(q, Input) and q.subject == p.subject and len(q.params) != len(p.objects):
                    found["eAty", p.subject in scoped] += 1
    return found


# ---------------------------------------------------------------------------
# Consistency in closed form
# ---------------------------------------------------------------------------


def consistent_closed_form(types) -> bool:
    """Consistency of one identifier's assumptions, without search.

    Proc assumptions only combine with proc assumptions.  Channel
    assumptions must agree on objects.  With a unique assumption there is
    exactly one, no unrestricted one, and at most as many affine ones as its
    index.
    """
    types = list(types)
    if not types:
        return True
    procs = [t for t in types if isinstance(t, ProcType)]
    if procs:
        return len(procs) == len(types)
    if len({t.objects for t in types}) > 1:
        return False
    uniques = [t.attr.index for t in types if isinstance(t.attr, Unique)]
    if not uniques:
        return True
    unr = sum(isinstance(t.attr, Unrestricted) for t in types)
    aff = sum(isinstance(t.attr, Affine) for t in types)
    return len(uniques) == 1 and unr == 0 and aff <= uniques[0]


def env_consistent_closed_form(env) -> bool:
    groups: dict = {}
    for u, t in env:
        groups.setdefault(u, []).append(t)
    return all(consistent_closed_form(ts) for ts in groups.values())

