"""Canonical representatives of structural-congruence classes.

The implemented axioms are: commutativity, associativity and unit of ``|``,
alpha-conversion, reordering of scopes, and scope extrusion past parallel
components that do not mention the scoped name.  The garbage axiom
``P == new c. P`` is not part of the relation.

Every process position (top level, prefix continuations, branches, bodies)
is normalised to ``new c1:s1 ... new ck:sk. (C1 | ... | Cm)`` where the
components are prefixes.  The component order and the scope order are chosen
by minimising a structural key, so congruent processes get equal keys.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from pir.syntax import (
    NIL,
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
    PVarRef,
    Rec,
    Scope,
    State,
    _atom,
    all_texts,
    free_ids,
    fresh_text,
    identifiers,
    par,
    substitute,
)

# scopes at one level beyond this many are ordered heuristically
_MAX_PERMUTED_SCOPES = 6


@dataclass
class _Pos:
    scopes: list[tuple[Name, State]]
    comps: list  # prefix processes whose children are _Pos


def _normalise(p: Process) -> _Pos:
    scopes: list[tuple[Name, State]] = []
    comps: list[Process] = []
    used = all_texts(p)
    taken = {u.text for u in free_ids(p)}
    _collect(p, scopes, comps, used, taken)
    return _Pos(scopes, [_normalise_prefix(c) for c in comps])


def _collect(p: Process, scopes, comps, used: set[str], taken: set[str]) -> None:
    if isinstance(p, Nil):
        return
    if isinstance(p, Par):
        _collect(p.left, scopes, comps, used, taken)
        _collect(p.right, scopes, comps, used, taken)
        return
    if isinstance(p, Scope):
        name, body = p.name, p.body
        if name.text in taken:
            name = Name(fresh_text(name.text, used | taken))
            used.add(name.text)
            body = substitute(body, {p.name: name})
        taken.add(name.text)
        scopes.append((name, p.state))
        _collect(body, scopes, comps, used, taken)
        return
    comps.append(p)


def _normalise_prefix(p: Process):
    if isinstance(p, Output):
        return Output(p.subject, p.objects, _normalise(p.cont))
    if isinstance(p, Input):
        return Input(p.subject, p.params, _normalise(p.cont))
    if isinstance(p, Free):
        return Free(p.subject, _normalise(p.cont))
    if isinstance(p, Match):
        return Match(p.left, p.right, _normalise(p.then), _normalise(p.else_))
    if isinstance(p, Rec):
        return Rec(p.binder, _normalise(p.body))
    if isinstance(p, Alloc):
        return Alloc(p.var, _normalise(p.body))
    if isinstance(p, PVarRef):
        return p
    raise TypeError(f"unexpected component {p!r}")


def _best(pos: _Pos, env: Mapping, depth: int) -> tuple[tuple, Process]:
    k = len(pos.scopes)
    if k == 0:
        results = sorted((_comp(c, env, depth) for c in pos.comps), key=lambda r: r[0])
        return ((), tuple(r[0] for r in results)), par(*(r[1] for r in results))
    # scopes whose name occurs in no component only contribute their state,
    # so they go last in state order and only the others are permuted
    occurring = {u for c in pos.comps for u in free_ids(_denormalise(c))}
    used = [i for i, (n, _) in enumerate(pos.scopes) if n in occurring]
    idle = tuple(sorted((i for i in range(k) if i not in used), key=lambda i: pos.scopes[i][1].value))
    if len(used) <= _MAX_PERMUTED_SCOPES:
        orders = (perm + idle for perm in itertools.permutations(used))
    else:
        orders = [_heuristic_order(pos, env, depth)]
    best = None
    for order in orders:
        scoped = [pos.scopes[i] for i in order]
        inner = dict(env)
        for idx, (n, _) in enumerate(scoped):
            inner[n] = ("A", depth + idx)
        results = sorted((_comp(c, inner, depth + k) for c in pos.comps), key=lambda r: r[0])
        key = (tuple(s.value for _, s in scoped), tuple(r[0] for r in results))
        if best is None or key < best[0]:
            best = (key, scoped, results)
    key, scoped, results = best
    proc = par(*(r[1] for r in results))
    for n, s in reversed(scoped):
        proc = Scope(n, s, proc)
    return key, proc


def _heuristic_order(pos: _Pos, env: Mapping, depth: int) -> tuple[int, ...]:
    inner = dict(env)
    for n, s in pos.scopes:
        inner[n] = ("A", -1)
    ranked = sorted(pos.comps, key=lambda c: _comp(c, inner, depth)[0])
    order: list[int] = []
    index = {n: i for i, (n, _) in enumerate(pos.scopes)}
    for c in ranked:
        for u in identifiers(_denormalise(c)):
            i = index.get(u)
            if i is not None and i not in order:
                order.append(i)
    rest = sorted((i for i in range(len(pos.scopes)) if i not in order), key=lambda i: pos.scopes[i][1].value)
    return tuple(order + rest)


def _denormalise(c) -> Process:
    if isinstance(c, _Pos):
        proc = par(*(_denormalise(x) for x in c.comps))
        for n, s in reversed(c.scopes):
            proc = Scope(n, s, proc)
        return proc
    if isinstance(c, Output):
        return Output(c.subject, c.objects, _denormalise(c.cont))
    if isinstance(c, Input):
        return Input(c.subject, c.params, _denormalise(c.cont))
    if isinstance(c, Free):
        return Free(c.subject, _denormalise(c.cont))
    if isinstance(c, Match):
        return Match(c.left, c.right, _denormalise(c.then), _denormalise(c.else_))
    if isinstance(c, Rec):
        return Rec(c.binder, _denormalise(c.body))
    if isinstance(c, Alloc):
        return Alloc(c.var, _denormalise(c.body))
    return c


def _comp(c, env: Mapping, depth: int) -> tuple[tuple, Process]:
    if isinstance(c, Output):
        k, q = _best(c.cont, env, depth)
        return ("out", _atom(c.subject, env), tuple(_atom(v, env) for v in c.objects), k), Output(c.subject, c.objects, q)
    if isinstance(c, Input):
        inner = {**env, **{x: ("b", depth + i) for i, x in enumerate(c.params)}}
        k, q = _best(c.cont, inner, depth + len(c.params))
        return ("in", _atom(c.subject, env), len(c.params), k), Input(c.subject, c.params, q)
    if isinstance(c, Free):
        k, q = _best(c.cont, env, depth)
        return ("free", _atom(c.subject, env), k), Free(c.subject, q)
    if isinstance(c, Match):
        k1, q1 = _best(c.then, env, depth)
        k2, q2 = _best(c.else_, env, depth)
        return ("if", _atom(c.left, env), _atom(c.right, env), k1, k2), Match(c.left, c.right, q1, q2)
    if isinstance(c, Rec):
        k, q = _best(c.body, {**env, c.binder: ("b", depth)}, depth + 1)
        return ("rec", k), Rec(c.binder, q)
    if isinstance(c, Alloc):
        k, q = _best(c.body, {**env, c.var: ("b", depth)}, depth + 1)
        return ("alloc", k), Alloc(c.var, q)
    if isinstance(c, PVarRef):
        return ("pv", _atom(c.var, env)), c
    raise TypeError(f"unexpected component {c!r}")


def canonicalize(p: Process) -> tuple[tuple, Process]:
    """Return ``(key, representative)`` for the congruence class of ``p``."""
    return _best(_normalise(p), {}, 0)


def canonical_form(p: Process) -> Process:
    return canonicalize(p)[1]


def congruence_key(p: Process) -> tuple:
    return canonicalize(p)[0]


def congruent(p: Process, q: Process) -> bool:
    return congruence_key(p) == congruence_key(q)


def decompose(p: Process) -> tuple[list[tuple[Name, State]], list[Process]]:
    """Split a canonical process into its top-level scopes and components."""
    scopes = []
    while isinstance(p, Scope):
        scopes.append((p.name, p.state))
        p = p.body
    comps = [] if isinstance(p, Nil) else _flat(p)
    return scopes, comps


def _flat(p: Process) -> list[Process]:
    if isinstance(p, Par):
        return _flat(p.left) + _flat(p.right)
    return [p]


def compose(scopes, comps) -> Process:
    proc = par(*comps) if comps else NIL
    for n, s in reversed(list(scopes)):
        proc = Scope(n, s, proc)
    return proc


def drop_dead_scopes(p: Process) -> Process:
    """Remove top-level deallocated scopes whose name no longer occurs.

    Used only for state deduplication: such scopes enable no reduction.
    """
    scopes, comps = decompose(p)
    live = set()
    for c in comps:
        live |= free_ids(c)
    kept = [(n, s) for n, s in scopes if s is State.ALLOC or n in live]
    return compose(kept, comps)


def config_key(c: Configuration, gc: bool = False) -> tuple:
    proc = c.process
    if gc:
        proc = drop_dead_scopes(canonical_form(proc))
    return (c._frozen, congruence_key(proc))
