"""Abstract syntax of the calculus: identifiers, processes, configurations.

Binding is named.  Bound identifiers are renamed on demand, using a
deterministic fresh-name supply (base text plus the smallest unused numeric
suffix), so substitution is capture-avoiding and traces are reproducible.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Union


@dataclass(frozen=True, order=True)
class Name:
    """A runtime channel."""

    text: str

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True, order=True)
class Var:
    """A term variable, bound by input or allocation."""

    text: str

    def __str__(self) -> str:
        return self.text


Identifier = Union[Name, Var]


@dataclass(frozen=True, order=True)
class ProcVar:
    text: str

    def __str__(self) -> str:
        return self.text


class State(Enum):
    ALLOC = "alloc"
    DEALLOC = "dealloc"

    @property
    def symbol(self) -> str:
        return "⊤" if self is State.ALLOC else "⊥"

    def __str__(self) -> str:
        return self.value


class Process:
    """Base class of process terms.  Subclasses are immutable."""

    __slots__ = ()

    def __str__(self) -> str:
        from pir.parser import pretty

        return pretty(self)


@dataclass(frozen=True)
class Nil(Process):
    pass


@dataclass(frozen=True)
class Output(Process):
    subject: Identifier
    objects: tuple[Identifier, ...]
    cont: Process


@dataclass(frozen=True)
class Input(Process):
    subject: Identifier
    params: tuple[Var, ...]
    cont: Process

    def __post_init__(self) -> None:
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"input parameters must be distinct: {self.params}")


@dataclass(frozen=True)
class Match(Process):
    left: Identifier
    right: Identifier
    then: Process
    else_: Process


@dataclass(frozen=True)
class Rec(Process):
    binder: ProcVar
    body: Process


@dataclass(frozen=True)
class PVarRef(Process):
    var: ProcVar


@dataclass(frozen=True)
class Par(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Scope(Process):
    name: Name
    state: State
    body: Process


@dataclass(frozen=True)
class Alloc(Process):
    var: Var
    body: Process


@dataclass(frozen=True)
class Free(Process):
    subject: Identifier
    cont: Process


NIL = Nil()


def par(*procs: Process) -> Process:
    """Left-nested parallel composition; ``par()`` is ``nil``."""
    if not procs:
        return NIL
    out = procs[0]
    for p in procs[1:]:
        out = Par(out, p)
    return out


def par_components(p: Process) -> list[Process]:
    """Operands of a (possibly nested) parallel composition."""
    if isinstance(p, Par):
        return par_components(p.left) + par_components(p.right)
    return [p]


# ---------------------------------------------------------------------------
# Free and bound identifiers
# ---------------------------------------------------------------------------


def free_ids(p: Process) -> frozenset:
    """Free Names, Vars and ProcVars of ``p``."""
    if isinstance(p, Nil):
        return frozenset()
    if isinstance(p, Output):
        return frozenset((p.subject, *p.objects)) | free_ids(p.cont)
    if isinstance(p, Input):
        return frozenset((p.subject,)) | (free_ids(p.cont) - set(p.params))
    if isinstance(p, Match):
        return frozenset((p.left, p.right)) | free_ids(p.then) | free_ids(p.else_)
    if isinstance(p, Rec):
        return free_ids(p.body) - {p.binder}
    if isinstance(p, PVarRef):
        return frozenset((p.var,))
    if isinstance(p, Par):
        return free_ids(p.left) | free_ids(p.right)
    if isinstance(p, Scope):
        return free_ids(p.body) - {p.name}
    if isinstance(p, Alloc):
        return free_ids(p.body) - {p.var}
    if isinstance(p, Free):
        return frozenset((p.subject,)) | free_ids(p.cont)
    raise TypeError(f"not a process: {p!r}")


def free_names(p: Process) -> frozenset[Name]:
    return frozenset(u for u in free_ids(p) if isinstance(u, Name))


def free_vars(p: Process) -> frozenset[Var]:
    return frozenset(u for u in free_ids(p) if isinstance(u, Var))


def free_procvars(p: Process) -> frozenset[ProcVar]:
    return frozenset(u for u in free_ids(p) if isinstance(u, ProcVar))


def is_closed(p: Process) -> bool:
    return not any(isinstance(u, (Var, ProcVar)) for u in free_ids(p))


def subterms(p: Process) -> Iterator[Process]:
    yield p
    for child in children(p):
        yield from subterms(child)


def children(p: Process) -> tuple[Process, ...]:
    if isinstance(p, (Output, Input, Free)):
        return (p.cont,)
    if isinstance(p, Match):
        return (p.then, p.else_)
    if isinstance(p, (Rec, Scope, Alloc)):
        return (p.body,)
    if isinstance(p, Par):
        return (p.left, p.right)
    return ()


def identifiers(p: Process) -> Iterator[Identifier | ProcVar]:
    """Every identifier occurrence, binders included, in syntactic order."""
    if isinstance(p, Output):
        yield p.subject
        yield from p.objects
    elif isinstance(p, Input):
        yield p.subject
        yield from p.params
    elif isinstance(p, Match):
        yield p.left
        yield p.right
    elif isinstance(p, Rec):
        yield p.binder
    elif isinstance(p, PVarRef):
        yield p.var
    elif isinstance(p, Scope):
        yield p.name
    elif isinstance(p, Alloc):
        yield p.var
    elif isinstance(p, Free):
        yield p.subject
    for child in children(p):
        yield from identifiers(child)


def all_names(p: Process) -> frozenset[Name]:
    """Names occurring anywhere in ``p``, free or bound."""
    return frozenset(u for u in identifiers(p) if isinstance(u, Name))


def all_texts(p: Process) -> set[str]:
    return {u.text for u in identifiers(p)}


def occurrences(p: Process, u: Identifier | ProcVar) -> int:
    """Number of free syntactic occurrences of ``u`` in ``p``."""
    if isinstance(p, Output):
        n = (p.subject == u) + sum(v == u for v in p.objects)
        return n + occurrences(p.cont, u)
    if isinstance(p, Input):
        n = int(p.subject == u)
        return n if u in p.params else n + occurrences(p.cont, u)
    if isinstance(p, Match):
        n = (p.left == u) + (p.right == u)
        return n + occurrences(p.then, u) + occurrences(p.else_, u)
    if isinstance(p, PVarRef):
        return int(p.var == u)
    if isinstance(p, Free):
        return int(p.subject == u) + occurrences(p.cont, u)
    if isinstance(p, Rec) and p.binder == u:
        return 0
    if isinstance(p, Scope) and p.name == u:
        return 0
    if isinstance(p, Alloc) and p.var == u:
        return 0
    return sum(occurrences(c, u) for c in children(p))


def prefix_count(p: Process) -> int:
    """Number of action prefixes (input, output, alloc, free, match, rec)."""
    own = 0 if isinstance(p, (Nil, Par, Scope, PVarRef)) else 1
    return own + sum(prefix_count(c) for c in children(p))


# ---------------------------------------------------------------------------
# Fresh names and substitution
# ---------------------------------------------------------------------------

_SUFFIX = re.compile(r"\d+$")


def fresh_text(base: str, used: Iterable[str]) -> str:
    """``base`` stripped of its numeric suffix, plus the smallest unused suffix."""
    used = set(used)
    stem = _SUFFIX.sub("", base) or base
    for k in itertools.count():
        cand = f"{stem}{k}"
        if cand not in used:
            return cand
    raise AssertionError("unreachable")


def _same_kind(u, text: str):
    return type(u)(text)


def substitute(p: Process, mapping: Mapping[Identifier, Identifier]) -> Process:
    """Simultaneous capture-avoiding substitution of identifiers for identifiers."""
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return p
    return _subst(p, mapping)


def _subst(p: Process, m: Mapping) -> Process:
    if not m:
        return p
    sub = lambda u: m.get(u, u)  # noqa: E731
    if isinstance(p, Nil) or isinstance(p, PVarRef):
        return p
    if isinstance(p, Output):
        return Output(sub(p.subject), tuple(sub(v) for v in p.objects), _subst(p.cont, m))
    if isinstance(p, Match):
        return Match(sub(p.left), sub(p.right), _subst(p.then, m), _subst(p.else_, m))
    if isinstance(p, Free):
        return Free(sub(p.subject), _subst(p.cont, m))
    if isinstance(p, Par):
        return Par(_subst(p.left, m), _subst(p.right, m))
    if isinstance(p, Rec):
        return Rec(p.binder, _subst(p.body, m))
    if isinstance(p, Input):
        params, inner = _under_binders(p.params, p.cont, m)
        return Input(sub(p.subject), params, inner)
    if isinstance(p, Alloc):
        (var,), inner = _under_binders((p.var,), p.body, m)
        return Alloc(var, inner)
    if isinstance(p, Scope):
        (name,), inner = _under_binders((p.name,), p.body, m)
        return Scope(name, p.state, inner)
    raise TypeError(f"not a process: {p!r}")


def _under_binders(binders: tuple, body: Process, m: Mapping):
    inner = {k: v for k, v in m.items() if k not in binders}
    live = free_ids(body)
    inner = {k: v for k, v in inner.items() if k in live}
    if not inner:
        return binders, body
    targets = set(inner.values())
    renamed = []
    rename: dict = {}
    used = all_texts(body) | {u.text for u in targets} | {u.text for u in inner} | {b.text for b in binders}
    for b in binders:
        if b in targets:
            nb = _same_kind(b, fresh_text(b.text, used))
            used.add(nb.text)
            rename[b] = nb
            renamed.append(nb)
        else:
            renamed.append(b)
    if rename:
        inner = {**inner, **rename}
    return tuple(renamed), _subst(body, inner)


def subst_names(p: Process, subs: Iterable[tuple[Var, Name]]) -> Process:
    """Replace free variables by names, renaming binders to avoid capture."""
    subs = list(subs)
    vars_ = [x for x, _ in subs]
    if len(set(vars_)) != len(vars_):
        raise ValueError("substituted variables must be pairwise distinct")
    return substitute(p, dict(subs))


def subst_procvar(p: Process, x: ProcVar, body: Process) -> Process:
    """Replace free occurrences of ``x`` in ``p`` by ``body``, avoiding capture."""
    if x not in free_ids(p):
        return p
    return _subst_pv(p, x, body, free_ids(body), all_texts(body) | {x.text})


def _subst_pv(p: Process, x: ProcVar, body: Process, fb: frozenset, used: set[str]) -> Process:
    if x not in free_ids(p):
        return p
    go = lambda q: _subst_pv(q, x, body, fb, used)  # noqa: E731
    if isinstance(p, PVarRef):
        return body
    if isinstance(p, Output):
        return Output(p.subject, p.objects, go(p.cont))
    if isinstance(p, Free):
        return Free(p.subject, go(p.cont))
    if isinstance(p, Match):
        return Match(p.left, p.right, go(p.then), go(p.else_))
    if isinstance(p, Par):
        return Par(go(p.left), go(p.right))
    # binders: rename those that would capture free identifiers of ``body``
    if isinstance(p, Rec):
        b, inner = _avoid(p.binder, p.body, fb, used)
        return Rec(b, go(inner))
    if isinstance(p, Input):
        params, inner = list(p.params), p.cont
        for i, b in enumerate(p.params):
            params[i], inner = _avoid(b, inner, fb, used)
        return Input(p.subject, tuple(params), go(inner))
    if isinstance(p, Alloc):
        b, inner = _avoid(p.var, p.body, fb, used)
        return Alloc(b, go(inner))
    if isinstance(p, Scope):
        b, inner = _avoid(p.name, p.body, fb, used)
        return Scope(b, p.state, go(inner))
    raise TypeError(f"not a process: {p!r}")


def _avoid(binder, inner: Process, fb: frozenset, used: set[str]):
    if binder not in fb:
        return binder, inner
    taken = used | all_texts(inner)
    nb = _same_kind(binder, fresh_text(binder.text, taken))
    used.add(nb.text)
    if isinstance(binder, ProcVar):
        return nb, subst_procvar(inner, binder, PVarRef(nb))
    return nb, substitute(inner, {binder: nb})


def rename_apart(p: Process, avoid: Iterable[str] = ()) -> Process:
    """Alpha-rename so every binder is distinct from each other and from ``avoid``
    and from the free identifiers of ``p``."""
    used = set(avoid) | {u.text for u in free_ids(p)}
    return _apart(p, used)


def _apart(p: Process, used: set[str]) -> Process:
    def fresh(b):
        if b.text not in used:
            used.add(b.text)
            return b
        nb = _same_kind(b, fresh_text(b.text, used | all_texts(p)))
        used.add(nb.text)
        return nb

    if isinstance(p, (Nil, PVarRef)):
        return p
    if isinstance(p, Output):
        return Output(p.subject, p.objects, _apart(p.cont, used))
    if isinstance(p, Free):
        return Free(p.subject, _apart(p.cont, used))
    if isinstance(p, Match):
        return Match(p.left, p.right, _apart(p.then, used), _apart(p.else_, used))
    if isinstance(p, Par):
        return Par(_apart(p.left, used), _apart(p.right, used))
    if isinstance(p, Rec):
        b = fresh(p.binder)
        body = p.body if b == p.binder else subst_procvar(p.body, p.binder, PVarRef(b))
        return Rec(b, _apart(body, used))
    if isinstance(p, Input):
        new = tuple(fresh(x) for x in p.params)
        cont = substitute(p.cont, dict(zip(p.params, new)))
        return Input(p.subject, new, _apart(cont, used))
    if isinstance(p, Alloc):
        b = fresh(p.var)
        return Alloc(b, _apart(substitute(p.body, {p.var: b}), used))
    if isinstance(p, Scope):
        b = fresh(p.name)
        return Scope(b, p.state, _apart(substitute(p.body, {p.name: b}), used))
    raise TypeError(f"not a process: {p!r}")


# ---------------------------------------------------------------------------
# Alpha equivalence
# ---------------------------------------------------------------------------


def _atom(u, env: Mapping) -> tuple:
    if u in env:
        return env[u]
    tag = "N" if isinstance(u, Name) else "V" if isinstance(u, Var) else "P"
    return (tag, u.text)


def alpha_key(p: Process, env: Mapping | None = None, depth: int = 0) -> tuple:
    """A hashable key, equal for two processes iff they are alpha-equivalent."""
    env = env or {}
    if isinstance(p, Nil):
        return ("nil",)
    if isinstance(p, Output):
        return ("out", _atom(p.subject, env), tuple(_atom(v, env) for v in p.objects), alpha_key(p.cont, env, depth))
    if isinstance(p, Input):
        inner = {**env, **{x: ("b", depth + i) for i, x in enumerate(p.params)}}
        return ("in", _atom(p.subject, env), len(p.params), alpha_key(p.cont, inner, depth + len(p.params)))
    if isinstance(p, Match):
        return ("if", _atom(p.left, env), _atom(p.right, env), alpha_key(p.then, env, depth), alpha_key(p.else_, env, depth))
    if isinstance(p, Rec):
        return ("rec", alpha_key(p.body, {**env, p.binder: ("b", depth)}, depth + 1))
    if isinstance(p, PVarRef):
        return ("pv", _atom(p.var, env))
    if isinstance(p, Par):
        return ("par", alpha_key(p.left, env, depth), alpha_key(p.right, env, depth))
    if isinstance(p, Scope):
        return ("new", p.state.value, alpha_key(p.body, {**env, p.name: ("b", depth)}, depth + 1))
    if isinstance(p, Alloc):
        return ("alloc", alpha_key(p.body, {**env, p.var: ("b", depth)}, depth + 1))
    if isinstance(p, Free):
        return ("free", _atom(p.subject, env), alpha_key(p.cont, env, depth))
    raise TypeError(f"not a process: {p!r}")


def alpha_eq(p: Process, q: Process) -> bool:
    return alpha_key(p) == alpha_key(q)


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Configuration:
    """A channel-state store paired with a process."""

    store: Mapping[Name, State]
    process: Process
    _frozen: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        store = dict(self.store)
        missing = free_names(self.process) - store.keys()
        if missing:
            raise ValueError(f"free names without a store entry: {sorted(n.text for n in missing)}")
        object.__setattr__(self, "store", store)
        object.__setattr__(self, "_frozen", tuple(sorted((n.text, s.value) for n, s in store.items())))

    @property
    def closed(self) -> bool:
        return is_closed(self.process)

    def names(self) -> frozenset[Name]:
        return frozenset(self.store) | all_names(self.process)

    def __str__(self) -> str:
        from pir.parser import pretty_config

        return pretty_config(self)
