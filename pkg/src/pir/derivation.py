"""Typing derivations, their text format, and a rule-by-rule validator.

The validator does not trust the rule data stored on nodes: every node is
checked by searching for an instance of its declarative rule that relates
the node's conclusion to its premises' conclusions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from pir.parser import ParseError, parse_judgment, pretty
from pir.syntax import (
    Alloc,
    Free,
    Input,
    Match,
    Nil,
    Output,
    Par,
    Process,
    ProcVar,
    PVarRef,
    Rec,
    Scope,
    State,
    Var,
    identifiers,
)
from pir.typesys import (
    CONSUMED,
    PROC,
    UNDEFINED,
    Chan,
    ProcType,
    TypeEnv,
    Unique,
    Unrestricted,
    decrement,
    split,
    subtype,
)

LOGICAL = ("tIn", "tOut", "tPar", "tIf", "tRec", "tVar", "tAll", "tFree", "tNil", "tRst1", "tRst2")
STRUCTURAL = ("tCon", "tWeak", "tSub", "tRev")
RULES = LOGICAL + STRUCTURAL


@dataclass(frozen=True)
class Judgment:
    env: TypeEnv
    process: Process

    def __str__(self) -> str:
        return f"{self.env} |- {pretty(self.process)}"


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Judgment
    premises: tuple["Derivation", ...] = ()
    data: dict = field(default_factory=dict, compare=False, hash=False)

    def nodes(self) -> Iterator["Derivation"]:
        yield self
        for p in self.premises:
            yield from p.nodes()

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def height(self) -> int:
        return 1 + max((p.height() for p in self.premises), default=0)


@dataclass
class Validation:
    ok: bool
    node: Derivation | None = None
    path: tuple[int, ...] = ()
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        where = "/".join(map(str, self.path)) or "root"
        return f"invalid at {where} ({self.node.rule}): {self.message}\n  node: {self.node.conclusion}"


class _Fail(Exception):
    pass


def _need(cond: bool, message: str) -> None:
    if not cond:
        raise _Fail(message)


def _premises(d: Derivation, n: int) -> tuple[Judgment, ...]:
    _need(len(d.premises) == n, f"expected {n} premise(s), found {len(d.premises)}")
    return tuple(p.conclusion for p in d.premises)


def _diff(expected: TypeEnv, actual: TypeEnv) -> str:
    return f"expected env {{{expected}}}, found {{{actual}}}"


def _env_ids(env: TypeEnv) -> set[str]:
    return {u.text for u in env.identifiers()}


def _same_process(d: Derivation, prem: Judgment) -> None:
    _need(prem.process == d.conclusion.process, "structural rule must keep the process unchanged")


def _check_node(d: Derivation) -> None:
    rule = d.rule
    env, proc = d.conclusion.env, d.conclusion.process
    _need(rule in RULES, f"unknown rule {rule!r}")

    if rule == "tNil":
        _premises(d, 0)
        _need(isinstance(proc, Nil), "tNil types nil only")
        _need(len(env) == 0, _diff(TypeEnv(), env))
    elif rule == "tVar":
        _premises(d, 0)
        _need(isinstance(proc, PVarRef), "tVar types a process variable")
        _need(env == TypeEnv.of((proc.var, PROC)), _diff(TypeEnv.of((proc.var, PROC)), env))
    elif rule == "tPar":
        p1, p2 = _premises(d, 2)
        _need(isinstance(proc, Par), "tPar types a parallel composition")
        _need(p1.process == proc.left and p2.process == proc.right, "premise processes must be the two components")
        _need(p1.env + p2.env == env, _diff(p1.env + p2.env, env))
    elif rule == "tIf":
        p1, p2 = _premises(d, 2)
        _need(isinstance(proc, Match), "tIf types a match")
        _need(p1.process == proc.then and p2.process == proc.else_, "premise processes must be the branches")
        for u in (proc.left, proc.right):
            _need(any(isinstance(t, Chan) for t in env.types_of(u)), f"no channel assumption for {u}")
        _need(p1.env == env and p2.env == env, "branches must be typed under the conclusion environment")
    elif rule == "tRec":
        (p1,) = _premises(d, 1)
        _need(isinstance(proc, Rec), "tRec types a recursion")
        _need(p1.process == proc.body, "premise process must be the body")
        for u, t in env:
            _need(isinstance(t, ProcType) or isinstance(t.attr, Unrestricted), f"assumption {u} : {t} is not unrestricted")
        _need(proc.binder.text not in _env_ids(env), f"bound {proc.binder} is not fresh")
        _need(p1.env == env.add(proc.binder, PROC), _diff(env.add(proc.binder, PROC), p1.env))
    elif rule == "tAll":
        (p1,) = _premises(d, 1)
        _need(isinstance(proc, Alloc), "tAll types an allocation")
        _need(p1.process == proc.body, "premise process must be the body")
        _need(proc.var.text not in _env_ids(env), f"bound {proc.var} is not fresh")
        extra = p1.env.minus(env)
        _need(extra is not None and len(extra) == 1, _diff(env, p1.env))
        ((u, t),) = extra.entries()
        _need(u == proc.var and isinstance(t, Chan) and t.attr == Unique(0), f"allocated {u} must be unique now, found {t}")
    elif rule == "tFree":
        (p1,) = _premises(d, 1)
        _need(isinstance(proc, Free), "tFree types a deallocation")
        _need(p1.process == proc.cont, "premise process must be the continuation")
        extra = env.minus(p1.env)
        _need(extra is not None and len(extra) == 1, _diff(p1.env, env))
        ((u, t),) = extra.entries()
        _need(u == proc.subject and isinstance(t, Chan) and t.attr == Unique(0), f"freed {proc.subject} must be unique now")
    elif rule in ("tRst1", "tRst2"):
        (p1,) = _premises(d, 1)
        _need(isinstance(proc, Scope), f"{rule} types a scope")
        _need(p1.process == proc.body, "premise process must be the body")
        _need(proc.name.text not in _env_ids(env), f"bound {proc.name} is not fresh")
        if rule == "tRst2":
            _need(proc.state is State.DEALLOC, "tRst2 needs a deallocated scope")
            _need(p1.env == env, _diff(env, p1.env))
        else:
            _need(proc.state is State.ALLOC, "tRst1 needs an allocated scope")
            extra = p1.env.minus(env)
            _need(extra is not None and len(extra) == 1, _diff(env, p1.env))
            ((u, t),) = extra.entries()
            _need(u == proc.name and isinstance(t, Chan), f"scope assumption must be a channel for {proc.name}")
    elif rule == "tOut":
        (p1,) = _premises(d, 1)
        _need(isinstance(proc, Output), "tOut types an output")
        _need(p1.process == proc.cont, "premise process must be the continuation")
        _need(_match_out(env, p1.env, proc), "no instance of tOut relates the environments")
    elif rule == "tIn":
        (p1,) = _premises(d, 1)
        _need(isinstance(proc, Input), "tIn types an input")
        _need(p1.process == proc.cont, "premise process must be the continuation")
        for x in proc.params:
            _need(x.text not in _env_ids(env), f"bound {x} is not fresh")
        _need(_match_in(env, p1.env, proc), "no instance of tIn relates the environments")
    else:
        (p1,) = _premises(d, 1)
        _same_process(d, p1)
        _need(_match_structural(rule, env, p1.env), f"no instance of {rule} relates the environments")


def _with_dec(env: TypeEnv, u, t: Chan) -> TypeEnv | None:
    dec = decrement(t)
    if dec is UNDEFINED:
        return None
    return env if dec is CONSUMED else env.add(u, dec)


def _match_out(concl: TypeEnv, prem: TypeEnv, proc: Output) -> bool:
    for t in set(concl.types_of(proc.subject)):
        if not isinstance(t, Chan) or len(t.objects) != len(proc.objects):
            continue
        rest = concl.remove(proc.subject, t)
        ok = True
        for v, tv in zip(proc.objects, t.objects):
            if (v, tv) not in rest:
                ok = False
                break
            rest = rest.remove(v, tv)
        if not ok:
            continue
        expect = _with_dec(rest, proc.subject, t)
        if expect is not None and expect == prem:
            return True
    return False


def _match_in(concl: TypeEnv, prem: TypeEnv, proc: Input) -> bool:
    for t in set(concl.types_of(proc.subject)):
        if not isinstance(t, Chan) or len(t.objects) != len(proc.params):
            continue
        expect = _with_dec(concl.remove(proc.subject, t), proc.subject, t)
        if expect is None:
            continue
        for x, tx in zip(proc.params, t.objects):
            expect = expect.add(x, tx)
        if expect == prem:
            return True
    return False


def _match_structural(rule: str, concl: TypeEnv, prem: TypeEnv) -> bool:
    if rule == "tWeak":
        extra = concl.minus(prem)
        return extra is not None and len(extra) == 1
    for u, t in set(concl):
        rest = concl.remove(u, t)
        if rule == "tCon":
            for t1, t2 in split(t):
                if rest.add(u, t1).add(u, t2) == prem:
                    return True
        elif rule == "tSub":
            for u2, t2 in set(prem):
                if u2 == u and subtype(t, t2) and rest.add(u, t2) == prem:
                    return True
        elif rule == "tRev":
            if not (isinstance(t, Chan) and t.attr == Unique(0)):
                continue
            for u2, t2 in set(prem):
                if u2 == u and isinstance(t2, Chan) and t2.attr == Unique(0) and rest.add(u, t2) == prem:
                    return True
    return False


def validate(d: Derivation) -> Validation:
    """Check every node against its rule; report the first failing node (pre-order)."""
    stack = [(d, ())]
    while stack:
        node, path = stack.pop()
        try:
            _check_node(node)
        except _Fail as exc:
            return Validation(False, node, path, str(exc))
        for i in reversed(range(len(node.premises))):
            stack.append((node.premises[i], path + (i,)))
    return Validation(True)


# ---------------------------------------------------------------------------
# Text format: one node per line, "<indent><rule> [<vars>] <env> |- <process>"
# ---------------------------------------------------------------------------


def _vars_of(j: Judgment) -> list[str]:
    names = {u.text for u, _ in j.env if isinstance(u, Var)}
    names |= {u.text for u in identifiers(j.process) if isinstance(u, Var)}
    return sorted(names)


def serialize(d: Derivation) -> str:
    lines = []

    def emit(node: Derivation, depth: int) -> None:
        vs = ", ".join(_vars_of(node.conclusion))
        lines.append(f"{'  ' * depth}{node.rule} [{vs}] {node.conclusion}")
        for p in node.premises:
            emit(p, depth + 1)

    emit(d, 0)
    return "\n".join(lines) + "\n"


class DerivationFormatError(ValueError):
    pass


def deserialize(text: str) -> Derivation:
    """Parse the text format back into a derivation tree."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip(" "))
        if indent % 2:
            raise DerivationFormatError(f"line {lineno}: odd indentation")
        body = raw.strip()
        rule, _, rest = body.partition(" ")
        rest = rest.strip()
        if not rest.startswith("[") or "]" not in rest:
            raise DerivationFormatError(f"line {lineno}: missing variable list")
        vs_text, _, judgment = rest[1:].partition("]")
        vs = [v.strip() for v in vs_text.split(",") if v.strip()]
        try:
            env, proc = parse_judgment(judgment, vs)
        except ParseError as exc:
            raise DerivationFormatError(f"line {lineno}: {exc}") from exc
        rows.append((indent // 2, rule, Judgment(env, proc), lineno))
    if not rows:
        raise DerivationFormatError("empty derivation")

    pos = 0

    def build(depth: int) -> Derivation:
        nonlocal pos
        d_, rule, judgment, lineno = rows[pos]
        if d_ != depth:
            raise DerivationFormatError(f"line {lineno}: unexpected indentation")
        pos += 1
        premises = []
        while pos < len(rows) and rows[pos][0] > depth:
            premises.append(build(depth + 1))
        return Derivation(rule, judgment, tuple(premises))

    root = build(0)
    if pos != len(rows):
        raise DerivationFormatError(f"line {rows[pos][3]}: more than one root")
    return root
