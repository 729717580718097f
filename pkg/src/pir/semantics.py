"""Reduction semantics over closed configurations.

Reductions are enumerated on the canonical form of the process: top-level
scopes followed by a multiset of prefix components.  Evaluation contexts
only traverse parallel composition and scoping, so every redex is either a
single component or a pair of components.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from pir.congruence import (
    canonicalize,
    compose,
    config_key,
    decompose,
)
from pir.syntax import (
    Alloc,
    Configuration,
    Free,
    Input,
    Match,
    Name,
    Output,
    Process,
    Rec,
    Scope,
    State,
    alpha_key,
    all_names,
    fresh_text,
    is_closed,
    subst_names,
    subst_procvar,
)

RULES = ("rCom", "rRec", "rThen", "rElse", "rAll", "rFree")


@dataclass(frozen=True)
class StepLabel:
    rule: str
    locus: tuple[int, ...]
    subject: str
    fresh: str | None = None

    def __str__(self) -> str:
        s = f"{self.rule}  subject={self.subject}"
        return s + (f"  fresh={self.fresh}" if self.fresh else "")


@dataclass(frozen=True)
class ErrorWitness:
    rule: str  # eAty, eOut or eIn
    channel: str
    arities: tuple[int, int] | None = None

    def __str__(self) -> str:
        if self.arities:
            return f"{self.rule}({self.channel}, {self.arities[0]}, {self.arities[1]})"
        return f"{self.rule}({self.channel})"


def canonical_config(c: Configuration) -> Configuration:
    return Configuration(c.store, canonicalize(c.process)[1])


def _require_closed(c: Configuration) -> None:
    if not c.closed:
        raise ValueError("reduction is defined on closed configurations only")


def _redexes(c: Configuration):
    """Canonical scopes and components plus the effective state of each name."""
    scopes, comps = decompose(canonicalize(c.process)[1])
    state = dict(c.store)
    for n, s in scopes:
        state[n] = s
    return scopes, comps, state


def successors(c: Configuration) -> list[tuple[StepLabel, Configuration]]:
    """All one-step reducts of ``c``, each in canonical form."""
    _require_closed(c)
    scopes, comps, state = _redexes(c)
    out: list[tuple[StepLabel, Configuration]] = []

    def emit(label, new_comps, new_scopes=scopes, store=c.store):
        proc = canonicalize(compose(new_scopes, new_comps))[1]
        out.append((label, Configuration(store, proc)))

    for i, p in enumerate(comps):
        rest = comps[:i] + comps[i + 1:]
        if isinstance(p, Output) and state.get(p.subject) is State.ALLOC:
            for j, q in enumerate(comps):
                if j == i or not isinstance(q, Input) or q.subject != p.subject:
                    continue
                if len(q.params) != len(p.objects):
                    continue
                reduct = subst_names(q.cont, zip(q.params, p.objects))
                others = [r for k, r in enumerate(comps) if k not in (i, j)]
                emit(StepLabel("rCom", (i, j), p.subject.text), others + [p.cont, reduct])
        elif isinstance(p, Rec):
            emit(StepLabel("rRec", (i,), p.binder.text), rest + [subst_procvar(p.body, p.binder, p)])
        elif isinstance(p, Match):
            if p.left == p.right:
                emit(StepLabel("rThen", (i,), p.left.text), rest + [p.then])
            else:
                emit(StepLabel("rElse", (i,), p.left.text), rest + [p.else_])
        elif isinstance(p, Alloc):
            # chosen from the canonical form so labels replay on any congruent input
            used = {n.text for n in c.store} | {n.text for n, _ in scopes}
            used |= {n.text for q in comps for n in all_names(q)}
            fresh = Name(fresh_text("c", used))
            body = subst_names(p.body, [(p.var, fresh)])
            emit(StepLabel("rAll", (i,), p.var.text, fresh.text), rest + [Scope(fresh, State.ALLOC, body)])
        elif isinstance(p, Free) and state.get(p.subject) is State.ALLOC:
            n = p.subject
            if n in c.store and n not in dict(scopes):
                store = {**c.store, n: State.DEALLOC}
                emit(StepLabel("rFree", (i,), n.text), rest + [p.cont], store=store)
            else:
                new_scopes = [(m, State.DEALLOC if m == n else s) for m, s in scopes]
                emit(StepLabel("rFree", (i,), n.text), rest + [p.cont], new_scopes)
    return out


def error_witnesses(c: Configuration) -> list[ErrorWitness]:
    """Error redexes of ``c``: arity mismatches and use of deallocated channels."""
    _require_closed(c)
    _, comps, state = _redexes(c)
    found: list[ErrorWitness] = []
    for i, p in enumerate(comps):
        if isinstance(p, Output):
            if state.get(p.subject) is State.DEALLOC:
                found.append(ErrorWitness("eOut", p.subject.text))
            for j, q in enumerate(comps):
                if j != i and isinstance(q, Input) and q.subject == p.subject and len(q.params) != len(p.objects):
                    found.append(ErrorWitness("eAty", p.subject.text, (len(p.objects), len(q.params))))
        elif isinstance(p, Input) and state.get(p.subject) is State.DEALLOC:
            found.append(ErrorWitness("eIn", p.subject.text))
    return found


def is_terminated(c: Configuration) -> bool:
    return not successors(c) and not error_witnesses(c)


def state_hash(c: Configuration) -> str:
    return hashlib.sha256(repr(config_key(c)).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Scheduled execution
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    trace: list[StepLabel]
    final: Configuration
    halt: str  # 'terminated', 'error' or 'budget'
    witnesses: list[ErrorWitness] = field(default_factory=list)
    hashes: list[str] = field(default_factory=list)


def run(c: Configuration, seed: int | None = 0, max_steps: int = 1000) -> RunResult:
    """Execute with a uniformly random scheduler driven by ``seed``."""
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    _require_closed(c)
    rng = random.Random(seed)
    cur = canonical_config(c)
    trace: list[StepLabel] = []
    hashes: list[str] = []
    while True:
        witnesses = error_witnesses(cur)
        if witnesses:
            return RunResult(trace, cur, "error", witnesses, hashes)
        succ = successors(cur)
        if not succ:
            return RunResult(trace, cur, "terminated", [], hashes)
        if len(trace) >= max_steps:
            return RunResult(trace, cur, "budget", [], hashes)
        label, cur = rng.choice(succ)
        trace.append(label)
        hashes.append(state_hash(cur))


def replay(c: Configuration, labels: Iterable[StepLabel]) -> Configuration:
    """Follow a recorded schedule; raises ValueError when a step is not enabled."""
    cur = canonical_config(c)
    for n, label in enumerate(labels, 1):
        for lab, nxt in successors(cur):
            if lab == label:
                cur = nxt
                break
        else:
            raise ValueError(f"step {n} ({label}) is not enabled")
    return cur


def format_trace(result: RunResult) -> str:
    lines = [f"step{n}  {label}" for n, label in enumerate(result.trace, 1)]
    halt = result.halt
    if result.witnesses:
        halt += "  " + " ".join(str(w) for w in result.witnesses)
    lines.append(f"HALT {halt}")
    return "\n".join(lines)


def format_trace_json(result: RunResult) -> str:
    records = []
    for n, (label, h) in enumerate(zip(result.trace, result.hashes), 1):
        records.append(json.dumps({
            "step": n, "rule": label.rule, "subject": label.subject,
            "fresh": label.fresh, "locus": list(label.locus), "state": h,
        }))
    records.append(json.dumps({"halt": result.halt, "witnesses": [str(w) for w in result.witnesses]}))
    return "\n".join(records)


# ---------------------------------------------------------------------------
# Bounded exploration
# ---------------------------------------------------------------------------


@dataclass
class ErrorTrace:
    steps: list[StepLabel]
    witnesses: list[ErrorWitness]
    config: Configuration


@dataclass
class ExploreReport:
    states: int
    truncated: bool
    errors: list[ErrorTrace]
    stuck: int
    bounds: dict[str, int]

    def summary(self) -> str:
        lines = [
            f"states     {self.states}",
            f"stuck      {self.stuck}",
            f"errors     {len(self.errors)}",
            f"truncated  {'yes' if self.truncated else 'no'}",
            "bounds     " + " ".join(f"{k}={v}" for k, v in self.bounds.items()),
        ]
        for k, err in enumerate(self.errors, 1):
            lines.append(f"error trace {k}: " + " ".join(str(w) for w in err.witnesses))
            for n, label in enumerate(err.steps, 1):
                lines.append(f"  step{n}  {label}  locus={','.join(map(str, label.locus))}")
        return "\n".join(lines)


def explore(c: Configuration, max_depth: int = 20, max_unfoldings: int = 2, max_states: int = 100_000) -> ExploreReport:
    """Breadth-first search of the reachable canonical configurations.

    Unfoldings are counted per recursion site (the recursive term up to
    alpha-equivalence) along each path.  Deallocated scopes whose name no
    longer occurs are dropped when deduplicating states.
    """
    _require_closed(c)
    start = canonical_config(c)
    bounds = {"depth": max_depth, "unfold": max_unfoldings, "max_states": max_states}
    seen = {(config_key(start, gc=True), ())}
    queue = deque([(start, 0, (), ())])  # config, depth, unfold counts, path
    states = 1
    truncated = False
    stuck = 0
    errors: list[ErrorTrace] = []
    error_keys: set = set()
    while queue:
        cur, depth, unfolds, path = queue.popleft()
        witnesses = error_witnesses(cur)
        if witnesses:
            key = config_key(cur, gc=True)
            if key not in error_keys:
                error_keys.add(key)
                errors.append(ErrorTrace(list(path), witnesses, cur))
        succ = successors(cur)
        if not succ:
            if not witnesses:
                stuck += 1
            continue
        if depth >= max_depth:
            truncated = True
            continue
        counts = dict(unfolds)
        comps = decompose(cur.process)[1]
        for label, nxt in succ:
            new_unfolds = unfolds
            if label.rule == "rRec":
                site = alpha_key(comps[label.locus[0]])
                if counts.get(site, 0) >= max_unfoldings:
                    truncated = True
                    continue
                bumped = dict(counts)
                bumped[site] = bumped.get(site, 0) + 1
                new_unfolds = tuple(sorted(bumped.items(), key=repr))
            key = (config_key(nxt, gc=True), new_unfolds)
            if key in seen:
                continue
            if states >= max_states:
                truncated = True
                continue
            seen.add(key)
            states += 1
            queue.append((nxt, depth + 1, new_unfolds, path + (label,)))
    return ExploreReport(states, truncated, errors, stuck, bounds)
