"""Single-node corruptions of typing derivations, shared by the derivation
tests and the acceptance suite."""

from __future__ import annotations

import random
from pathlib import Path

from pir.checker import check_config
from pir.derivation import Derivation, Judgment
from pir.parser import parse, parse_process
from pir.syntax import NIL

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_derivations():
    out = []
    for path in sorted(CORPUS.glob("*.pir")):
        sf = parse(path.read_text())
        d = check_config(sf.env(), sf.configuration())
        if d:
            out.append(d)
    return out


def _replace_at(d: Derivation, path: tuple, fn) -> Derivation:
    if not path:
        return fn(d)
    i = path[0]
    prem = list(d.premises)
    prem[i] = _replace_at(prem[i], path[1:], fn)
    return Derivation(d.rule, d.conclusion, tuple(prem), d.data)


def _paths(d: Derivation, prefix=()):
    yield prefix, d
    for i, p in enumerate(d.premises):
        yield from _paths(p, prefix + (i,))


def mutate(d: Derivation, rng: random.Random) -> tuple[str, Derivation]:
    """One single-node corruption: rule rename, process swap, assumption drop
    or duplication.  Returns (description, mutated derivation)."""
    nodes = list(_paths(d))
    while True:
        path, node = rng.choice(nodes)
        kind = rng.choice(["rule", "proc", "drop", "dup"])
        j = node.conclusion
        if kind == "rule":
            others = ["tIn", "tOut", "tPar", "tNil", "tCon", "tSub", "tWeak", "tFree", "tAll", "tRec"]
            rule = rng.choice([r for r in others if r != node.rule])
            return f"rename {node.rule}->{rule} at {path}", _replace_at(d, path, lambda n: Derivation(rule, n.conclusion, n.premises))
        elif kind == "proc":
            other = rng.choice([n for _, n in nodes]).conclusion.process
            if other == j.process:
                other = parse_process("c!().nil") if j.process == NIL else NIL
            return f"process at {path}", _replace_at(d, path, lambda n: Derivation(n.rule, Judgment(n.conclusion.env, other), n.premises))
        else:
            entries = j.env.entries()
            if not entries:
                continue
            e = rng.choice(entries)
            env = j.env.remove(*e) if kind == "drop" else j.env.add(*e)
            return f"{kind} {e[0]} at {path}", _replace_at(d, path, lambda n: Derivation(n.rule, Judgment(env, n.conclusion.process), n.premises))
