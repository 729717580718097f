#!/usr/bin/env python3
"""Randomized soundness run: generate small typed configurations, keep the
ones the checker accepts, and look for runtime errors or untypable reducts.

    python scripts/random_soundness.py --samples 2000 --seed 0
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

from hypothesis import HealthCheck, given, seed, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from strategies import processes  # noqa: E402

from pir.checker import check_config, subject_reduction_probe, verdict  # noqa: E402
from pir.derivation import Derivation  # noqa: E402
from pir.parser import pretty  # noqa: E402
from pir.semantics import explore  # noqa: E402
from pir.syntax import Configuration, State, free_names  # noqa: E402
from pir.typesys import AFF, UNR, Chan, TypeEnv, Unique  # noqa: E402

TYPES = [
    Chan((), UNR),
    Chan((), AFF),
    Chan((), Unique(0)),
    Chan((Chan((), UNR),), UNR),
    Chan((Chan((), Unique(0)),), UNR),
    Chan((Chan((), AFF),), UNR),
]


@st.composite
def typed_configurations(draw, max_prefixes: int):
    p = draw(processes(max_prefixes=max_prefixes))
    names = sorted(free_names(p), key=lambda n: n.text)
    env = TypeEnv((n, draw(st.sampled_from(TYPES))) for n in names)
    return env, Configuration({n: State.ALLOC for n in names}, p)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-prefixes", type=int, default=5)
    ap.add_argument("--depth", type=int, default=12)
    args = ap.parse_args()
    tally = Counter()
    problems = []

    @seed(args.seed)
    @settings(max_examples=args.samples, database=None, deadline=None, suppress_health_check=list(HealthCheck))
    @given(typed_configurations(args.max_prefixes))
    def one(ec):
        env, c = ec
        r = check_config(env, c, budget=5_000)
        tally[verdict(r)] += 1
        if not isinstance(r, Derivation):
            return
        ex = explore(c, args.depth, 1, 3_000)
        pr = subject_reduction_probe(env, c, depth=4, max_states=200, budget=5_000)
        if ex.errors or pr.falsifications:
            problems.append(f"{env} |- {pretty(c.process)}")

    one()
    for line in problems:
        print(f"PROBLEM  {line}")
    print(" ".join(f"{k}={v}" for k, v in sorted(tally.items())), f"problems={len(problems)}")
    return 1 if problems else 0


if __name__ == "__main__":
    raise SystemExit(main())
