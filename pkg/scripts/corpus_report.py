#!/usr/bin/env python3
"""Typecheck, explore and probe every corpus file; print one table row each.

    python scripts/corpus_report.py [--corpus DIR] [--depth 20] [--unfold 2]
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from pir.checker import check_config, subject_reduction_probe, verdict
from pir.config import CheckConfig, ExploreConfig, ProbeConfig
from pir.derivation import Derivation, validate
from pir.parser import parse
from pir.semantics import explore

ROOT = Path(__file__).resolve().parent.parent


def report(path: Path, check: CheckConfig, expl: ExploreConfig, probe: ProbeConfig) -> str:
    sf = parse(path.read_text(encoding="utf-8"))
    env, c = sf.env(), sf.configuration()
    t0 = time.perf_counter()
    result = check_config(env, c, check.max_index, check.budget)
    row = [f"{path.stem:22}", f"{verdict(result):12}"]
    if isinstance(result, Derivation):
        row.append(f"nodes={result.size():<4} valid={'yes' if validate(result) else 'NO '}")
    else:
        row.append(" " * 19)
    ex = explore(c, expl.depth, expl.unfold, expl.max_states)
    row.append(f"states={ex.states:<6} errors={len(ex.errors):<2} trunc={'y' if ex.truncated else 'n'}")
    if isinstance(result, Derivation):
        pr = subject_reduction_probe(env, c, probe.depth, probe.max_states, probe.budget)
        row.append(f"probe: typed {pr.typed}/{pr.states} falsified {len(pr.falsifications)}")
    row.append(f"{time.perf_counter() - t0:6.2f}s")
    return "  ".join(row)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", type=Path, default=ROOT / "corpus")
    ap.add_argument("--depth", type=int, default=ExploreConfig.depth)
    ap.add_argument("--unfold", type=int, default=ExploreConfig.unfold)
    ap.add_argument("--max-states", type=int, default=ExploreConfig.max_states)
    args = ap.parse_args()
    expl = ExploreConfig(args.depth, args.unfold, args.max_states)
    probe = ProbeConfig(depth=args.depth, max_states=args.max_states)
    for path in sorted(args.corpus.glob("*.pir")):
        print(report(path, CheckConfig(), expl, probe))


if __name__ == "__main__":
    main()
