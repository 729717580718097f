"""Default bounds shared by the command line and the experiment scripts."""

from __future__ import annotations

from dataclasses import dataclass

from pir.checker import DEFAULT_BUDGET


@dataclass(frozen=True)
class CheckConfig:
    max_index: int | None = None  # None: derived from the syntax of the process
    budget: int = DEFAULT_BUDGET


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    steps: int = 1000


@dataclass(frozen=True)
class ExploreConfig:
    depth: int = 20
    unfold: int = 2
    max_states: int = 100_000


@dataclass(frozen=True)
class ProbeConfig:
    depth: int = 20
    max_states: int = 100_000
    budget: int = DEFAULT_BUDGET
