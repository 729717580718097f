from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from pir.checker import Inconclusive, NotTypable, check_config, infer, subject_reduction_probe, verdict
from pir.derivation import Derivation, validate
from pir.parser import parse, parse_env, parse_process
from pir.semantics import explore, successors
from pir.syntax import Configuration, Name, State, alpha_eq, free_names
from pir.typesys import AFF, UNR, Chan, TypeEnv, Unique
from strategies import processes

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

ACCEPTED = [
    "nil", "alloc_free", "client0_system", "client1_system", "client2_system", "client3",
    "client3_system", "heap_system", "client4_system", "infheap", "consistency_example", "leak",
]
REJECTED = ["client_err_system", "client2_unsafe", "client3_unsafe"]


def load(name):
    sf = parse((CORPUS / f"{name}.pir").read_text())
    return sf.env(), sf.configuration()


def check(env_text, proc_text, **kw):
    return infer(parse_env(env_text), parse_process(proc_text), **kw)


@pytest.mark.parametrize("name", ACCEPTED)
def test_accepted(name):
    env, c = load(name)
    d = check_config(env, c)
    assert isinstance(d, Derivation), str(d)
    assert validate(d).ok
    assert d.conclusion.env == env
    assert alpha_eq(d.conclusion.process, c.process)


@pytest.mark.parametrize("name", REJECTED)
def test_rejected(name):
    env, c = load(name)
    r = check_config(env, c)
    assert isinstance(r, NotTypable), str(r)
    assert verdict(r) == "REJECTED"


class TestSmall:
    def test_send_unique_then_free_on_receipt(self):
        assert check("c : ch(ch()@unq(0))@unr, d : ch()@unq(0)", "c!(d).nil | c?(x).free x.nil")

    def test_free_needs_uniqueness(self):
        assert not check("c : ch()@unr", "free c.nil")

    def test_use_after_free_rejected(self):
        assert not check("c : ch()@unq(0)", "free c. c!().nil")

    def test_alloc_free_fresh(self):
        assert check("", "alloc x. free x.nil")

    def test_strong_update_after_alloc(self):
        # the fresh channel carries a name first and nothing afterwards
        assert check("d : ch()@unr", "alloc x. (x!(d).nil | x?(y).(x!().nil | x?().free x.nil))")

    def test_concurrent_uses_at_two_arities_rejected(self):
        assert not check("d : ch()@unr", "alloc x. (x!(d).nil | x?(y).x!().nil | x?().free x.nil)")

    def test_arity_mismatch_rejected(self):
        assert not check("c : ch(ch()@unr)@unr, d : ch()@unr", "c!().nil | c?(x).nil")

    def test_affine_used_twice_rejected(self):
        assert not check("c : ch()@aff", "c!().c!().nil")

    def test_affine_under_rec_rejected(self):
        r = check("c : ch()@aff", "rec X. c!().X")
        assert isinstance(r, NotTypable)

    def test_unrestricted_under_rec(self):
        assert check("c : ch()@unr", "rec X. c!().X")

    def test_match_requires_channel_assumptions(self):
        assert check("c : ch()@unr, d : ch()@unr", "if c = d then c!().nil else d!().nil")

    def test_missing_assumption(self):
        r = check("", "c!().nil")
        assert isinstance(r, NotTypable) and "c" in r.reason

    def test_failing_judgment_is_reported(self):
        r = check("c : ch()@aff", "c!().c!().nil")
        assert r.judgment is not None and r.rule is not None


class TestConfigErrors:
    def test_open(self):
        r = check_config(TypeEnv(), Configuration({}, parse_process("x!().nil", ["x"])))
        assert "not closed" in r.reason

    def test_not_partial_map(self):
        env = parse_env("c : ch()@aff, c : ch()@aff")
        r = check_config(env, Configuration({Name("c"): State.ALLOC}, parse_process("nil")))
        assert "partial map" in r.reason

    def test_deallocated_channel_in_env(self):
        env = parse_env("c : ch()@unr")
        r = check_config(env, Configuration({Name("c"): State.DEALLOC}, parse_process("nil")))
        assert "not allocated" in r.reason


class TestBounds:
    def test_budget_gives_inconclusive(self):
        env, c = load("heap_system")
        r = check_config(env, c, budget=5)
        assert isinstance(r, Inconclusive) and verdict(r) == "INCONCLUSIVE"

    def test_index_cap_gives_inconclusive(self):
        env, c = load("client2_system")
        r = check_config(env, c, max_index=0)
        assert isinstance(r, Inconclusive)

    def test_generous_cap_still_accepts(self):
        env, c = load("client2_system")
        assert check_config(env, c, max_index=6)


class TestProbe:
    def test_alloc_free(self):
        env, c = load("alloc_free")
        rep = subject_reduction_probe(env, c, depth=3)
        assert rep.ok and rep.states == 3 and rep.typed == 3 and not rep.truncated

    def test_client2_system(self):
        env, c = load("client2_system")
        rep = subject_reduction_probe(env, c, depth=20)
        assert rep.ok and rep.inconclusive == []

    def test_consistency_example_after_communication(self):
        env, c = load("consistency_example")
        rep = subject_reduction_probe(env, c, depth=4)
        assert rep.ok and rep.typed == rep.states

    def test_untypable_start(self):
        env, c = load("client_err_system")
        with pytest.raises(ValueError):
            subject_reduction_probe(env, c)


# ---------------------------------------------------------------------------
# Randomized soundness
# ---------------------------------------------------------------------------

TYPES = [
    Chan((), UNR),
    Chan((), AFF),
    Chan((), Unique(0)),
    Chan((Chan((), UNR),), UNR),
    Chan((Chan((), Unique(0)),), UNR),
    Chan((Chan((), AFF),), UNR),
]


@st.composite
def typed_configurations(draw):
    p = draw(processes(max_prefixes=5))
    names = sorted(free_names(p), key=lambda n: n.text)
    env = TypeEnv((n, draw(st.sampled_from(TYPES))) for n in names)
    return env, Configuration({n: State.ALLOC for n in names}, p)


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(typed_configurations())
def test_random_derivations_validate_and_conclude_the_input(ec):
    env, c = ec
    r = check_config(env, c, budget=5_000)
    if isinstance(r, Derivation):
        assert validate(r).ok
        assert r.conclusion.env == env
        assert alpha_eq(r.conclusion.process, c.process)


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(typed_configurations())
def test_random_accepted_configurations_are_safe(ec):
    env, c = ec
    r = check_config(env, c, budget=5_000)
    if isinstance(r, Derivation):
        rep = explore(c, max_depth=12, max_unfoldings=1, max_states=3_000)
        assert rep.errors == [], rep.summary()


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(typed_configurations())
def test_random_accepted_configurations_preserve_types(ec):
    env, c = ec
    r = check_config(env, c, budget=5_000)
    if isinstance(r, Derivation) and successors(c):
        rep = subject_reduction_probe(env, c, depth=4, max_states=200, budget=5_000)
        assert rep.falsifications == []
