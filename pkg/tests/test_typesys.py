import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pir.syntax import Name
from pir.typesys import (
    AFF,
    CONSUMED,
    PROC,
    UNDEFINED,
    UNR,
    Chan,
    TypeEnv,
    Unique,
    attr_le,
    decrement,
    split,
    subtype,
)
from strategies import attributes, channel_types


def c(a, *objs):
    return Chan(tuple(objs), a)


class TestDecrement:
    def test_affine_is_consumed(self):
        assert decrement(c(AFF)) is CONSUMED

    def test_unrestricted_is_unchanged(self):
        assert decrement(c(UNR)) == c(UNR)

    def test_unique_counts_down(self):
        assert decrement(c(Unique(3), c(UNR))) == c(Unique(2), c(UNR))

    def test_unique_zero_undefined(self):
        assert decrement(c(Unique(0))) is UNDEFINED

    def test_proc_rejected(self):
        with pytest.raises(TypeError):
            decrement(PROC)


class TestSplit:
    def test_unrestricted_duplicates(self):
        assert split(c(UNR)) == {(c(UNR), c(UNR))}

    def test_proc_duplicates(self):
        assert split(PROC) == {(PROC, PROC)}

    def test_affine_does_not_split(self):
        assert split(c(AFF)) == frozenset()

    def test_unique_both_orders(self):
        assert split(c(Unique(2))) == {(c(AFF), c(Unique(3))), (c(Unique(3)), c(AFF))}

    @pytest.mark.parametrize("k", range(9))
    def test_unique_chain(self, k):
        """Splitting unq(i) k times along the unique part yields k affine
        copies and one unq(i+k), for every index i."""
        for i in range(4):
            pieces = [c(Unique(i))]
            for _ in range(k):
                u = next(t for t in pieces if isinstance(t.attr, Unique))
                pieces.remove(u)
                left, right = sorted(split(u), key=lambda pr: str(pr[0]))[0]
                pieces += [left, right]
            affs = [t for t in pieces if t.attr == AFF]
            uniques = [t for t in pieces if isinstance(t.attr, Unique)]
            assert len(affs) == k and uniques == [c(Unique(i + k))]

    @given(channel_types())
    def test_split_parts_keep_objects(self, t):
        for t1, t2 in split(t):
            assert t1.objects == t2.objects == t.objects


class TestSubtype:
    def test_unique_below_unrestricted(self):
        assert subtype(c(Unique(0)), c(UNR))

    def test_affine_not_below_unrestricted(self):
        assert not subtype(c(AFF), c(UNR))

    def test_chain(self):
        chain = [c(Unique(0)), c(Unique(1)), c(Unique(5)), c(UNR), c(AFF)]
        for lo, hi in itertools.combinations(chain, 2):
            assert subtype(lo, hi) and not subtype(hi, lo)

    def test_objects_invariant(self):
        assert not subtype(c(UNR, c(Unique(0))), c(UNR, c(UNR)))
        assert not subtype(c(UNR, c(UNR)), c(UNR, c(AFF)))

    def test_proc(self):
        assert subtype(PROC, PROC)
        assert not subtype(PROC, c(AFF))

    @settings(max_examples=200)
    @given(attributes, attributes, attributes)
    def test_partial_order(self, a, b, d):
        assert attr_le(a, a)
        if attr_le(a, b) and attr_le(b, a):
            assert a == b
        if attr_le(a, b) and attr_le(b, d):
            assert attr_le(a, d)

    @settings(max_examples=200)
    @given(attributes, attributes)
    def test_total_on_attributes(self, a, b):
        assert attr_le(a, b) or attr_le(b, a)

    @settings(max_examples=200)
    @given(channel_types())
    def test_decrement_is_monotone_below_aff(self, t):
        # using a channel never raises its attribute
        d = decrement(t)
        if isinstance(d, Chan):
            assert attr_le(d.attr, t.attr)


class TestTypeEnv:
    u, v = Name("u"), Name("v")

    def test_multiset_equality(self):
        e1 = TypeEnv([(self.u, c(AFF)), (self.v, c(UNR))])
        e2 = TypeEnv([(self.v, c(UNR)), (self.u, c(AFF))])
        assert e1 == e2 and hash(e1) == hash(e2)

    def test_add_remove_minus(self):
        e = TypeEnv.of((self.u, c(AFF))).add(self.u, c(AFF))
        assert e.types_of(self.u) == [c(AFF), c(AFF)]
        assert e.remove(self.u, c(AFF)) == TypeEnv.of((self.u, c(AFF)))
        assert e.minus(TypeEnv.of((self.u, c(UNR)))) is None
        assert not e.is_partial_map()
        with pytest.raises(ValueError):
            e.as_map()

    def test_restrict(self):
        e = TypeEnv([(self.u, c(AFF)), (self.v, c(UNR))])
        assert e.restrict({self.v}) == TypeEnv.of((self.v, c(UNR)))
        assert e.identifiers() == {self.u, self.v}

    @given(st.lists(channel_types(), max_size=4))
    def test_add_then_minus(self, ts):
        e = TypeEnv((self.u, t) for t in ts)
        extra = TypeEnv.of((self.v, c(AFF)))
        assert (e + extra).minus(extra) == e
