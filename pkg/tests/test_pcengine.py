import random

import pytest

from lcsplit.errors import InvalidPresentation, UnknownGenerator
from lcsplit.pcengine import (
    IDENTITY,
    PcPresentation,
    collect,
    commutator,
    conjugate,
    consistency_check,
    invert,
    multiply,
    power,
    random_element,
    random_word,
)


def heisenberg():
    # discrete Heisenberg group: b^a = b c, c central
    return PcPresentation(
        names=("a", "b", "c"),
        conj={(0, 1, 1): ((1, 1), (2, 1))},
    )


def klein_bottle():
    # t a t^-1 = a^-1
    return PcPresentation(names=("t", "a"), conj={(0, 1, 1): ((1, -1),)})


def free_abelian(n):
    return PcPresentation(names=tuple(f"z{i}" for i in range(n)))


def dihedral8():
    # s^2 = 1, r^4 = 1, r^s = r^3
    return PcPresentation(
        names=("s", "r"),
        rel_orders=(2, 4),
        conj={(0, 1, 1): ((1, 3),)},
    )


def heisenberg_mod(p):
    return PcPresentation(
        names=("a", "b", "c"),
        rel_orders=(p, p, p),
        conj={(0, 1, 1): ((1, 1), (2, 1))},
    )


def enumerate_elements(pres):
    """All elements of a finite pc group as normal words."""
    assert all(m > 0 for m in pres.rel_orders)
    elems = [IDENTITY]
    for i in range(pres.ngens - 1, -1, -1):
        elems = [
            collect(pres, [(i, e)] + list(tail))
            for e in range(pres.rel_orders[i])
            for tail in elems
        ]
    return elems


class TestCollect:
    def test_empty_word(self):
        assert collect(heisenberg(), []) == IDENTITY

    def test_heisenberg_hand_collection(self):
        h = heisenberg()
        # b a = a b c
        w = collect(h, [(1, 1), (0, 1)])
        assert h.format_word(w) == "a b c"

    def test_klein_defining_relation(self):
        k = klein_bottle()
        w = collect(k, [(0, 1), (1, 1), (0, -1)])
        assert k.format_word(w) == "a^-1"

    def test_unknown_generator(self):
        with pytest.raises(UnknownGenerator):
            heisenberg().parse_word("a x")

    def test_idempotent_on_normal_forms(self):
        h = heisenberg()
        rng = random.Random(7)
        for _ in range(50):
            x = random_element(h, rng)
            assert collect(h, list(x)) == x

    def test_finite_order_reduction(self):
        d = dihedral8()
        assert collect(d, [(1, 5)]) == ((1, 1),)
        assert collect(d, [(1, -1)]) == ((1, 3),)
        assert collect(d, [(0, 3)]) == ((0, 1),)


class TestGroupLaws:
    def test_multiply_matches_collect_example(self):
        h = heisenberg()
        b, a = h.gen("b"), h.gen("a")
        assert h.format_word(multiply(h, b, a)) == "a b c"

    def test_inverse_law(self):
        h = heisenberg()
        rng = random.Random(3)
        for _ in range(40):
            x = random_element(h, rng)
            assert multiply(h, x, invert(h, x)) == IDENTITY

    def test_klein_power(self):
        k = klein_bottle()
        at = collect(k, [(1, 1), (0, 1)])  # element a t
        assert k.format_word(power(k, at, 2)) == "t^2"

    def test_power_negative(self):
        k = klein_bottle()
        x = collect(k, [(0, 1), (1, 2)])
        assert multiply(k, power(k, x, -3), power(k, x, 3)) == IDENTITY

    def test_associativity_random(self):
        for pres, seed in [(heisenberg(), 1), (klein_bottle(), 2), (dihedral8(), 3)]:
            rng = random.Random(seed)
            for _ in range(60):
                x, y, z = (random_element(pres, rng) for _ in range(3))
                assert multiply(pres, multiply(pres, x, y), z) == multiply(
                    pres, x, multiply(pres, y, z)
                )


class TestCommutator:
    def test_heisenberg_commutator(self):
        h = heisenberg()
        assert h.format_word(commutator(h, h.gen("a"), h.gen("b"))) == "c^-1"

    def test_self_commutator(self):
        h = heisenberg()
        rng = random.Random(11)
        for _ in range(20):
            x = random_element(h, rng)
            assert commutator(h, x, x) == IDENTITY

    def test_klein_commutator(self):
        k = klein_bottle()
        assert k.format_word(commutator(k, k.gen("t"), k.gen("a"))) == "a^-2"

    def test_hall_witt_identities(self):
        # [x, yz] = [x,y] * y[x,z]y^-1  and the three-fold Jacobi-Witt product
        for pres, seed in [(heisenberg(), 5), (klein_bottle(), 6), (dihedral8(), 7)]:
            rng = random.Random(seed)
            for _ in range(80):
                x, y, z = (random_element(pres, rng) for _ in range(3))
                lhs = commutator(pres, x, multiply(pres, y, z))
                up = multiply(
                    pres, y, multiply(pres, commutator(pres, x, z), invert(pres, y))
                )
                assert lhs == multiply(pres, commutator(pres, x, y), up)

                def up_conj(a, b):
                    # ^b a = b a b^-1
                    return multiply(pres, b, multiply(pres, a, invert(pres, b)))

                t1 = commutator(pres, commutator(pres, x, y), up_conj(z, y))
                t2 = commutator(pres, commutator(pres, y, z), up_conj(x, z))
                t3 = commutator(pres, commutator(pres, z, x), up_conj(y, x))
                assert multiply(pres, multiply(pres, t1, t2), t3) == IDENTITY


class TestFiniteBruteForce:
    """Compare engine arithmetic against exhaustive enumeration."""

    @pytest.mark.parametrize("builder", [dihedral8, lambda: heisenberg_mod(3)])
    def test_group_axioms_exhaustive(self, builder):
        pres = builder()
        elems = enumerate_elements(pres)
        expected = 1
        for m in pres.rel_orders:
            expected *= m
        assert len(set(elems)) == expected
        sample = elems if len(elems) <= 16 else elems[::3]
        for x in sample:
            assert multiply(pres, x, invert(pres, x)) == IDENTITY
            for y in sample:
                xy = multiply(pres, x, y)
                assert xy in set(elems)

    def test_dihedral_relations(self):
        d = dihedral8()
        s, r = d.gen("s"), d.gen("r")
        assert power(d, s, 2) == IDENTITY
        assert power(d, r, 4) == IDENTITY
        assert conjugate(d, r, s) == power(d, r, 3)


class TestConsistency:
    def test_heisenberg_consistent(self):
        assert consistency_check(heisenberg()) == []

    def test_free_abelian_consistent(self):
        assert consistency_check(free_abelian(2)) == []

    def test_klein_consistent(self):
        assert consistency_check(klein_bottle()) == []

    def test_dihedral_consistent(self):
        assert consistency_check(dihedral8()) == []

    def test_corrupt_heisenberg_flagged(self):
        # conj b^a = b c^2 but conj b^(a^-1) = b c^-1: the directions are not
        # mutually inverse, so an overlap must fail
        bad = PcPresentation(
            names=("a", "b", "c"),
            conj={
                (0, 1, 1): ((1, 1), (2, 2)),
                (0, 1, -1): ((1, 1), (2, -1)),
            },
        )
        assert consistency_check(bad) != []

    def test_budget_guard(self):
        from lcsplit.errors import BudgetExceeded

        h = heisenberg()
        h.collection_budget = 3  # cripple after construction
        h._conj_cache.clear()
        with pytest.raises(BudgetExceeded):
            collect(h, [(1, 2), (0, 2), (1, 1), (0, 1)])


class TestConstruction:
    def test_weight_assertion_accepts_heisenberg(self):
        PcPresentation(
            names=("a", "b", "c"),
            weights=(1, 1, 2),
            conj={(0, 1, 1): ((1, 1), (2, 1))},
        )

    def test_weight_assertion_rejects_klein(self):
        with pytest.raises(InvalidPresentation):
            PcPresentation(names=("t", "a"), weights=(1, 1), conj={(0, 1, 1): ((1, -1),)})

    def test_non_unit_leading_rejected(self):
        with pytest.raises(InvalidPresentation):
            PcPresentation(
                names=("s", "r"), rel_orders=(2, 4), conj={(0, 1, 1): ((1, 2),)}
            )

    def test_derived_inverse_conjugation(self):
        h = heisenberg()
        assert h.conj[(0, 1, -1)] == ((1, 1), (2, -1))
        k = klein_bottle()
        assert k.conj[(0, 1, -1)] == ((1, -1),)

    def test_parse_and_format_roundtrip(self):
        h = heisenberg()
        rng = random.Random(13)
        for _ in range(25):
            x = random_element(h, rng)
            assert h.parse_word(h.format_word(x)) == x

    def test_random_words_collect(self):
        for pres, seed in [(heisenberg(), 21), (dihedral8(), 22)]:
            rng = random.Random(seed)
            for _ in range(40):
                w = random_word(pres, rng, length=8)
                x = collect(pres, w)
                # collecting in two chunks agrees
                half = len(w) // 2
                y = multiply(pres, collect(pres, w[:half]), collect(pres, w[half:]))
                assert x == y
