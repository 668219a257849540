import random

import pytest

from lcsplit.errors import PeelFailure
from lcsplit.freenil import (
    FreeLieElement,
    basis_element,
    free_invert,
    free_reduce,
    hall_basis,
    hall_coordinates,
    lie_bracket,
    lie_element,
    magnus_depth,
    magnus_expand,
    mobius,
    free_nilpotent_pcp,
    pc_word_from_free,
    random_free_word,
    tree_degree,
    tree_poly,
    tree_word,
    witt_rank,
)
from lcsplit.pcengine import consistency_check
from lcsplit.series import lower_central_series
from lcsplit.subgroups import contains


class TestWittAndHall:
    def test_witt_values(self):
        assert witt_rank(2, 2) == 1
        assert witt_rank(2, 3) == 2
        assert witt_rank(2, 5) == 6
        assert witt_rank(3, 2) == 3

    def test_mobius(self):
        assert [mobius(n) for n in range(1, 13)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]

    def test_hall_sizes_rank2(self):
        sizes = [len(ts) for ts in hall_basis(2, 3)]
        assert sizes == [2, 1, 2]

    def test_hall_sizes_rank1(self):
        sizes = [len(ts) for ts in hall_basis(1, 3)]
        assert sizes == [1, 0, 0]

    def test_hall_sizes_rank3(self):
        sizes = [len(ts) for ts in hall_basis(3, 2)]
        assert sizes == [3, 3]

    def test_hall_degree5(self):
        sizes = [len(ts) for ts in hall_basis(2, 5)]
        assert sizes == [2, 1, 2, 3, 6]


class TestMagnus:
    def test_empty_word(self):
        assert magnus_expand([], 2, 3).is_one()

    def test_commutator_expansion(self):
        w = tree_word((0, 1))
        s = magnus_expand(w, 2, 2)
        assert s.coeff(()) == 1
        assert s.coeff((0, 1)) == 1
        assert s.coeff((1, 0)) == -1
        assert s.coeff((0,)) == 0 and s.coeff((1,)) == 0

    def test_inverse_law(self):
        assert magnus_expand([(0, 1), (0, -1)], 2, 4).is_one()

    def test_depths(self):
        assert magnus_depth([(0, 1)], 2, 4) == 1
        assert magnus_depth(tree_word((0, 1)), 2, 4) == 2
        assert magnus_depth(tree_word(((0, 1), 0)), 2, 4) == 3
        assert magnus_depth([], 2, 4) is None

    def test_truncation_cap(self):
        with pytest.raises(ValueError):
            magnus_expand([(0, 1)], 2, 7)


class TestLieBracket:
    def test_canonical_bracket(self):
        x1, x2 = basis_element(2, 0), basis_element(2, 1)
        b = lie_bracket(x1, x2)
        assert b.as_dict() == {(0, 1): 1}

    def test_antisymmetry(self):
        x1, x2 = basis_element(2, 0), basis_element(2, 1)
        assert lie_bracket(x2, x1).as_dict() == {(0, 1): -1}

    def test_self_bracket_zero(self):
        x1 = basis_element(2, 0)
        assert lie_bracket(x1, x1).is_zero()

    def test_jacobi_on_random_elements(self):
        rng = random.Random(9)
        trees1 = hall_basis(2, 2)[0]
        trees2 = hall_basis(2, 2)[1]

        def rand_elt(degree, trees):
            return lie_element(2, degree, {t: rng.randint(-2, 2) for t in trees})

        for _ in range(30):
            x = rand_elt(1, trees1)
            y = rand_elt(1, trees1)
            z = rand_elt(2, trees2)
            j1 = lie_bracket(x, lie_bracket(y, z))
            j2 = lie_bracket(y, lie_bracket(z, x))
            j3 = lie_bracket(z, lie_bracket(x, y))
            total = {}
            for e in (j1, j2, j3):
                for t, c in e.coeffs:
                    total[t] = total.get(t, 0) + c
            assert all(c == 0 for c in total.values())

    def test_bilinearity(self):
        x1, x2 = basis_element(2, 0), basis_element(2, 1)
        two_x1 = lie_element(2, 1, {0: 2})
        assert lie_bracket(two_x1, x2).as_dict() == {(0, 1): 2}

    def test_nested_bracket_vs_magnus(self):
        # [[x1,x2],x1] and -[x1,[x1,x2]] have matching Magnus images
        inner = lie_bracket(basis_element(2, 0), basis_element(2, 1))
        a = lie_bracket(inner, basis_element(2, 0))
        b = lie_bracket(basis_element(2, 0), inner)
        assert a.as_dict() == {t: -c for t, c in b.coeffs}

    def test_hall_coordinates_reject(self):
        # X0 X1 alone is not a Lie element
        with pytest.raises(PeelFailure):
            hall_coordinates(2, 2, {(0, 1): 1})


class TestFreeNilpotentPcp:
    def test_rank1_is_infinite_cyclic(self):
        p = free_nilpotent_pcp(1, 3)
        assert p.ngens == 1
        assert p.rel_orders == (0,)
        assert not p.conj

    def test_2_2_is_heisenberg_shaped(self):
        p = free_nilpotent_pcp(2, 2)
        assert p.ngens == 3
        assert p.weights == (1, 1, 2)
        assert consistency_check(p) == []
        s = lower_central_series(p, 2)
        assert s.layer(1).invariants.divisors == (0, 0)
        assert s.layer(2).invariants.divisors == (0,)

    def test_2_3_weights_and_consistency(self):
        p = free_nilpotent_pcp(2, 3)
        assert p.weights == (1, 1, 2, 3, 3)
        assert consistency_check(p) == []

    def test_layer_ranks_match_witt(self):
        p = free_nilpotent_pcp(2, 4)
        s = lower_central_series(p, 4)
        for n in range(1, 4):
            lq = s.layer(n)
            assert lq.invariants.is_torsion_free()
            assert lq.invariants.rank == witt_rank(2, n)

    def test_depth_oracle_agreement(self):
        c = 4
        p = free_nilpotent_pcp(2, c)
        s = lower_central_series(p, c)
        rng = random.Random(101)
        agreements = 0
        for _ in range(60):
            w = random_free_word(2, rng, length=6)
            depth = magnus_depth(w, 2, c)
            img = pc_word_from_free(p, w)
            if depth is None:
                assert img == ()
            else:
                assert contains(s.term(depth), img)
                if depth + 1 <= c + 1:
                    assert not contains(s.term(depth + 1), img)
            agreements += 1
        assert agreements == 60


class TestFreeWords:
    def test_reduce(self):
        assert free_reduce([(0, 1), (0, -1), (1, 2)]) == [(1, 2)]

    def test_tree_word_commutator(self):
        assert tree_word((0, 1)) == [(0, 1), (1, 1), (0, -1), (1, -1)]

    def test_invert(self):
        w = [(0, 2), (1, -1)]
        assert free_reduce(w + free_invert(w)) == []
