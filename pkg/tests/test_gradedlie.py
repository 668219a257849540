import random

import pytest

from lcsplit.corpus import (
    heisenberg_extension,
    heisenberg_group,
    klein_bottle_group,
    klein_extension,
    twisted_klein_extension,
    z_direct_product,
)
from lcsplit.errors import NotFiltered, NotNSeries, NotPTorsionSeries
from lcsplit.freenil import free_nilpotent_pcp, witt_rank
from lcsplit.gradedlie import (
    associated_graded,
    check_bracket_compatibility,
    check_lie_axioms,
    check_lift_independence,
    comparison_to_rational,
    degree_one_generates,
    induced_graded_morphism,
    p_power_map,
    verify_graded_split,
)
from lcsplit.pcengine import PcPresentation
from lcsplit.series import lower_central_series, mod_p_lcs, rational_lcs


class TestAssociatedGraded:
    def test_free_nilpotent_layers_and_bracket(self):
        p = free_nilpotent_pcp(2, 3)
        gla = associated_graded(p, lower_central_series(p, 3))
        assert [gla.layers[n].invariants.rank for n in (1, 2, 3)] == [2, 1, 2]
        # [x1, x2] generates the degree-2 layer
        assert gla.bracket[(1, 1)][0][1] in ((1,), (-1,))
        assert check_lie_axioms(gla)
        assert degree_one_generates(gla)

    def test_klein_mod2_layers(self):
        k = klein_bottle_group()
        gla = associated_graded(k, mod_p_lcs(k, 4, 2))
        for n in range(1, 5):
            assert gla.divisors(n) == (2, 2)
        assert check_lie_axioms(gla)

    def test_klein_rational_layers(self):
        k = klein_bottle_group()
        gla = associated_graded(k, rational_lcs(k, 3))
        assert gla.divisors(1) == (0,)
        for n in (2, 3):
            assert gla.divisors(n) == ()

    def test_rational_layers_torsion_free(self):
        for pres in (klein_bottle_group(), heisenberg_group()):
            gla = associated_graded(pres, rational_lcs(pres, 3))
            for n in range(1, 4):
                assert gla.layers[n].invariants.is_torsion_free()

    def test_lift_independence(self):
        rng = random.Random(31)
        for pres, series in [
            (klein_bottle_group(), mod_p_lcs(klein_bottle_group(), 3, 2)),
            (heisenberg_group(), lower_central_series(heisenberg_group(), 3)),
        ]:
            gla = associated_graded(pres, series)
            assert check_lift_independence(gla, rng, samples=40)

    def test_not_n_series_rejected(self):
        # a descending chain that is not an N-series: K_2 = K_3 = <t^2> in
        # the Klein group ([K_1, K_2] reaches a^4 which is not in K_3)
        from lcsplit.series import SubgroupSeries
        from lcsplit.subgroups import full_subgroup, subgroup_closure

        k = klein_bottle_group()
        t2 = subgroup_closure(k, [k.parse_word("t^2"), k.parse_word("a^4")])
        bad = SubgroupSeries(
            "custom", k, (full_subgroup(k), t2, t2), 2
        )
        with pytest.raises(NotNSeries):
            associated_graded(k, bad)


class TestPPower:
    def test_z_identity_maps(self):
        z = PcPresentation(names=("a",))
        for p in (2, 3):
            gla = associated_graded(z, mod_p_lcs(z, 4, p))
            tables = p_power_map(gla, p)
            for n in range(1, 4):
                assert tables[n] == [(1,)]

    def test_elementary_abelian_zero_maps(self):
        g = PcPresentation(names=("x", "y"), rel_orders=(3, 3))
        gla = associated_graded(g, mod_p_lcs(g, 2, 3))
        tables = p_power_map(gla, 3)
        assert all(all(all(c == 0 for c in row) for row in t) for t in tables.values())

    def test_klein_total_mod2_power_map(self):
        k = klein_bottle_group()
        gla = associated_graded(k, mod_p_lcs(k, 3, 2))
        tables = p_power_map(gla, 2)
        # degree-1 basis classes of a and t both survive squaring
        assert sorted(tables[1]) == [(0, 1), (1, 0)]

    def test_rejects_non_p_torsion(self):
        k = klein_bottle_group()
        gla = associated_graded(k, lower_central_series(k, 3))
        with pytest.raises(NotPTorsionSeries):
            p_power_map(gla, 2)


class TestMorphisms:
    def test_identity_morphism(self):
        h = heisenberg_group()
        gla = associated_graded(h, lower_central_series(h, 3))
        mor = induced_graded_morphism(lambda w: w, gla, gla)
        for n in range(1, 3):
            assert mor.is_injective(n) and mor.is_surjective(n)
        assert check_bracket_compatibility(mor)

    def test_alpha_beta_on_klein(self):
        k = klein_extension()
        fib = associated_graded(
            k.fiber, __import__("lcsplit.extensions", fromlist=["gp_series"]).gp_series(k, 4, "integral")
        )
        tot = associated_graded(k.total, lower_central_series(k.total, 4))
        bas = associated_graded(k.base, lower_central_series(k.base, 4))
        alpha = induced_graded_morphism(lambda w: k.alpha(w), fib, tot)
        beta = induced_graded_morphism(lambda w: k.beta(w), tot, bas)
        for n in range(2, 5):
            assert alpha.is_injective(n)
        assert beta.is_surjective(1)
        assert beta.kernel_invariants(1).divisors == (2,)

    def test_not_filtered(self):
        k = klein_bottle_group()
        gamma = associated_graded(k, lower_central_series(k, 3))
        rat = associated_graded(k, rational_lcs(k, 3))
        with pytest.raises(NotFiltered):
            induced_graded_morphism(lambda w: w, rat, gamma)


class TestComparison:
    def test_klein(self):
        rep = comparison_to_rational(klein_bottle_group(), 3)
        assert rep["holds"]
        assert rep["degrees"][0]["kernel"] == [2]
        assert rep["degrees"][0]["cokernel"] == []

    def test_heisenberg_isomorphism(self):
        rep = comparison_to_rational(heisenberg_group(), 3)
        assert rep["holds"]
        for d in rep["degrees"]:
            assert d["kernel"] == [] and d["cokernel"] == []

    def test_z4(self):
        z4 = PcPresentation(names=("g",), rel_orders=(4,))
        rep = comparison_to_rational(z4, 2)
        assert rep["degrees"][0]["source_divisors"] == [4]
        assert rep["degrees"][0]["target_divisors"] == []
        assert rep["degrees"][0]["kernel"] == [4]
        assert rep["holds"]


class TestGradedSplit:
    def test_klein_integral(self):
        rep = verify_graded_split(klein_extension(), 4, "integral")
        assert rep["holds"]
        # the fiber graded algebra is Z_2 in every degree, although the
        # intrinsic graded algebra of Z vanishes above degree 1
        for d in rep["degrees"][1:]:
            assert d["fiber_divisors"] == [2]

    def test_klein_mod2_nontrivial_monodromy(self):
        rep = verify_graded_split(klein_extension(), 4, "mod_p", 2)
        assert rep["holds"]
        assert rep["theta"][(1, 1)][0][0] == (1,)

    def test_direct_product_zero_monodromy(self):
        rep = verify_graded_split(z_direct_product(), 3, "integral")
        assert rep["holds"]
        assert all(
            all(all(c == 0 for c in cell) for cell in row)
            for table in rep["theta"].values()
            for row in table
        )

    def test_heisenberg_and_twisted(self):
        assert verify_graded_split(heisenberg_extension(), 3, "integral")["holds"]
        assert verify_graded_split(twisted_klein_extension(), 3, "rational")["holds"]

    def test_twisted_klein_rational_concentrated_degree_one(self):
        tw = twisted_klein_extension()
        gla = associated_graded(tw.total, rational_lcs(tw.total, 3))
        assert gla.divisors(1) == (0, 0)
        assert gla.divisors(2) == ()
        assert gla.divisors(3) == ()
