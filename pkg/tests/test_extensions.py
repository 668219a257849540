import random

import pytest

from lcsplit.corpus import (
    heisenberg_extension,
    heisenberg_z_direct_product,
    klein_extension,
    poison_extension,
    random_ia_extension,
    twisted_klein_extension,
    z_direct_product,
    zee,
)
from lcsplit.errors import Inconsistent, NotAction, NotAutomorphism
from lcsplit.extensions import (
    action_from_images,
    action_triviality,
    build_semidirect,
    direct_product,
    gp_series,
    omega_report,
    verify_collapse,
    verify_split_series,
)
from lcsplit.pcengine import (
    IDENTITY,
    PcPresentation,
    collect,
    commutator,
    invert,
    multiply,
    power,
    random_element,
)
from lcsplit.series import lower_central_series, verify_series_axioms
from lcsplit.subgroups import (
    commutator_subgroup,
    contains,
    is_subgroup_subset,
    subgroup_closure,
)


def igs_strings(pres, sub):
    return [pres.format_word(w) for w in sub.igs]


class TestBuild:
    def test_klein_total_is_klein_bottle(self):
        k = klein_extension()
        t = k.total
        assert t.names == ("t", "a")
        w = collect(t, [(0, 1), (1, 1), (0, -1)])
        assert t.format_word(w) == "a^-1"

    def test_direct_product_flags(self):
        dp = z_direct_product()
        flags = action_triviality(dp, primes=(2, 3))
        assert flags["on_ab"] and flags["on_abf"]
        assert all(flags["on_mod_p"].values())

    def test_heisenberg_extension_total(self):
        h = heisenberg_extension()
        t = h.total
        # [t, b] = a in the total group
        c = commutator(t, t.gen("t"), t.gen("b"))
        assert t.format_word(c) == "a"

    def test_not_automorphism(self):
        fiber = zee("a")
        base = zee("t")
        with pytest.raises(NotAutomorphism):
            action_from_images(base, fiber, {"t": {"a": "a^2"}})

    def test_not_action(self):
        # base of order 2 cannot act by an infinite-order automorphism
        fiber = PcPresentation(names=("b", "a"))
        base = PcPresentation(names=("t",), rel_orders=(2,))
        with pytest.raises(NotAction):
            action_from_images(base, fiber, {"t": {"b": "b a"}})

    def test_non_triangular_action_rejected(self):
        fiber = PcPresentation(names=("x", "y"))
        base = zee("t")
        action = action_from_images(base, fiber, {"t": {"x": "y", "y": "x"}})
        with pytest.raises(Inconsistent):
            build_semidirect(fiber, base, action)

    def test_structure_maps(self):
        k = klein_extension()
        a = k.fiber.gen("a")
        t_b = k.alpha(a)
        assert k.beta(t_b) == IDENTITY
        assert k.fiber_coordinate(t_b) == a
        s = k.sigma(k.base.gen("t"))
        assert k.beta(s) == k.base.gen("t")


class TestGpSeries:
    def test_klein_integral(self):
        k = klein_extension()
        s = gp_series(k, 4, "integral")
        for n in range(1, 6):
            assert igs_strings(k.fiber, s.term(n)) == [f"a^{2 ** (n - 1)}" if n > 1 else "a"]

    def test_heisenberg_integral(self):
        h = heisenberg_extension()
        s = gp_series(h, 3, "integral")
        assert igs_strings(h.fiber, s.term(2)) == ["a"]
        assert s.layer(2).invariants.divisors == (0,)
        assert s.term(3).is_trivial()

    def test_klein_rational(self):
        k = klein_extension()
        s = gp_series(k, 4, "rational")
        for n in range(2, 6):
            assert igs_strings(k.fiber, s.term(n)) == ["a"]

    def test_klein_mod2(self):
        k = klein_extension()
        s = gp_series(k, 4, "mod_p", 2)
        for n in range(2, 6):
            assert igs_strings(k.fiber, s.term(n)) == [f"a^{2 ** (n - 1)}"]

    def test_gp_series_is_n_series(self):
        # Thm: the fiber series is an N-series; the mod-p variant is p-torsion
        for ext, c in [(klein_extension(), 4), (heisenberg_extension(), 3), (twisted_klein_extension(), 3)]:
            s = gp_series(ext, c, "integral")
            assert verify_series_axioms(s, "N")["holds"]
            sp = gp_series(ext, c, "mod_p", 2)
            assert verify_series_axioms(sp, "p_torsion", 2)["holds"]
            sr = gp_series(ext, c, "rational")
            assert verify_series_axioms(sr, "N0")["holds"]

    def test_sandwich(self):
        # gamma_n(A) <= L_n <= gamma_n(B)
        for ext, c in [(klein_extension(), 4), (twisted_klein_extension(), 3), (heisenberg_extension(), 3)]:
            s = gp_series(ext, c, "integral")
            ga = lower_central_series(ext.fiber, c)
            gb = lower_central_series(ext.total, c)
            for n in range(1, c + 2):
                assert is_subgroup_subset(ga.term(n), s.term(n))
                assert is_subgroup_subset(
                    ext.fiber_subgroup(s.term(n)), gb.term(n)
                )

    def test_fiber_base_commutator_lemma(self):
        # [L_n, gamma_m(C)] <= L_{n+m}
        for ext, c in [(klein_extension(), 4), (twisted_klein_extension(), 3)]:
            s = gp_series(ext, c, "integral")
            gc = lower_central_series(ext.base, c)
            for n in range(1, c):
                for m in range(1, c + 1 - n):
                    lhs = commutator_subgroup(
                        ext.fiber_subgroup(s.term(n)), ext.base_subgroup(gc.term(m))
                    )
                    target = ext.fiber_subgroup(s.term(n + m))
                    assert all(contains(target, w) for w in lhs.igs)

    def test_rational_fiber_base_lemmas(self):
        # [sqrt(L_n), gamma_m(C)] <= sqrt(L_{n+m}) and the doubly-rational form
        from lcsplit.series import rational_lcs

        for ext in (klein_extension(), twisted_klein_extension()):
            c = 3
            sq = gp_series(ext, c, "rational")
            gc = lower_central_series(ext.base, c)
            rc = rational_lcs(ext.base, c)
            for n in range(1, c):
                for m in range(1, c + 1 - n):
                    target = ext.fiber_subgroup(sq.term(n + m))
                    for base_term in (gc.term(m), rc.term(m)):
                        lhs = commutator_subgroup(
                            ext.fiber_subgroup(sq.term(n)), ext.base_subgroup(base_term)
                        )
                        assert all(contains(target, w) for w in lhs.igs)

    def test_mod_p_fiber_base_lemma(self):
        from lcsplit.series import mod_p_lcs

        ext = klein_extension()
        c = 3
        sp = gp_series(ext, c, "mod_p", 2)
        gpc = mod_p_lcs(ext.base, c, 2)
        for n in range(1, c):
            for m in range(1, c + 1 - n):
                lhs = commutator_subgroup(
                    ext.fiber_subgroup(sp.term(n)), ext.base_subgroup(gpc.term(m))
                )
                target = ext.fiber_subgroup(sp.term(n + m))
                assert all(contains(target, w) for w in lhs.igs)


class TestTriviality:
    def test_klein(self):
        flags = action_triviality(klein_extension(), primes=(2, 3))
        assert flags == {
            "on_ab": False,
            "on_abf": False,
            "on_mod_p": {2: True, 3: False},
        }

    def test_twisted_klein(self):
        flags = action_triviality(twisted_klein_extension(), primes=(2,))
        assert not flags["on_ab"]
        assert flags["on_abf"]

    def test_heisenberg(self):
        flags = action_triviality(heisenberg_extension())
        assert not flags["on_ab"]

    def test_ia_extension(self):
        flags = action_triviality(random_ia_extension(), primes=(2,))
        assert flags["on_ab"] and flags["on_abf"] and flags["on_mod_p"][2]

    def test_poison(self):
        flags = action_triviality(poison_extension(3), primes=(2,))
        assert not flags["on_ab"]
        assert not flags["on_mod_p"][2]


class TestPowerCongruence:
    def test_lemma_power_congruence(self):
        # (ac)^k == a^k c^k modulo [A, C]
        for ext, seed in [
            (klein_extension(), 3),
            (heisenberg_extension(), 4),
            (twisted_klein_extension(), 5),
        ]:
            t = ext.total
            rng = random.Random(seed)
            ac = commutator_subgroup(ext.alpha_fullgroup(), ext.sigma_fullgroup())
            for _ in range(25):
                a = ext.alpha(random_element(ext.fiber, rng))
                c = ext.sigma(random_element(ext.base, rng))
                k = rng.randint(1, 5)
                lhs = power(t, multiply(t, a, c), k)
                rhs = multiply(t, power(t, a, k), power(t, c, k))
                diff = multiply(t, invert(t, rhs), lhs)
                assert contains(ac, diff)


class TestSplitTheorem:
    @pytest.mark.parametrize(
        "builder,c",
        [
            (klein_extension, 4),
            (heisenberg_extension, 3),
            (z_direct_product, 3),
            (heisenberg_z_direct_product, 3),
            (twisted_klein_extension, 3),
            (random_ia_extension, 3),
        ],
    )
    def test_all_modes(self, builder, c):
        ext = builder()
        assert verify_split_series(ext, c, "integral")["holds"]
        assert verify_split_series(ext, c, "rational")["holds"]
        assert verify_split_series(ext, c, "mod_p", 2)["holds"]

    def test_klein_degree3_value(self):
        k = klein_extension()
        rep = verify_split_series(k, 4, "integral")
        deg3 = rep["degrees"][2]
        assert deg3["lhs"] == "< a^4 >"
        assert deg3["base_term"] == "1"

    def test_klein_mod2_degree2_value(self):
        k = klein_extension()
        rep = verify_split_series(k, 3, "mod_p", 2)
        deg2 = rep["degrees"][1]
        assert deg2["fiber_term"] == "< a^2 >"
        assert deg2["base_term"] == "< t^2 >"


class TestCollapse:
    def test_klein_integral_hypothesis_fails(self):
        rep = verify_collapse(klein_extension(), 4, "integral")
        assert not rep["hypothesis_met"]
        assert not rep["collapsed"]
        assert rep["holds"]  # both sides reported, nothing asserted
        deg2 = rep["degrees"][1]
        assert deg2["fiber_series_term"] == "< a^2 >"
        assert deg2["intrinsic_term"] == "1"

    def test_klein_mod2_collapses(self):
        rep = verify_collapse(klein_extension(), 4, "mod_p", 2)
        assert rep["hypothesis_met"] and rep["collapsed"]
        for d in rep["degrees"]:
            assert d["falk_randell"]

    def test_twisted_klein_rational_collapses(self):
        rep = verify_collapse(twisted_klein_extension(), 3, "rational")
        assert rep["hypothesis_met"] and rep["collapsed"]
        deg2 = rep["degrees"][1]
        assert deg2["fiber_series_term"] == "< a >"

    def test_direct_products_collapse_everywhere(self):
        for dp in (z_direct_product(), heisenberg_z_direct_product()):
            for mode, p in (("integral", None), ("rational", None), ("mod_p", 2)):
                rep = verify_collapse(dp, 3, mode, p)
                assert rep["hypothesis_met"] and rep["collapsed"]

    def test_ia_extension_collapses(self):
        rep = verify_collapse(random_ia_extension(), 3, "integral")
        assert rep["hypothesis_met"] and rep["collapsed"]

    def test_heisenberg_reports_both_sides(self):
        rep = verify_collapse(heisenberg_extension(), 3, "integral")
        assert not rep["hypothesis_met"]
        assert not rep["collapsed"]
        deg2 = rep["degrees"][1]
        assert deg2["fiber_series_term"] == "< a >"
        assert deg2["intrinsic_term"] == "1"


class TestPoison:
    def test_layer_ranks(self):
        # honest machine values; the free Lie algebra on one degree-1 and
        # two degree-2 generators gives ranks 1, 2, 2, 3 in degrees 1..4
        p = poison_extension(4)
        s = gp_series(p, 4, "integral")
        ranks = [s.layer(n).invariants.rank for n in range(1, 5)]
        assert ranks == [1, 2, 2, 3]
        assert all(s.layer(n).invariants.is_torsion_free() for n in range(1, 5))

    def test_split_theorem_all_modes_class3(self):
        p = poison_extension(3)
        assert verify_split_series(p, 3, "integral")["holds"]
        assert verify_split_series(p, 3, "rational")["holds"]
        assert verify_split_series(p, 3, "mod_p", 2)["holds"]


class TestOmegaReport:
    def test_klein(self):
        rep = omega_report(klein_extension(), 5, primes=(2,))
        gamma_entry = rep["series"][0]
        assert gamma_entry["term"] == "< a^32 >"
        assert not gamma_entry["trivial"]
        assert gamma_entry["strictly_shrinking"]

    def test_direct_product_of_zs(self):
        rep = omega_report(z_direct_product(), 3, primes=(2,))
        assert rep["series"][0]["trivial"]  # gamma_2 onward trivial
