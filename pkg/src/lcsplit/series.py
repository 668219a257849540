"""Descending filtrations of a single group: the lower central series, its
rational and mod-p refinements, the Zassenhaus series, torsion-free
radicals with power certificates, and the N-series axiom checks.

Series on an infinite group are computed inside the presented group up to
the requested class bound; a stabilized series is padded by repetition so
theorem checks can index uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, lcm

from .errors import AmbiguousIsolator, BudgetExceeded, NotNormal
from .pcengine import IDENTITY, PcPresentation, multiply, power
from .subgroups import (
    Subgroup,
    commutator_subgroup,
    contains,
    full_subgroup,
    is_normal,
    is_subgroup_subset,
    join,
    join_all,
    layer_quotient,
    power_subgroup,
    subgroup_closure,
    trivial_subgroup,
)


@dataclass(frozen=True)
class SubgroupSeries:
    """A labeled descending chain of subgroups, 1-indexed: term(1) is the
    full group and term(class_bound + 1) is the deepest computed term."""

    kind: str
    pres: PcPresentation
    terms: tuple  # terms[0] == term(1)
    class_bound: int
    exactness_note: dict = field(default_factory=dict, compare=False)
    stabilized_at: int | None = None
    certificates: tuple | None = None
    crosscheck_failures: tuple | None = None

    def __post_init__(self):
        assert len(self.terms) == self.class_bound + 1
        assert self.terms[0] == full_subgroup(self.pres)
        for a, b in zip(self.terms, self.terms[1:]):
            assert is_subgroup_subset(b, a), "series not descending"

    def term(self, n) -> Subgroup:
        if not 1 <= n <= len(self.terms):
            raise IndexError(f"series term {n} not computed")
        return self.terms[n - 1]

    def layer(self, n):
        return layer_quotient(self.term(n), self.term(n + 1))


def _series_cache(pres) -> dict:
    cache = getattr(pres, "_series_cache", None)
    if cache is None:
        cache = {}
        pres._series_cache = cache
    return cache


def _build_series(kind, pres, c, step):
    """Run terms[n+1] = step(terms[n]); the term list is cached on the
    presentation and extended incrementally, and a stabilized series is
    padded by repetition."""
    cache = _series_cache(pres)
    terms = cache.setdefault(kind, [full_subgroup(pres)])
    while len(terms) < c + 1:
        n = len(terms)
        if n >= 2 and terms[-1] == terms[-2]:
            terms.append(terms[-1])
        else:
            terms.append(step(terms[-1], n))
    stabilized = None
    for n in range(1, c + 1):
        if terms[n] == terms[n - 1]:
            stabilized = n
            break
    note = {
        "policy": "terms computed inside the presented group; layers at "
        "degree <= class_bound are exact for exactly presented groups",
        "stabilized_at": stabilized,
    }
    return SubgroupSeries(
        kind, pres, tuple(terms[: c + 1]), c, exactness_note=note, stabilized_at=stabilized
    )


def lower_central_series(pres: PcPresentation, c: int) -> SubgroupSeries:
    g = full_subgroup(pres)
    return _build_series("gamma", pres, c, lambda t, n: commutator_subgroup(g, t))


def derived_series_chain(pres: PcPresentation, budget=64):
    """G >= G' >= G'' >= ... until it stabilizes (polycyclic groups are
    solvable, so the chain reaches the trivial subgroup)."""
    cache = _series_cache(pres)
    if "derived" in cache:
        return cache["derived"]
    chain = [full_subgroup(pres)]
    for _ in range(budget):
        nxt = commutator_subgroup(chain[-1], chain[-1])
        if nxt == chain[-1]:
            break
        chain.append(nxt)
    else:
        raise BudgetExceeded("derived series did not stabilize")
    cache["derived"] = chain
    return chain


def mod_p_lcs(pres: PcPresentation, c: int, p: int) -> SubgroupSeries:
    """terms[n+1] = < (terms[n])^p, [G, terms[n]] >.

    Since [terms[n], terms[n]] <= [G, terms[n]], the quotient of terms[n] by
    the commutator part is abelian, so igs-generator p-th powers already
    span the power part of the join."""
    _check_prime(p)
    g = full_subgroup(pres)

    def step(t, n):
        comm = commutator_subgroup(g, t)
        powers = subgroup_closure(pres, [power(pres, x, p) for x in t.igs])
        nxt = join(powers, comm)
        assert is_subgroup_subset(nxt, t)
        return nxt

    return _build_series(f"gamma_p[{p}]", pres, c, step)


def zassenhaus_series(pres: PcPresentation, c: int, p: int) -> SubgroupSeries:
    """The fastest N_p-series containing the lower central series:
    term(n) = product of (gamma_m)^{p^j} over m * p^j >= n."""
    _check_prime(p)
    gamma = lower_central_series(pres, c)
    iterated = {}  # (m, j) -> subgroup

    def gamma_power(m, j):
        if (m, j) not in iterated:
            iterated[(m, j)] = (
                gamma.term(m) if j == 0 else power_subgroup(gamma_power(m, j - 1), p)
            )
        return iterated[(m, j)]

    def term_at(n):
        if n == 1:
            return full_subgroup(pres)
        parts = []
        j = 0
        while True:
            m = max(1, -(-n // p**j))  # ceil(n / p^j)
            parts.append(gamma_power(m, j))
            if p**j >= n:
                break
            j += 1
        return join_all(pres, parts)

    terms = [term_at(n) for n in range(1, c + 2)]
    stabilized = None
    for n in range(1, c + 1):
        if terms[n] == terms[n - 1]:
            stabilized = n
            break
    note = {"policy": "join of iterated power subgroups of gamma terms", "stabilized_at": stabilized}
    return SubgroupSeries(
        f"zassenhaus[{p}]", pres, tuple(terms), c, exactness_note=note, stabilized_at=stabilized
    )


def _check_prime(p):
    if p < 2 or any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
        raise ValueError(f"{p} is not prime")


# -- torsion-free radical ---------------------------------------------------


@dataclass(frozen=True)
class IsolatorResult:
    subgroup: Subgroup
    certificates: tuple  # ((igs word, exponent or None), ...)
    exact: bool  # quotient nilpotent: result is exactly the isolator
    nilpotent_quotient: bool

    def certified(self):
        return all(k is not None for _, k in self.certificates)


def _relative_chain(pres, m_sub, class_bound, gamma=None):
    """A chain G = C_0 > C_1 > ... > C_s = M with abelian layers: the
    gamma-chain join(gamma_k, M) when G/M is nilpotent (detected by the
    chain reaching M within the class bound), else the derived chain
    join(G^(k), M)."""
    if gamma is None:
        gamma = lower_central_series(pres, class_bound)
    chain = [full_subgroup(pres)]
    nilpotent = False
    for k in range(2, class_bound + 2):
        t = join(gamma.term(k), m_sub)
        if t == chain[-1] and t != m_sub:
            break  # gamma chain stalled above M: not nilpotent relative to M
        chain.append(t)
        if t == m_sub:
            nilpotent = True
            break
    if nilpotent:
        return chain, True
    chain = []
    for d in derived_series_chain(pres):
        chain.append(join(d, m_sub))
        if chain[-1] == m_sub:
            break
    else:
        chain.append(m_sub)
    return chain, False


def _solve_scaled(e, v, divisors):
    """w with e*w == v componentwise modulo the divisors (0 = exact)."""
    w = []
    for vi, dv in zip(v, divisors):
        if dv == 0:
            if vi % e:
                return None
            w.append(vi // e)
        else:
            g = gcd(e, dv)
            if vi % g:
                return None
            ee, dd = e // g, dv // g
            s = pow(ee, -1, dd) if dd > 1 else 0
            w.append((vi // g * s) % dd if dd > 1 else 0)
    return w


def _descend_correct(pres, chain, layers, k, x, e, m_sub):
    """Try to correct the torsion candidate x (x^e in chain[k+1]) by factors
    from lower layers so that the result has its e-th power in M."""
    y = x
    for j in range(k + 1, len(chain) - 1):
        lq = layers[j]
        ye = power(pres, y, e)
        try:
            v = lq.coords(ye)
        except ValueError:
            return None  # correction escaped the chain (non-central layers)
        if any(v):
            w = _solve_scaled(e, v, lq.invariants.divisors)
            if w is None:
                return None
            y = multiply(pres, y, power(pres, lq.element_from_coords(w), -1))
    ye = power(pres, y, e)
    if contains(m_sub, ye):
        return y
    return None


def _torsion_candidates(lq, budget=4096):
    """Nontrivial classes of the torsion subgroup of an abelian layer, as
    (coords, class order) pairs."""
    tors = [(i, d) for i, d in enumerate(lq.invariants.divisors) if d != 0]
    if not tors:
        return
    total = 1
    for _, d in tors:
        total *= d
    if total > budget:
        raise BudgetExceeded("torsion layer too large to enumerate")
    n = len(lq.invariants.divisors)
    combos = [[]]
    for _, d in tors:
        combos = [c + [r] for c in combos for r in range(d)]
    for c in combos:
        if not any(c):
            continue
        coords = [0] * n
        order = 1
        for (i, d), r in zip(tors, c):
            coords[i] = r
            if r:
                order = lcm(order, d // gcd(d, r))
        yield tuple(coords), order


def torsion_free_radical(
    pres: PcPresentation,
    n_sub: Subgroup,
    class_bound: int = 8,
    power_bound: int = 4096,
) -> IsolatorResult:
    """Smallest normal subgroup above n_sub whose quotient shows no torsion
    to the saturation procedure: repeatedly find a torsion class of an
    abelian-layer chain of the quotient that can be corrected to an element
    with a power in the current subgroup, and adjoin its normal closure.

    When the quotient is nilpotent the result is exactly the isolator of
    n_sub and the certificate is marked exact.  Certificates record, per igs
    generator of the result, the least exponent within power_bound whose
    power lands in n_sub; for a non-nilpotent quotient any uncertified
    generator raises AmbiguousIsolator.
    """
    cache = _series_cache(pres)
    key = ("radical", n_sub.igs, class_bound, power_bound)
    if key in cache:
        return cache[key]
    if not is_normal(n_sub):
        raise NotNormal("torsion-free radical needs a normal subgroup")
    gamma = lower_central_series(pres, class_bound)
    m_sub = n_sub
    nilpotent = None  # of G/n_sub, decided by the first chain
    while True:
        chain, chain_nilpotent = _relative_chain(pres, m_sub, class_bound, gamma)
        if nilpotent is None:
            nilpotent = chain_nilpotent
        layers = {
            j: layer_quotient(chain[j], chain[j + 1]) for j in range(len(chain) - 1)
        }
        witness = None
        for k in range(len(chain) - 2, -1, -1):
            lq = layers[k]
            for coords, order in _torsion_candidates(lq):
                x = lq.element_from_coords(coords)
                e = order
                while e <= power_bound:
                    y = _descend_correct(pres, chain, layers, k, x, e, m_sub)
                    if y is not None and not contains(m_sub, y):
                        witness = y
                        break
                    e += order
                if witness is not None:
                    break
            if witness is not None:
                break
        if witness is None:
            break
        m_sub = subgroup_closure(pres, list(m_sub.igs) + [witness], normal=True)

    certificates = []
    for x in m_sub.igs:
        acc = IDENTITY
        found = None
        for k in range(1, power_bound + 1):
            acc = multiply(pres, acc, x)
            if contains(n_sub, acc):
                found = k
                break
        certificates.append((x, found))
    exact = nilpotent
    if not exact and any(k is None for _, k in certificates):
        raise AmbiguousIsolator(
            "non-nilpotent quotient with uncertified isolator generators",
            uncertified=tuple(x for x, k in certificates if k is None),
        )
    result = IsolatorResult(m_sub, tuple(certificates), exact, nilpotent)
    cache[key] = result
    return result


def rational_lcs(
    pres: PcPresentation, c: int, class_bound=None, power_bound: int = 4096
) -> SubgroupSeries:
    """terms[n] = torsion-free radical of gamma_n, cross-checked against the
    defining recursion: terms[n+1] must equal the radical of [G, terms[n]].
    Mismatches are recorded as verification failures, not hidden."""
    class_bound = class_bound if class_bound is not None else max(c + 1, 4)
    gamma = lower_central_series(pres, c)
    g = full_subgroup(pres)
    terms = [g]
    certs = [()]
    for n in range(2, c + 2):
        res = torsion_free_radical(pres, gamma.term(n), class_bound, power_bound)
        terms.append(res.subgroup)
        certs.append(res.certificates)
    failures = []
    for n in range(1, c + 1):
        comm = commutator_subgroup(g, terms[n - 1])
        expect = torsion_free_radical(pres, comm, class_bound, power_bound).subgroup
        if expect != terms[n]:
            failures.append(
                {
                    "degree": n + 1,
                    "recursion_term": expect.format(),
                    "isolator_term": terms[n].format(),
                }
            )
    stabilized = None
    for n in range(1, c + 1):
        if terms[n] == terms[n - 1]:
            stabilized = n
            break
    note = {
        "policy": "isolators exact for nilpotent quotients; otherwise "
        "certified by generator power bounds",
        "stabilized_at": stabilized,
    }
    return SubgroupSeries(
        "rational",
        pres,
        tuple(terms),
        c,
        exactness_note=note,
        stabilized_at=stabilized,
        certificates=tuple(certs),
        crosscheck_failures=tuple(failures),
    )


# -- axiom checks -----------------------------------------------------------


def verify_series_axioms(series: SubgroupSeries, mode: str, p: int | None = None) -> dict:
    """Check the N-series axiom [K_m, K_n] <= K_{m+n} (mode "N"), plus
    torsion-free layers ("N0"), K_n^p <= K_{n+1} ("p_torsion"), or
    K_n^p <= K_{pn} ("Np").  Failures are reported with witnesses."""
    if mode in ("p_torsion", "Np") and p is None:
        raise ValueError("mode requires a prime")
    pres = series.pres
    top = len(series.terms)
    results = []

    def record(check, holds, witness=None, **kw):
        entry = {"check": check, "holds": holds, **kw}
        if witness is not None:
            entry["witness"] = pres.format_word(witness)
        results.append(entry)

    for m in range(1, top + 1):
        for n in range(m, top + 1):
            if m + n > top:
                continue
            cs = commutator_subgroup(series.term(m), series.term(n))
            target = series.term(m + n)
            bad = next((w for w in cs.igs if not contains(target, w)), None)
            record("N", bad is None, witness=bad, m=m, n=n)

    if mode == "N0":
        for n in range(1, top):
            lq = series.layer(n)
            record(
                "torsion_free_layer",
                lq.invariants.is_torsion_free(),
                degree=n,
                divisors=list(lq.invariants.divisors),
            )

    if mode in ("p_torsion", "Np"):
        for n in range(1, top + 1):
            target_index = n + 1 if mode == "p_torsion" else p * n
            if target_index > top:
                continue
            target = series.term(target_index)
            src = series.term(n)
            comm = commutator_subgroup(src, src)
            if all(contains(target, w) for w in comm.igs):
                # abelian modulo target: generator p-th powers decide S^p
                bad = next(
                    (x for x in src.igs if not contains(target, power(pres, x, p))), None
                )
            else:
                ps = power_subgroup(src, p)
                bad = next((w for w in ps.igs if not contains(target, w)), None)
            record(mode, bad is None, witness=bad, n=n, target=target_index)

    return {
        "mode": mode,
        "kind": series.kind,
        "holds": all(r["holds"] for r in results),
        "results": results,
    }


def is_n_series(series: SubgroupSeries) -> bool:
    return verify_series_axioms(series, "N")["holds"]


def omega_term_report(series: SubgroupSeries) -> dict:
    """Bounded-depth residual report: the deepest computed term and whether
    it is trivial (supports, never proves, residual claims)."""
    deepest = series.terms[-1]
    return {
        "kind": series.kind,
        "depth": len(series.terms),
        "term": deepest.format(),
        "trivial": deepest.is_trivial(),
        "strictly_shrinking": series.stabilized_at is None,
    }
