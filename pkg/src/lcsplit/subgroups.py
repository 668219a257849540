"""Canonical subgroup machinery for polycyclic groups.

A subgroup is stored as its induced generating sequence (igs): one element
per occupied leading index, with positive reduced leading exponents (for a
finite-order generator the leading exponent divides the relative order),
entries above pivots reduced, and the polycyclic tails conditions enforced
(conjugates of later pivots by earlier ones, and pivot-power overflows,
sift to the identity).  The reduced sequence is the unique canonical form
of the subgroup, so subgroup equality is list equality and membership is
decided by sifting.

All operations are pure over immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .errors import BudgetExceeded, NotAbelianQuotient, NotNormal
from .intlinalg import IntMatrix, invariants_with_basis
from .pcengine import (
    IDENTITY,
    PcPresentation,
    collect,
    commutator,
    invert,
    multiply,
    power,
)


def _xgcd(a, b):
    """(g, s, t) with s*a + t*b == g == gcd(a, b), g >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


@dataclass(frozen=True)
class Subgroup:
    pres: PcPresentation
    igs: tuple  # tuple of normal words, strictly increasing leading indices

    def is_trivial(self):
        return not self.igs

    def leading_indices(self):
        return tuple(w[0][0] for w in self.igs)

    def format(self):
        if not self.igs:
            return "1"
        return "< " + ", ".join(self.pres.format_word(w) for w in self.igs) + " >"

    def __repr__(self):
        return f"Subgroup({self.format()})"


class _IgsBuilder:
    def __init__(self, pres: PcPresentation):
        self.pres = pres
        self.pivots = {}  # leading index -> element

    # -- sifting ----------------------------------------------------------

    def sift(self, x):
        """Reduce x against the pivots; the remainder is trivial iff x lies
        in the subgroup the (enforced) pivots generate."""
        pres = self.pres
        while x:
            i, e = x[0]
            piv = self.pivots.get(i)
            if piv is None:
                return x
            d = piv[0][1]
            if e % d:
                return x
            x = multiply(pres, power(pres, piv, -(e // d)), x)
        return IDENTITY

    def full_sift(self, x):
        """Exponent vector of x over the pivot sequence plus remainder:
        x = prod(pivot_k ^ v_k) * remainder in increasing pivot order."""
        pres = self.pres
        idxs = sorted(self.pivots)
        pos = {i: k for k, i in enumerate(idxs)}
        v = [0] * len(idxs)
        while x:
            i, e = x[0]
            piv = self.pivots.get(i)
            if piv is None:
                break
            d = piv[0][1]
            if e % d:
                break
            q = e // d
            v[pos[i]] = q
            x = multiply(pres, power(pres, piv, -q), x)
        return v, x

    # -- pivot installation -------------------------------------------------

    def add(self, x):
        """Sift-add an element, updating pivots by gcd combination."""
        changed = False
        queue = [collect(self.pres, list(x))]
        pres = self.pres
        orders = pres.rel_orders
        while queue:
            x = queue.pop()
            while x:
                i, e = x[0]
                m = orders[i]
                if m == 0 and e < 0:
                    x = invert(pres, x)
                    continue
                piv = self.pivots.get(i)
                if piv is None:
                    if m and m % e != 0:
                        g = gcd(e, m)
                        s = _modinv(e // g, m // g)
                        p = power(pres, x, s)
                        self.pivots[i] = p
                        queue.append(x)
                    else:
                        self.pivots[i] = x
                    changed = True
                    break
                d = piv[0][1]
                if e % d == 0:
                    x = multiply(pres, power(pres, piv, -(e // d)), x)
                    continue
                g, s, t = _xgcd(d, e)
                p = multiply(pres, power(pres, piv, s), power(pres, x, t))
                assert p and p[0][0] == i and p[0][1] == (g % m if m else g)
                self.pivots[i] = p
                changed = True
                queue.append(piv)
                queue.append(x)
                break
        return changed

    # -- closure conditions -------------------------------------------------

    def enforce(self):
        """Iterate the polycyclic-sequence conditions until a full pass makes
        no change: pivot-power overflows and pairwise pivot conjugations must
        sift to the identity."""
        pres = self.pres
        passes = 0
        while True:
            passes += 1
            if passes > pres.closure_budget:
                raise BudgetExceeded("igs closure pass budget exhausted")
            changed = False
            items = sorted(self.pivots.items())
            for i, p in items:
                m = pres.rel_orders[i]
                if m:
                    w = power(pres, p, m // p[0][1])
                    if self.sift(w):
                        changed |= self.add(w)
            items = sorted(self.pivots.items())
            for ai, (i, p) in enumerate(items):
                pinv = invert(pres, p)
                for j, q in items[ai + 1 :]:
                    for w in (
                        collect(pres, list(p) + list(q) + list(pinv)),
                        collect(pres, list(pinv) + list(q) + list(p)),
                    ):
                        if self.sift(w):
                            changed |= self.add(w)
            if not changed:
                return

    def close_under_conjugation(self, conjugators):
        """Extend until every pivot's conjugate by each conjugator (and its
        inverse) sifts to the identity; conjugators are normal words."""
        pres = self.pres
        passes = 0
        while True:
            passes += 1
            if passes > pres.closure_budget:
                raise BudgetExceeded("normal closure pass budget exhausted")
            changed = False
            for g in conjugators:
                ginv = invert(pres, g)
                for p in list(self.pivots.values()):
                    for w in (
                        collect(pres, list(g) + list(p) + list(ginv)),
                        collect(pres, list(ginv) + list(p) + list(g)),
                    ):
                        if self.sift(w):
                            changed |= self.add(w)
            if changed:
                self.enforce()
            else:
                return

    # -- canonical form -------------------------------------------------------

    def reduce_above(self):
        idxs = sorted(self.pivots)
        for i in reversed(idxs):
            p = self.pivots[i]
            for j in idxs:
                if j <= i:
                    continue
                d = self.pivots[j][0][1]
                c = next((e for l, e in p if l == j), 0)
                q = c // d
                if q:
                    p = multiply(self.pres, p, power(self.pres, self.pivots[j], -q))
            self.pivots[i] = p

    def result(self) -> Subgroup:
        self.reduce_above()
        return Subgroup(self.pres, tuple(self.pivots[i] for i in sorted(self.pivots)))


def _modinv(a, m):
    g, s, _ = _xgcd(a % m, m)
    if g != 1:
        raise ValueError("not invertible")
    return s % m


def _builder_from(sub: Subgroup) -> _IgsBuilder:
    # a canonical igs already satisfies the tails conditions, so the builder
    # can adopt it verbatim; cache it on the (frozen) Subgroup
    b = getattr(sub, "_builder", None)
    if b is None:
        b = _IgsBuilder(sub.pres)
        for w in sub.igs:
            b.pivots[w[0][0]] = w
        object.__setattr__(sub, "_builder", b)
    return b


def trivial_subgroup(pres) -> Subgroup:
    return Subgroup(pres, ())


def full_subgroup(pres) -> Subgroup:
    return subgroup_closure(pres, [pres.gen(i) for i in range(pres.ngens)])


def subgroup_closure(pres, gens, normal=False) -> Subgroup:
    """Canonical igs of the subgroup generated by gens; with normal=True, of
    its normal closure in the ambient group."""
    b = _IgsBuilder(pres)
    for g in gens:
        b.add(collect(pres, list(g)))
    b.enforce()
    if normal:
        b.close_under_conjugation([pres.gen(i) for i in range(pres.ngens)])
    return b.result()


def contains(h: Subgroup, g) -> bool:
    return not _builder_from(h).sift(collect(h.pres, list(g)))


def full_sift(h: Subgroup, g):
    """(exponent vector over h.igs, remainder)."""
    return _builder_from(h).full_sift(collect(h.pres, list(g)))


def is_subgroup_subset(h: Subgroup, k: Subgroup) -> bool:
    """h <= k, decided on igs generators."""
    b = _builder_from(k)
    return all(not b.sift(w) for w in h.igs)


def join(h: Subgroup, k: Subgroup) -> Subgroup:
    if h.pres is not k.pres:
        raise ValueError("subgroups of different ambient groups")
    b = _IgsBuilder(h.pres)
    for w in h.igs + k.igs:
        b.add(w)
    b.enforce()
    return b.result()


def join_all(pres, subs) -> Subgroup:
    b = _IgsBuilder(pres)
    for s in subs:
        for w in s.igs:
            b.add(w)
    b.enforce()
    return b.result()


def conjugation_stable(h: Subgroup, conjugators) -> bool:
    b = _builder_from(h)
    pres = h.pres
    for g in conjugators:
        ginv = invert(pres, g)
        for p in h.igs:
            for w in (
                collect(pres, list(g) + list(p) + list(ginv)),
                collect(pres, list(ginv) + list(p) + list(g)),
            ):
                if b.sift(w):
                    return False
    return True


def is_normal(h: Subgroup) -> bool:
    return conjugation_stable(h, [h.pres.gen(i) for i in range(h.pres.ngens)])


def commutator_subgroup(h: Subgroup, k: Subgroup) -> Subgroup:
    """[H, K]: generated by commutators of igs generators, closed under
    conjugation by generators of <H, K> (sufficient, since [H, K] is
    normalized by both H and K)."""
    if h.pres is not k.pres:
        raise ValueError("subgroups of different ambient groups")
    pres = h.pres
    ambient = join(h, k)
    b = _IgsBuilder(pres)
    for x in h.igs:
        for y in k.igs:
            b.add(commutator(pres, x, y))
    b.enforce()
    b.close_under_conjugation(list(ambient.igs))
    return b.result()


def power_subgroup(h: Subgroup, p: int, coset_budget=200000) -> Subgroup:
    """The subgroup generated by all p-th powers of elements of H.

    Starts from igs-generator p-th powers, closes under H-conjugation, then
    enumerates the (finite) quotient H/S by canonical right-coset
    representatives, adding the p-th power of any representative that
    escapes.  Since S is normal in H, h^p lies in S iff the p-th power of
    its coset representative does, so termination certifies S = H^p.
    """
    pres = h.pres
    b = _IgsBuilder(pres)
    for x in h.igs:
        b.add(power(pres, x, p))
    b.enforce()
    b.close_under_conjugation(list(h.igs))

    def coset_reduce(x):
        for i in sorted(b.pivots):
            piv = b.pivots[i]
            d = piv[0][1]
            c = next((e for l, e in x if l == i), 0)
            q = c // d
            if q:
                x = multiply(pres, x, power(pres, piv, -q))
        return x

    while True:
        seen = {IDENTITY}
        frontier = [IDENTITY]
        grown = False
        while frontier:
            r = frontier.pop()
            for x in h.igs:
                for g in (x, invert(pres, x)):
                    t = coset_reduce(multiply(pres, r, g))
                    if t in seen:
                        continue
                    tp = power(pres, t, p)
                    if b.sift(tp):
                        b.add(tp)
                        b.enforce()
                        b.close_under_conjugation(list(h.igs))
                        grown = True
                        break
                    seen.add(t)
                    frontier.append(t)
                    if len(seen) > coset_budget:
                        raise BudgetExceeded("power-subgroup coset enumeration budget")
                if grown:
                    break
            if grown:
                break
        if not grown:
            return b.result()


@dataclass(frozen=True)
class LayerQuotient:
    """Abelian quotient H/K with an SNF-derived basis.

    coords(element) gives the coordinates of an element of H in the chosen
    basis of H/K, reduced modulo the divisors; lifts holds one preimage in H
    per divisor."""

    sub: Subgroup
    below: Subgroup
    invariants: object
    lifts: tuple
    _qmatrix: IntMatrix
    _kept: tuple

    def coords(self, element):
        v, rem = full_sift(self.sub, element)
        if rem:
            raise ValueError("element not in the subgroup")
        row = [0] * self._qmatrix.cols
        for k in range(self._qmatrix.cols):
            row[k] = sum(v[a] * self._qmatrix.at(a, k) for a in range(len(v)))
        out = []
        for dv, col in zip(self.invariants.divisors, self._kept):
            c = row[col]
            out.append(c % dv if dv else c)
        return tuple(out)

    def element_from_coords(self, coords):
        pres = self.sub.pres
        out = IDENTITY
        for c, lift in zip(coords, self.lifts):
            if c:
                out = multiply(pres, out, power(pres, lift, c))
        return out


def layer_quotient(h: Subgroup, k: Subgroup) -> LayerQuotient:
    """Invariant factors and basis lifts of the abelian quotient H/K.

    Preconditions are checked: K <= H, K normal in H, and [H, H] <= K."""
    pres = h.pres
    bk = _builder_from(k)
    bh = _builder_from(h)
    for w in k.igs:
        if bh.sift(w):
            raise NotNormal("K is not contained in H")
    for g in h.igs:
        ginv = invert(pres, g)
        for w in k.igs:
            if bk.sift(collect(pres, list(g) + list(w) + list(ginv))) or bk.sift(
                collect(pres, list(ginv) + list(w) + list(g))
            ):
                raise NotNormal("K is not normal in H")
    for a in h.igs:
        for c in h.igs:
            if bk.sift(commutator(pres, a, c)):
                raise NotAbelianQuotient("[H, H] is not contained in K")

    r = len(h.igs)
    rows = []
    for t, piv in enumerate(h.igs):
        i = piv[0][0]
        m = pres.rel_orders[i]
        if m:
            u = m // piv[0][1]
            v, rem = bh.full_sift(power(pres, piv, u))
            assert not rem
            row = [-x for x in v]
            row[t] += u
            rows.append(row)
    for s in range(r):
        for t in range(s + 1, r):
            v, rem = bh.full_sift(commutator(pres, h.igs[s], h.igs[t]))
            assert not rem
            if any(v):
                rows.append(v)
    for w in k.igs:
        v, rem = bh.full_sift(w)
        assert not rem
        rows.append(v)

    rel = IntMatrix.from_rows(rows, r)
    inv, basis_rows, qmat, kept = invariants_with_basis(rel, r)
    lifts = []
    for row in basis_rows:
        x = IDENTITY
        for t in range(r):
            if row[t]:
                x = multiply(pres, x, power(pres, h.igs[t], row[t]))
        lifts.append(x)
    return LayerQuotient(h, k, inv, tuple(lifts), qmat, tuple(kept))
