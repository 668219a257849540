"""Polycyclic presentations and exact element arithmetic.

A group is given by generators g_1 < ... < g_n with relative orders (0 for
infinite), power relations g_i^{m_i} = word(g_{>i}), and conjugation
relations g_j^(g_i^e) = g_i^{-e} g_j g_i^e = word(g_{>=j}) for i < j and
e = +-1.  Omitted conjugation pairs commute; a missing direction is derived
from the given one by triangular back-substitution.

Elements are tuples of (generator index, exponent) with strictly increasing
indices; exponents of finite-order generators are reduced into [0, order).
Normal forms are unique, so element equality is tuple equality.  Collection
is from the left at the leftmost violation, which terminates on every
consistent presentation; a step budget guards against inconsistent input.

Presentations are immutable after construction and safe to share across
threads; the internal conjugation cache is a plain dict (atomic updates).
"""

from __future__ import annotations

from .errors import BudgetExceeded, InvalidPresentation, UnknownGenerator

Word = tuple  # tuple[(int, int), ...]

IDENTITY: Word = ()


def _merge(letters):
    out = []
    for i, e in letters:
        if e == 0:
            continue
        if out and out[-1][0] == i:
            out[-1][1] += e
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([i, e])
    return out


def _modinv(a, m):
    g, x = _xgcd(a % m, m)
    if g != 1:
        return None
    return x % m


def _xgcd(a, b):
    x0, x1 = 1, 0
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
    return a, x0


class PcPresentation:
    """Consistent polycyclic presentation with optional generator weights.

    conj maps (i, j, e) for i < j, e in {1, -1} to the normal word equal to
    g_i^{-e} g_j g_i^{e}.  power_rhs maps i to the normal word equal to
    g_i^{rel_order[i]} for finite-order generators.
    """

    def __init__(
        self,
        names,
        rel_orders=None,
        weights=None,
        power_rhs=None,
        conj=None,
        collection_budget=10**7,
        closure_budget=10**4,
    ):
        self.names = tuple(names)
        n = len(self.names)
        if len(set(self.names)) != n:
            raise InvalidPresentation("duplicate generator names")
        self.index = {nm: i for i, nm in enumerate(self.names)}
        self.rel_orders = tuple(rel_orders) if rel_orders else (0,) * n
        if len(self.rel_orders) != n or any(m < 0 for m in self.rel_orders):
            raise InvalidPresentation("bad relative orders")
        self.weights_asserted = weights is not None
        self.weights = tuple(weights) if weights is not None else (1,) * n
        if len(self.weights) != n or any(w < 1 for w in self.weights):
            raise InvalidPresentation("bad weights")
        self.power_rhs = dict(power_rhs or {})
        self.collection_budget = collection_budget
        self.closure_budget = closure_budget
        self._conj_cache = {}
        self._op_cache = {}
        raw = dict(conj or {})
        self._validate_tables(raw)
        self.conj = raw
        self._complete_conj()
        if self.weights_asserted:
            self._check_weight_filtration()

    @property
    def ngens(self):
        return len(self.names)

    def order(self, i):
        return self.rel_orders[i]

    def _validate_word(self, word, min_index, what):
        prev = -1
        for i, e in word:
            if not 0 <= i < self.ngens:
                raise InvalidPresentation(f"{what}: generator index {i} out of range")
            if i < min_index:
                raise InvalidPresentation(f"{what}: index {i} below allowed minimum {min_index}")
            if i <= prev:
                raise InvalidPresentation(f"{what}: word not in normal order")
            m = self.rel_orders[i]
            if e == 0 or (m and not 0 <= e < m):
                raise InvalidPresentation(f"{what}: exponent {e} out of range")
            prev = i

    def _validate_tables(self, raw):
        for i, word in self.power_rhs.items():
            if self.rel_orders[i] == 0:
                raise InvalidPresentation("power relation on infinite-order generator")
            self._validate_word(word, i + 1, f"power rhs of {self.names[i]}")
        for i in range(self.ngens):
            if self.rel_orders[i] and i not in self.power_rhs:
                self.power_rhs[i] = IDENTITY
        for (i, j, e), word in raw.items():
            if not (0 <= i < j < self.ngens) or e not in (1, -1):
                raise InvalidPresentation(f"bad conjugation key ({i}, {j}, {e})")
            self._validate_word(word, j, f"conjugate of {self.names[j]} by {self.names[i]}^{e}")
            if not word or word[0][0] != j or not self._is_unit(word[0][1], j):
                raise InvalidPresentation(
                    f"conjugate of {self.names[j]} must lead with a unit power of it"
                )

    def _is_unit(self, u, j):
        m = self.rel_orders[j]
        if m:
            return _modinv(u, m) is not None
        return u in (1, -1)

    def _complete_conj(self):
        """Derive, per lower generator, the missing conjugation direction.

        Deriving direction e at level i inverts the direction -e map on the
        tail subgroup by triangular back-substitution; this only collects
        words above level i, whose tables are already complete (descending
        loop).  Levels mixing "only +1 given" with "only -1 given" pairs are
        rejected.
        """
        conj = self.conj
        for i in range(self.ngens - 2, -1, -1):
            plus = {j for (ii, j, e) in conj if ii == i and e == 1}
            minus = {j for (ii, j, e) in conj if ii == i and e == -1}
            need_minus = plus - minus
            need_plus = minus - plus
            if need_minus and need_plus:
                raise InvalidPresentation(
                    f"conjugation directions for {self.names[i]} are mixed; give "
                    "either one direction for all pairs, or both"
                )
            if not need_minus and not need_plus:
                continue
            target_e = -1 if need_minus else 1
            targets = need_minus or need_plus
            inv_img = {}
            for j in range(self.ngens - 1, i, -1):
                w = conj.get((i, j, -target_e))
                if w is None:
                    inv_img[j] = ((j, 1),)
                    continue
                u = w[0][1]
                m = self.rel_orders[j]
                s = _modinv(u, m) if m else u
                img_s = power(self, w, s)
                r = multiply(self, invert(self, img_s), ((j, 1),))
                if any(l <= j for l, _ in r):
                    raise InvalidPresentation(
                        f"cannot invert conjugation at {self.names[j]}"
                    )
                y = IDENTITY
                for l, f in r:
                    y = multiply(self, y, power(self, inv_img[l], f))
                inv_img[j] = multiply(self, power(self, ((j, 1),), s), y)
            for j in targets:
                word = inv_img[j]
                self._validate_word(word, j, "derived conjugate")
                conj[(i, j, target_e)] = word

    def _check_weight_filtration(self):
        # asserted weights must make the conjugation relations compatible
        # with an N-series: [g_i, g_j] lies among generators of weight
        # >= weight(i) + weight(j)
        for (i, j, e), word in self.conj.items():
            need = self.weights[i] + self.weights[j]
            commpart = multiply(self, invert(self, ((j, 1),)), word)
            for l, _ in commpart:
                if self.weights[l] < need:
                    raise InvalidPresentation(
                        f"declared weights are not N-series compatible at "
                        f"[{self.names[i]}, {self.names[j]}]"
                    )

    # -- parsing / printing ------------------------------------------------

    def word_from_pairs(self, pairs):
        letters = []
        for name, e in pairs:
            if name not in self.index:
                raise UnknownGenerator(name)
            letters.append((self.index[name], e))
        return collect(self, letters)

    def parse_word(self, text):
        """Parse a word like "a^2 b^-1 c"; "1" or "" is the identity."""
        text = text.strip()
        if text in ("", "1"):
            return IDENTITY
        letters = []
        for tok in text.split():
            if "^" in tok:
                name, _, exp = tok.partition("^")
                letters.append((name, int(exp)))
            else:
                letters.append((tok, 1))
        return self.word_from_pairs(letters)

    def format_word(self, word):
        if not word:
            return "1"
        parts = []
        for i, e in word:
            parts.append(self.names[i] if e == 1 else f"{self.names[i]}^{e}")
        return " ".join(parts)

    def gen(self, name_or_index):
        i = self.index[name_or_index] if isinstance(name_or_index, str) else name_or_index
        return ((i, 1),)

    def __repr__(self):
        return f"PcPresentation({', '.join(self.names)})"


def collect(pres: PcPresentation, letters) -> Word:
    """Normal form of an arbitrary word, by collection from the left.

    Rewrites the leftmost violation: an out-of-range exponent of a
    finite-order generator, or an adjacent pair g_j^d g_i^e with j > i
    (replaced by g_i^e (g_j^{g_i^e})^d).  Deterministic; terminates for
    every consistent presentation, bounded by the collection budget.
    """
    w = _merge(letters)
    orders = pres.rel_orders
    budget = pres.collection_budget
    steps = 0
    k = 0
    while k < len(w):
        steps += 1
        if steps > budget:
            raise BudgetExceeded("collection step budget exhausted")
        i, e = w[k]
        m = orders[i]
        if m and not 0 <= e < m:
            q, r = divmod(e, m)
            rep = [[i, r]] if r else []
            pw = pres.power_rhs[i]
            if q != 0 and pw:
                pw_q = power(pres, pw, q)
                rep.extend([l, f] for l, f in pw_q)
            w[k : k + 1] = rep
            k = max(0, k - 1)
            continue
        if k + 1 < len(w) and w[k + 1][0] < i:
            i2, e2 = w[k + 1]
            conj = _conj_gen_by_power(pres, i, i2, e2)
            rep = [[i2, e2]]
            if conj:
                conj_d = power(pres, conj, e)
                rep.extend([l, f] for l, f in conj_d)
            w[k : k + 2] = rep
            k = max(0, k - 1)
            continue
        if k + 1 < len(w) and w[k + 1][0] == i:
            e2 = w[k + 1][1]
            if e + e2 == 0:
                w[k : k + 2] = []
            else:
                w[k : k + 2] = [[i, e + e2]]
            k = max(0, k - 1)
            continue
        k += 1
    return tuple((i, e) for i, e in w)


def _conj_gen_by_power(pres, j, i, e) -> Word:
    """Normal form of g_j^{g_i^e} = g_i^{-e} g_j g_i^{e}, i < j, any e."""
    key = (j, i, e)
    cached = pres._conj_cache.get(key)
    if cached is not None:
        return cached
    sign = 1 if e > 0 else -1
    x: Word = ((j, 1),)
    for _ in range(abs(e)):
        x = _conj_element_once(pres, x, i, sign)
    pres._conj_cache[key] = x
    return x


def _conj_element_once(pres, x, i, sign) -> Word:
    """Normal form of g_i^{-sign} x g_i^{sign} for x mentioning only
    generators of index > i."""
    key = (i, sign, x)
    cached = pres._conj_cache.get(key)
    if cached is not None:
        return cached
    letters = []
    for l, f in x:
        img = pres.conj.get((i, l, sign))
        if img is None:
            letters.append((l, f))
        elif len(img) == 1:
            letters.append((img[0][0], img[0][1] * f))
        elif -3 <= f <= 3:
            rep = img if f > 0 else invert(pres, img)
            for _ in range(abs(f)):
                letters.extend(rep)
        else:
            letters.extend(power(pres, img, f))
    out = collect(pres, letters)
    pres._conj_cache[key] = out
    return out


_OP_CACHE_LIMIT = 1 << 20


def multiply(pres, x, y) -> Word:
    cache = pres._op_cache
    key = (tuple(x), tuple(y))
    out = cache.get(key)
    if out is None:
        out = collect(pres, list(x) + list(y))
        if len(cache) < _OP_CACHE_LIMIT:
            cache[key] = out
    return out


def invert(pres, x) -> Word:
    cache = pres._op_cache
    key = ("inv", tuple(x))
    out = cache.get(key)
    if out is None:
        out = collect(pres, [(i, -e) for i, e in reversed(x)])
        if len(cache) < _OP_CACHE_LIMIT:
            cache[key] = out
    return out


def power(pres, x, k) -> Word:
    if k == 0 or not x:
        return IDENTITY
    x = tuple(x)
    cache = pres._op_cache
    key = ("pow", x, k)
    out = cache.get(key)
    if out is not None:
        return out
    if k < 0:
        base = invert(pres, x)
        kk = -k
    else:
        base = collect(pres, list(x))
        kk = k
    acc = IDENTITY
    while kk:
        if kk & 1:
            acc = multiply(pres, acc, base)
        kk >>= 1
        if kk:
            base = multiply(pres, base, base)
    if len(cache) < _OP_CACHE_LIMIT:
        cache[key] = acc
    return acc


def conjugate(pres, x, g) -> Word:
    """Normal form of g^{-1} x g."""
    return collect(pres, [(i, -e) for i, e in reversed(g)] + list(x) + list(g))


def commutator(pres, x, y) -> Word:
    """[x, y] = x y x^-1 y^-1."""
    xi = invert(pres, x)
    yi = invert(pres, y)
    return collect(pres, list(x) + list(y) + list(xi) + list(yi))


def is_identity(x) -> bool:
    return not x


def leading(x):
    """(index, exponent) of the first letter of a nontrivial normal word."""
    return x[0]


def random_element(pres, rng, max_exp=3) -> Word:
    letters = []
    for i in range(pres.ngens):
        m = pres.rel_orders[i]
        e = rng.randrange(m) if m else rng.randint(-max_exp, max_exp)
        if e:
            letters.append((i, e))
    return collect(pres, letters)


def random_word(pres, rng, length=6, max_exp=2):
    """An unreduced random word, useful for exercising collection."""
    letters = []
    for _ in range(length):
        i = rng.randrange(pres.ngens)
        e = rng.randint(-max_exp, max_exp)
        if e:
            letters.append((i, e))
    return letters


def consistency_check(pres) -> list:
    """Overlap (associativity) report; empty iff the presentation is
    consistent.  Violations are data, not exceptions."""
    violations = []
    n = pres.ngens

    def note(kind, gens, lhs, rhs):
        if lhs != rhs:
            violations.append(
                {
                    "kind": kind,
                    "generators": tuple(pres.names[g] for g in gens),
                    "lhs": pres.format_word(lhs),
                    "rhs": pres.format_word(rhs),
                }
            )

    g = [pres.gen(i) for i in range(n)]
    for k in range(n):
        for j in range(k):
            gkj = multiply(pres, g[k], g[j])
            for i in range(j):
                lhs = multiply(pres, gkj, g[i])
                rhs = multiply(pres, g[k], multiply(pres, g[j], g[i]))
                note("associativity", (k, j, i), lhs, rhs)
    for j in range(n):
        mj = pres.rel_orders[j]
        for i in range(j):
            mi = pres.rel_orders[i]
            if mj:
                lhs = multiply(pres, pres.power_rhs[j], g[i])
                rhs = multiply(pres, power(pres, g[j], mj - 1), multiply(pres, g[j], g[i]))
                note("power overlap", (j, j, i), lhs, rhs)
            if mi:
                lhs = multiply(pres, g[j], pres.power_rhs[i])
                rhs = multiply(pres, multiply(pres, g[j], g[i]), power(pres, g[i], mi - 1))
                note("power overlap", (j, i, i), lhs, rhs)
            lhs = multiply(pres, multiply(pres, g[j], invert(pres, g[i])), g[i])
            note("inverse pair", (j, i), lhs, g[j])
            lhs = multiply(pres, multiply(pres, g[j], g[i]), invert(pres, g[i]))
            note("inverse pair", (j, i), lhs, g[j])
    for i in range(n):
        if pres.rel_orders[i]:
            lhs = multiply(pres, g[i], pres.power_rhs[i])
            rhs = multiply(pres, pres.power_rhs[i], g[i])
            note("power self-overlap", (i,), lhs, rhs)
    return violations
