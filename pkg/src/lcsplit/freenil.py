"""Free Lie ring with Hall bases, the truncated Magnus embedding, and a
free-nilpotent presentation builder.

These are the independent oracles for the free-group computations: Magnus
depth decides lower-central membership in free groups, and the presentation
builder converts the conjugation relations of a free nilpotent quotient
into polycyclic normal form by peeling Magnus expansions degree by degree
against the Hall basis.

Hall trees are nested tuples over leaf indices; the Hall order is
degree-lexicographic with leaves ordered by generator index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import PeelFailure
from .intlinalg import IntMatrix, hermite_normal_form, solve_in_lattice
from .pcengine import PcPresentation

MAX_TRUNCATION = 6  # monomial count grows as k^degree


def tree_degree(t) -> int:
    return 1 if isinstance(t, int) else tree_degree(t[0]) + tree_degree(t[1])


def _tree_key(t):
    if isinstance(t, int):
        return (1, 0, t)
    return (tree_degree(t), 1, _tree_key(t[0]), _tree_key(t[1]))


def _is_hall(t, hall_set):
    if isinstance(t, int):
        return True
    u, v = t
    if u not in hall_set or v not in hall_set:
        return False
    if _tree_key(u) >= _tree_key(v):
        return False
    if not isinstance(v, int) and _tree_key(v[0]) > _tree_key(u):
        return False
    return True


def mobius(n: int) -> int:
    if n == 1:
        return 1
    out = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            out = -out
        d += 1
    if n > 1:
        out = -out
    return out


def witt_rank(k: int, n: int) -> int:
    """Rank of the degree-n part of the free Lie ring on k generators:
    (1/n) * sum over d | n of mobius(d) * k^(n/d)."""
    if k < 1 or n < 1:
        raise ValueError("rank and degree must be positive")
    total = sum(mobius(d) * k ** (n // d) for d in range(1, n + 1) if n % d == 0)
    assert total % n == 0
    return total // n


@lru_cache(maxsize=None)
def hall_basis(k: int, c: int):
    """Hall trees per degree 1..c, each list in canonical order; the
    degree-d list has exactly witt_rank(k, d) entries."""
    if k < 1 or c < 1:
        raise ValueError("rank and degree must be positive")
    by_degree = [list(range(k))]
    hall_set = set(range(k))
    for d in range(2, c + 1):
        trees = []
        for da in range(1, d):
            for u in by_degree[da - 1]:
                for v in by_degree[d - da - 1]:
                    t = (u, v)
                    if _is_hall(t, hall_set):
                        trees.append(t)
        trees.sort(key=_tree_key)
        hall_set.update(trees)
        by_degree.append(trees)
    for d in range(1, c + 1):
        assert len(by_degree[d - 1]) == witt_rank(k, d)
    return tuple(tuple(ts) for ts in by_degree)


def tree_name(t, names) -> str:
    if isinstance(t, int):
        return names[t]
    return f"[{tree_name(t[0], names)},{tree_name(t[1], names)}]"


# -- Magnus series ------------------------------------------------------------


@dataclass(frozen=True)
class MagnusSeries:
    """Truncated power series in k noncommuting variables; monomials are
    tuples of variable indices.  Series of group elements have constant
    coefficient 1."""

    k: int
    truncation: int
    coeffs: tuple  # sorted ((monomial, coefficient), ...)

    def coeff(self, mono):
        return dict(self.coeffs).get(mono, 0)

    def as_dict(self):
        return dict(self.coeffs)

    def homogeneous(self, d):
        return {m: c for m, c in self.coeffs if len(m) == d}

    def is_one(self):
        return self.coeffs == (((), 1),)


def _series(k, truncation, data) -> MagnusSeries:
    items = tuple(sorted((m, c) for m, c in data.items() if c))
    return MagnusSeries(k, truncation, items)


def _series_mul(a: dict, b: dict, trunc: int) -> dict:
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            if len(ma) + len(mb) > trunc:
                continue
            m = ma + mb
            out[m] = out.get(m, 0) + ca * cb
    return {m: c for m, c in out.items() if c}


def _gen_series(i, e, trunc):
    # x_i -> 1 + X_i; x_i^-1 -> 1 - X_i + X_i^2 - ...
    out = {(): 1}
    step = {(): 1, (i,): 1} if e > 0 else {
        tuple([i] * d): (-1) ** d for d in range(trunc + 1)
    }
    for _ in range(abs(e)):
        out = _series_mul(out, step, trunc)
    return out


def magnus_expand(word, k, c) -> MagnusSeries:
    """Multiplicative Magnus expansion of a free-group word, truncated at
    total degree c.  The word is a sequence of (generator, exponent)."""
    if c > MAX_TRUNCATION:
        raise ValueError(f"truncation {c} exceeds the supported maximum {MAX_TRUNCATION}")
    acc = {(): 1}
    for i, e in word:
        if not 0 <= i < k:
            raise ValueError(f"word mentions variable {i} outside rank {k}")
        if e:
            acc = _series_mul(acc, _gen_series(i, e, c), c)
    return _series(k, c, acc)


def magnus_depth(word, k, c):
    """Least degree with a nonzero term in magnus_expand(word) - 1, or None
    when every term up to the truncation vanishes (depth >= c + 1)."""
    s = magnus_expand(word, k, c)
    best = None
    for m, coeff in s.coeffs:
        if m == ():
            continue
        if coeff and (best is None or len(m) < best):
            best = len(m)
    return best


# -- free Lie elements --------------------------------------------------------


@dataclass(frozen=True)
class FreeLieElement:
    """Integer combination of canonical Hall trees of one degree."""

    k: int
    degree: int
    coeffs: tuple  # sorted ((tree, coefficient), ...)

    def as_dict(self):
        return dict(self.coeffs)

    def is_zero(self):
        return not self.coeffs


def lie_element(k, degree, data) -> FreeLieElement:
    items = tuple(sorted(((t, c) for t, c in data.items() if c), key=lambda tc: _tree_key(tc[0])))
    return FreeLieElement(k, degree, items)


@lru_cache(maxsize=None)
def tree_poly(t, trunc=MAX_TRUNCATION):
    """Associative polynomial of a Lie tree under leaf -> X_leaf,
    [u, v] -> uv - vu."""
    if isinstance(t, int):
        return ((tuple([t]), 1),)
    pu = dict(tree_poly(t[0], trunc))
    pv = dict(tree_poly(t[1], trunc))
    out = {}
    for mu, cu in pu.items():
        for mv, cv in pv.items():
            out[mu + mv] = out.get(mu + mv, 0) + cu * cv
            out[mv + mu] = out.get(mv + mu, 0) - cu * cv
    return tuple(sorted((m, c) for m, c in out.items() if c))


@lru_cache(maxsize=None)
def _hall_matrix(k, d):
    """Rows: Magnus polynomials of the degree-d Hall trees; columns indexed
    by all degree-d monomials.  Hall trees are a Z-basis of the free Lie
    ring, so the rows are independent.  Returns (matrix, HNF, transform,
    monomial index)."""
    trees = hall_basis(k, max(d, 1))[d - 1]
    monos = {}

    def mono_index(m):
        if m not in monos:
            monos[m] = len(monos)
        return monos[m]

    rows = []
    for t in trees:
        row = {}
        for m, c in tree_poly(t):
            row[mono_index(m)] = c
        rows.append(row)
    ncols = len(monos)
    mat = IntMatrix.from_rows(
        [[r.get(j, 0) for j in range(ncols)] for r in rows], ncols
    )
    h, u = hermite_normal_form(mat)
    return trees, mat, h, u, dict(monos)


def hall_coordinates(k, d, poly) -> list:
    """Express a homogeneous degree-d Lie polynomial (monomial -> coeff) in
    the Hall basis; raises PeelFailure when it is not an integral
    combination (i.e. not a Lie element)."""
    trees, mat, h, u, monos = _hall_matrix(k, d)
    vec = [0] * mat.cols
    for m, c in poly.items():
        if m not in monos:
            if c:
                raise PeelFailure("polynomial involves a monomial outside the Lie span")
            continue
        vec[monos[m]] = c
    y = solve_in_lattice(h, vec)
    if y is None:
        raise PeelFailure("homogeneous component is not an integral Lie element")
    coords = [0] * len(trees)
    for s in range(len(y)):
        if y[s]:
            for t in range(len(trees)):
                coords[t] += y[s] * u.at(s, t)
    check = {}
    for t, c in zip(trees, coords):
        if c:
            for m, cc in tree_poly(t):
                check[m] = check.get(m, 0) + c * cc
    if {m: c for m, c in check.items() if c} != {m: c for m, c in poly.items() if c}:
        raise PeelFailure("Hall coordinate solve verification failed")
    return coords


def lie_bracket(x: FreeLieElement, y: FreeLieElement) -> FreeLieElement:
    """Bracket expanded into the canonical Hall basis, computed through the
    Magnus image (rock-solid against rewriting mistakes: Hall trees are a
    Z-basis of each homogeneous component)."""
    if x.k != y.k:
        raise ValueError("mixed ranks")
    d = x.degree + y.degree
    if d > MAX_TRUNCATION:
        raise ValueError("bracket degree exceeds the supported truncation")
    poly = {}
    for tx, cx in x.coeffs:
        px = dict(tree_poly(tx))
        for ty, cy in y.coeffs:
            py = dict(tree_poly(ty))
            for mu, cu in px.items():
                for mv, cv in py.items():
                    coeff = cx * cy * cu * cv
                    poly[mu + mv] = poly.get(mu + mv, 0) + coeff
                    poly[mv + mu] = poly.get(mv + mu, 0) - coeff
    coords = hall_coordinates(x.k, d, poly)
    trees = hall_basis(x.k, d)[d - 1]
    return lie_element(x.k, d, dict(zip(trees, coords)))


def basis_element(k, t) -> FreeLieElement:
    return lie_element(k, tree_degree(t), {t: 1})


# -- free group words ---------------------------------------------------------


def free_reduce(word):
    out = []
    for i, e in word:
        if e == 0:
            continue
        if out and out[-1][0] == i:
            out[-1][1] += e
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([i, e])
    return [(i, e) for i, e in out]


def free_invert(word):
    return [(i, -e) for i, e in reversed(word)]


def tree_word(t):
    """Group word realizing a Lie tree as a nested commutator."""
    if isinstance(t, int):
        return [(t, 1)]
    wu, wv = tree_word(t[0]), tree_word(t[1])
    return free_reduce(wu + wv + free_invert(wu) + free_invert(wv))


def random_free_word(k, rng, length=8, max_exp=2):
    word = []
    for _ in range(length):
        e = rng.randint(-max_exp, max_exp)
        if e:
            word.append((rng.randrange(k), e))
    return free_reduce(word)


# -- the free nilpotent presentation builder ----------------------------------


def _peel(word, k, c, flat_trees):
    """Exponents expressing the class-c residue of a free-group word as the
    ordered product of Hall-tree commutator words.

    Degree by degree: the residual's lowest homogeneous Magnus term is a Lie
    element (Magnus' theorem), expanded in the Hall basis by integer linear
    algebra; the matching basis product is divided off on the left and the
    peel recurses one degree deeper."""
    residual = free_reduce(word)
    exponents = {}
    for d in range(1, c + 1):
        s = magnus_expand(residual, k, d)
        low = {}
        for m, coeff in s.coeffs:
            if 0 < len(m) < d and coeff:
                raise PeelFailure(f"residual has an unexpected degree-{len(m)} term")
            if len(m) == d:
                low[m] = coeff
        if not low:
            continue
        coords = hall_coordinates(k, d, low)
        trees = hall_basis(k, d)[d - 1]
        divisor = []
        for t, e in zip(trees, coords):
            if e:
                exponents[t] = e
                w = tree_word(t)
                if e < 0:
                    w = free_invert(w)
                for _ in range(abs(e)):
                    divisor.extend(w)
        residual = free_reduce(free_invert(divisor) + residual)
    return [(flat_trees.index(t), e) for t, e in sorted(exponents.items(), key=lambda te: _tree_key(te[0]))]


def free_nilpotent_pcp(k: int, c: int, prefix: str = "x") -> PcPresentation:
    """Polycyclic presentation of the free nilpotent group of rank k and
    class c: generators are the Hall trees of degree <= c realized as nested
    commutators, weights are the degrees, all relative orders infinite."""
    if c > MAX_TRUNCATION:
        raise ValueError(f"class {c} exceeds the supported maximum {MAX_TRUNCATION}")
    basis = hall_basis(k, c)
    flat = [t for ts in basis for t in ts]
    leaf_names = [f"{prefix}{i + 1}" for i in range(k)]
    names = []
    for d, ts in enumerate(basis, start=1):
        for pos, t in enumerate(ts, start=1):
            names.append(leaf_names[t] if d == 1 else f"{prefix}w{d}_{pos}")
    weights = [tree_degree(t) for t in flat]
    words = [tree_word(t) for t in flat]
    conj = {}
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            if weights[i] + weights[j] > c:
                continue  # the commutator is trivial in the quotient
            for eps in (1, -1):
                wi = words[i] if eps > 0 else free_invert(words[i])
                conjugate = free_reduce(free_invert(wi) + words[j] + wi)
                normal = _peel(conjugate, k, c, flat)
                if normal == [(j, 1)]:
                    continue
                if not normal or normal[0] != (j, 1):
                    raise PeelFailure("conjugate does not lead with the conjugated generator")
                if any(l < j for l, _ in normal):
                    raise PeelFailure("conjugate mentions earlier generators")
                conj[(i, j, eps)] = tuple(normal)
    pairs = {(i, j) for (i, j, _) in conj}
    for i, j in pairs:
        for eps in (1, -1):
            if (i, j, eps) not in conj:
                conj[(i, j, eps)] = ((j, 1),)
    pres = PcPresentation(names=names, weights=weights, conj=conj)
    pres.free_nilpotent_data = (k, tuple(flat))  # lets actions on leaves extend
    return pres


def pc_word_from_free(pres: PcPresentation, word):
    """Image of a free-group word over the rank-k leaves inside a
    free_nilpotent_pcp presentation (leaves are the first k generators)."""
    from .pcengine import collect

    return collect(pres, list(word))
