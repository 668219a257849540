"""The standard example groups and extensions used by the test and
acceptance suites: the Klein bottle group, the discrete Heisenberg group as
a split extension, the twisted Klein-by-Z group, the Formanek-Procesi
group truncated to a nilpotency class, direct products, and a seeded
extension acting trivially on the fiber's abelianization.

Builders are cached: presentations are immutable and shared freely.
"""

from __future__ import annotations

import random
from functools import lru_cache

from .extensions import SplitExtension, action_from_images, build_semidirect, direct_product
from .freenil import free_nilpotent_pcp
from .pcengine import PcPresentation


@lru_cache(maxsize=None)
def zee(name="a") -> PcPresentation:
    return PcPresentation(names=(name,))


@lru_cache(maxsize=None)
def zee_n(n: int, prefix="z") -> PcPresentation:
    return PcPresentation(names=tuple(f"{prefix}{i + 1}" for i in range(n)))


@lru_cache(maxsize=None)
def cyclic(m: int, name="g") -> PcPresentation:
    return PcPresentation(names=(name,), rel_orders=(m,))


@lru_cache(maxsize=None)
def heisenberg_group() -> PcPresentation:
    """Discrete Heisenberg group: b^a = b c with c central."""
    return PcPresentation(names=("a", "b", "c"), conj={(0, 1, 1): ((1, 1), (2, 1))})


@lru_cache(maxsize=None)
def klein_bottle_group() -> PcPresentation:
    """t a t^-1 = a^-1."""
    return PcPresentation(names=("t", "a"), conj={(0, 1, 1): ((1, -1),)})


@lru_cache(maxsize=None)
def klein_extension() -> SplitExtension:
    """The Klein bottle group as Z x| Z with inversion monodromy."""
    fiber = zee("a")
    base = zee("t")
    action = action_from_images(base, fiber, {"t": {"a": "a^-1"}})
    return build_semidirect(fiber, base, action, name="klein")


@lru_cache(maxsize=None)
def heisenberg_extension() -> SplitExtension:
    """Heisenberg as Z^2 x| Z: the unipotent monodromy sends b to b a and
    fixes a (fiber generators ordered so the action is triangular)."""
    fiber = PcPresentation(names=("b", "a"))
    base = zee("t")
    action = action_from_images(base, fiber, {"t": {"b": "b a"}})
    return build_semidirect(fiber, base, action, name="heisenberg")


@lru_cache(maxsize=None)
def twisted_klein_extension() -> SplitExtension:
    """Klein-by-Z with s acting by t -> t a, a -> a: trivial on the
    torsion-free abelianization of the Klein group but not on its
    abelianization."""
    fiber = klein_bottle_group()
    base = zee("s")
    action = action_from_images(base, fiber, {"s": {"t": "t a"}})
    return build_semidirect(fiber, base, action, name="twisted_klein")


@lru_cache(maxsize=None)
def poison_extension(c: int = 4) -> SplitExtension:
    """The Formanek-Procesi group with both free factors truncated at class
    c.  The moving fiber generator is listed first (a1), so the monodromy
    a1 -> a1 a_{i+1} is triangular; this relabels the classical
    presentation, which moves the last generator."""
    fiber = free_nilpotent_pcp(3, c, prefix="a")
    base = free_nilpotent_pcp(2, c, prefix="c")
    action = action_from_images(
        base, fiber, {"c1": {"a1": "a1 a2"}, "c2": {"a1": "a1 a3"}}
    )
    return build_semidirect(fiber, base, action, name="poison")


@lru_cache(maxsize=None)
def heisenberg_z_direct_product() -> SplitExtension:
    return direct_product(heisenberg_group(), zee_n(2, prefix="u"), name="heis_x_z2")


@lru_cache(maxsize=None)
def z_direct_product() -> SplitExtension:
    return direct_product(zee("a"), zee("t"), name="z_x_z")


@lru_cache(maxsize=None)
def random_ia_extension(seed: int = 2024) -> SplitExtension:
    """A seeded extension of free_nilpotent(2, 3) by Z whose monodromy is
    the identity on the fiber's abelianization (an IA automorphism), so the
    collapse theorems apply with every flag true."""
    rng = random.Random(seed)
    fiber = free_nilpotent_pcp(2, 3, prefix="x")
    base = zee("s")
    derived = [name for name in fiber.names if name.startswith("xw")]
    words = {}
    for leaf in ("x1", "x2"):
        exps = [rng.randint(-2, 2) for _ in derived]
        tail = " ".join(
            f"{name}^{e}" for name, e in zip(derived, exps) if e
        )
        words[leaf] = f"{leaf} {tail}".strip()
    action = action_from_images(base, fiber, {"s": words})
    return build_semidirect(fiber, base, action, name=f"ia_random_{seed}")


def theorem_corpus(poison_class: int = 4):
    """The extension corpus exercised by the decomposition theorem suites."""
    return (
        klein_extension(),
        heisenberg_extension(),
        z_direct_product(),
        heisenberg_z_direct_product(),
        twisted_klein_extension(),
        random_ia_extension(),
        poison_extension(poison_class),
    )
