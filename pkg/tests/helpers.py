"""Shared test utilities: deterministic random rational arrays."""

import random
from fractions import Fraction

from pseudomat.comb_moments import ArrayShape, MomentMatrix

SHAPE_FACTORIES = (
    ArrayShape.square,
    ArrayShape.lower_triangular,
    ArrayShape.diagonal,
)


def random_moment_matrix(rng: random.Random, r: int | None = None,
                         shape: ArrayShape | None = None) -> MomentMatrix:
    """A random rational MomentMatrix; out-of-shape entries forced to zero."""
    if r is None:
        r = rng.choice((1, 2, 3))
    if shape is None:
        shape = rng.choice(SHAPE_FACTORIES)()
    u = [
        [
            Fraction(rng.randint(0, 8), rng.randint(1, 6))
            if shape.contains(p, q) else Fraction(0)
            for q in range(1, r + 1)
        ]
        for p in range(1, r + 1)
    ]
    raw = [Fraction(rng.randint(1, 6)) for _ in range(r)]
    total = sum(raw)
    d = [x / total for x in raw]
    return MomentMatrix.from_values(u, d, shape)


def random_matrix_suite(seed: int, count: int) -> list[MomentMatrix]:
    """Deterministic list of random arrays cycling through the three shapes."""
    rng = random.Random(seed)
    return [
        random_moment_matrix(rng, shape=SHAPE_FACTORIES[k % 3]())
        for k in range(count)
    ]
