"""Random fixtures shared across test modules."""

import numpy as np

from geneo_recon.grid import GridSignal, SparseSampling


def random_sampling(rng, width, height, n, values=None):
    flat = np.sort(rng.choice(width * height, size=n, replace=False))
    ys, xs = np.divmod(flat, width)
    if values is None:
        values = rng.random(n)
    return SparseSampling(width, height, xs, ys, values)


def random_grid(rng, width, height):
    return GridSignal(rng.random((height, width)))


# one "PASS|FAIL criterion N: ..." line per acceptance criterion
ACCEPTANCE: list[str] = []


def record(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
