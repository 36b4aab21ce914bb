import os
import subprocess
import sys

import numpy as np
import pytest

from geneo_recon import _backend, geneo
from geneo_recon.patterns import DiskMask, Pattern, PatternLibrary
from geneo_recon.tda import sublevel_persistence
from helpers import random_sampling

both = pytest.mark.skipif(len(_backend.available()) < 2, reason="compiled kernels not built")


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_env_var_forces_fallback():
    env = dict(os.environ, GENEO_RECON_BACKEND="python")
    out = subprocess.run(
        [sys.executable, "-c", "import geneo_recon; print(geneo_recon.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    ).stdout.strip()
    assert out == "python"


@both
def test_kernels_bit_identical(rng):
    py, cy = _backend.get("python"), _backend.get("cython")
    r = 6
    lib = PatternLibrary(r, [Pattern(rng.random((2 * r + 1,) * 2), DiskMask(r)) for _ in range(9)])
    for _ in range(5):
        s = random_sampling(rng, 41, 37, int(rng.integers(1, 400)))
        a = geneo.reconstruct_sampling(s, lib, chunk=4, kernels=py)
        b = geneo.reconstruct_sampling(s, lib, chunk=4, kernels=cy)
        assert a.phi_rec.values.tobytes() == b.phi_rec.values.tobytes()
        assert a.best_confidence.tobytes() == b.best_confidence.tobytes()
        assert np.array_equal(a.best_pattern, b.best_pattern)
        for p in lib:
            fa = geneo.confidence_field(s, p, kernels=py).grid.values
            fb = geneo.confidence_field(s, p, kernels=cy).grid.values
            assert fa.tobytes() == fb.tobytes()


@both
def test_persistence_identical(rng):
    py, cy = _backend.get("python"), _backend.get("cython")
    for _ in range(10):
        v = rng.integers(0, 6, (15, 11)).astype(float)
        assert [d.as_pairs() for d in sublevel_persistence(v, py)] == [d.as_pairs() for d in sublevel_persistence(v, cy)]
