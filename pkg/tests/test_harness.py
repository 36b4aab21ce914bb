import json

import numpy as np
import pytest

from geneo_recon import harness
from geneo_recon.grid import GridSignal, load_grid, save_grid
from geneo_recon.harness import ExperimentConfig, run, run_leave_one_out, run_seed, run_zero_shot
from geneo_recon.patterns import tile_circles
from geneo_recon.sampling import SamplingSpec, sample_uniform

SIZE, RADIUS = 24, 4


@pytest.fixture
def areas(tmp_path):
    rng = np.random.default_rng(42)
    paths = []
    for k in range(9):
        p = tmp_path / f"area{k}.grd"
        save_grid(p, GridSignal(rng.random((SIZE, SIZE)).astype(np.float32).astype(float)))
        paths.append(str(p))
    return paths


def _cfg(train, **kw):
    base = dict(radius=RADIUS, rotation_step=90)
    base.update(kw)
    return ExperimentConfig(train, **base)


def test_leave_one_out_row_count(areas):
    report = run_leave_one_out(_cfg(areas, M=[1, 2, 3], Q=[15, 30], seeds=[0]))
    assert report.ok
    assert len(report.rows) == 9 * 3 * 2 * 2
    assert {r.method for r in report.rows} == {"geneo", "knn1"}


def test_knn_only_skips_library(areas, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("library built")

    monkeypatch.setattr(harness, "build_library", boom)
    report = run(_cfg(areas, methods=["knn1"], M=[1, 2, 3], Q=[15, 30]))
    assert report.ok and len(report.rows) == 54


def test_zero_shot_row_count(areas):
    cfg = _cfg(areas, test_areas=areas[:4], protocol="zero-shot", M=[1, 2, 3], Q=[15, 30])
    report = run_zero_shot(cfg)
    assert report.ok and len(report.rows) == 48


def test_config_validation(areas):
    with pytest.raises(ValueError):
        ExperimentConfig(areas[:1])
    with pytest.raises(ValueError):
        ExperimentConfig(areas, test_areas=areas[:1])
    with pytest.raises(ValueError):
        ExperimentConfig(areas, protocol="zero-shot")
    with pytest.raises(ValueError):
        ExperimentConfig(areas, methods=["unet"])
    with pytest.raises(ValueError):
        ExperimentConfig(areas, protocol="k-fold")


def test_config_paths_resolve_against_file(tmp_path, areas):
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps({"train_areas": ["area0.grd", "area1.grd"], "M": [5], "Q": [0]}))
    cfg = ExperimentConfig.load(cfg_path)
    assert cfg.train_areas == [str(tmp_path / "area0.grd"), str(tmp_path / "area1.grd")]
    assert cfg.M == [5] and cfg.radius == 22


def test_run_seed_is_stable_and_distinct():
    s = run_seed(0, 1, 3, 15)
    assert s == run_seed(0, 1, 3, 15)
    assert 0 <= s < 2**63
    others = {run_seed(0, 2, 3, 15), run_seed(1, 1, 3, 15), run_seed(0, 1, 2, 15), run_seed(0, 1, 3, 30)}
    assert s not in others and len(others) == 4


def _self_similar_areas(tmp_path, n=2):
    rng = np.random.default_rng(3)
    field = (rng.random((SIZE, SIZE)) > 0.5).astype(float)
    paths = []
    for k in range(n):
        p = tmp_path / f"twin{k}.grd"
        save_grid(p, GridSignal(field))
        paths.append(str(p))
    return paths, field


def _covered(size, radius):
    ys, xs = np.mgrid[0:size, 0:size]
    cov = np.zeros((size, size), dtype=bool)
    for c in tile_circles(size, size, radius):
        cov |= (xs - c.x) ** 2 + (ys - c.y) ** 2 <= radius * radius
    return cov


def test_twin_areas_reconstruct_each_other(tmp_path):
    paths, field = _self_similar_areas(tmp_path)
    dump = tmp_path / "maps"
    report = run(_cfg(paths, methods=["geneo"], M=[100], Q=[0]), dump_dir=dump)
    assert len(report.rows) == 2
    cov = _covered(SIZE, RADIUS)
    for fold in (0, 1):
        rec = _read_pgm(dump / f"fold{fold}_geneo_M100_Q0_s0.pgm")
        assert np.array_equal(rec[cov], field[cov])
    # only the few pixels outside every tiled disk can differ
    bound = (~cov).mean()
    assert all(r.mse <= bound for r in report.rows)


def test_zero_shot_self_library(tmp_path):
    paths, field = _self_similar_areas(tmp_path, 1)
    cfg = _cfg(paths, test_areas=paths, protocol="zero-shot", methods=["geneo"], M=[100], Q=[0])
    report = run(cfg)
    assert len(report.rows) == 1
    assert report.rows[0].mse <= (~_covered(SIZE, RADIUS)).mean()


def _read_pgm(path):
    data = path.read_bytes()
    header = f"P5\n{SIZE} {SIZE}\n65535\n".encode()
    assert data.startswith(header)
    return np.frombuffer(data[len(header):], dtype=">u2").reshape(SIZE, SIZE) / 65535


def test_unreadable_area_fails_only_its_fold(areas, tmp_path):
    broken = tmp_path / "broken.grd"
    broken.write_bytes(b"junk")
    report = run(_cfg(areas[:3] + [str(broken)], M=[2], Q=[15]))
    assert not report.ok
    assert set(report.errors) == {3}
    assert sorted({r.fold for r in report.rows}) == [0, 1, 2]


def test_zero_shot_bad_training_area_fails_all_folds(areas, tmp_path):
    cfg = _cfg(areas[:2] + [str(tmp_path / "missing.grd")], test_areas=areas[:2], protocol="zero-shot", M=[2], Q=[0])
    report = run(cfg)
    assert set(report.errors) == {0, 1} and not report.rows


def test_zero_shot_requires_test_areas(areas):
    with pytest.raises(ValueError):
        run_zero_shot(_cfg(areas, M=[2], Q=[0]))


def test_report_deterministic_across_runs_and_workers(areas):
    kw = dict(M=[2, 5], Q=[0, 30], seeds=[0, 7])
    a = run(_cfg(areas[:4], workers=1, **kw)).to_csv(include_wall_time=False)
    b = run(_cfg(areas[:4], workers=1, **kw)).to_csv(include_wall_time=False)
    c = run(_cfg(areas[:4], workers=3, **kw)).to_csv(include_wall_time=False)
    assert a == b == c
    assert a.splitlines()[0] == "fold,method,M,Q,seed,mse,w1_h0,w1_h1,w1_total"
    full = run(_cfg(areas[:2], M=[2], Q=[0])).to_csv()
    assert full.splitlines()[0].endswith(",wall_ms")


def test_held_out_ground_truth_only_scores(areas, tmp_path):
    """Changing unsampled pixels of the held-out area leaves its reconstruction unchanged."""
    cfg = _cfg(areas[:3], methods=["geneo"], M=[10], Q=[0])
    first = run(cfg, dump_dir=tmp_path / "a")
    gt = load_grid(areas[0])
    seed = run_seed(0, 0, 10, 0)
    obs = sample_uniform(gt, SamplingSpec(10, 0, seed))
    v = np.array(gt.values)
    keep = np.zeros(v.shape, dtype=bool)
    keep[obs.ys, obs.xs] = True
    v[~keep] = 1.0 - v[~keep]
    save_grid(areas[0], GridSignal(v))
    second = run(cfg, dump_dir=tmp_path / "b")
    name = "fold0_geneo_M10_Q0_s0.pgm"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert first.rows[0].mse != second.rows[0].mse
