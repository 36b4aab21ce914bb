"""Experiment orchestration: leave-one-out and zero-shot sweeps."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geneo
from .baselines import knn1_reconstruct, mse
from .grid import GridSignal, load_grid, save_pgm
from .patterns import PatternLibrary, build_library
from .sampling import SamplingSpec, observe
from .tda import topo_distances

log = logging.getLogger(__name__)

METHODS = ("geneo", "knn1")
PROTOCOLS = ("leave-one-out", "zero-shot")
REPORT_HEADER = ["fold", "method", "M", "Q", "seed", "mse", "w1_h0", "w1_h1", "w1_total", "wall_ms"]


@dataclass
class ExperimentConfig:
    train_areas: list[str]
    test_areas: list[str] = field(default_factory=list)
    protocol: str = "leave-one-out"
    M: list[float] = field(default_factory=lambda: [1, 2, 3])
    Q: list[float] = field(default_factory=lambda: [15, 30])
    seeds: list[int] = field(default_factory=lambda: [0])
    radius: int = 22
    rotation_step: int = 15
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    workers: int = 1

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {PROTOCOLS}")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ValueError(f"unknown methods {sorted(bad)}; choose from {METHODS}")
        if self.protocol == "leave-one-out":
            if self.test_areas:
                raise ValueError("leave-one-out takes no test areas; folds come from train_areas")
            if len(self.train_areas) < 2:
                raise ValueError("leave-one-out needs at least two areas")
        elif not self.train_areas or not self.test_areas:
            raise ValueError("zero-shot needs both train and test areas")

    @classmethod
    def from_json(cls, text: str, base_dir: str | os.PathLike = ".") -> "ExperimentConfig":
        raw = json.loads(text)
        base = Path(base_dir)
        for key in ("train_areas", "test_areas"):
            raw[key] = [str(base / p) for p in raw.get(key, [])]
        return cls(**raw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_json(path.read_text(encoding="utf-8"), path.parent)


@dataclass(frozen=True)
class ReportRow:
    fold: int
    method: str
    M: float
    Q: float
    seed: int
    mse: float
    w1_h0: float
    w1_h1: float
    w1_total: float
    wall_ms: float


@dataclass
class ExperimentReport:
    rows: list[ReportRow] = field(default_factory=list)
    errors: dict[int, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_csv(self, include_wall_time: bool = True) -> str:
        buf = io.StringIO()
        header = REPORT_HEADER if include_wall_time else REPORT_HEADER[:-1]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in self.rows:
            vals = [r.fold, r.method, _num(r.M), _num(r.Q), r.seed, repr(r.mse), repr(r.w1_h0), repr(r.w1_h1), repr(r.w1_total)]
            if include_wall_time:
                vals.append(f"{r.wall_ms:.3f}")
            w.writerow(vals)
        return buf.getvalue()


def _num(x) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def run_seed(base_seed: int, fold: int, M, Q) -> int:
    """Independent 63-bit seed per (base seed, fold, M, Q) cell."""
    key = [int(base_seed), int(fold), int(round(float(M) * 1000)), int(round(float(Q) * 1000))]
    return int(np.random.SeedSequence(key).generate_state(2, np.uint64)[0] >> np.uint64(1))


@dataclass
class _Fold:
    index: int
    gt: GridSignal | None
    train: list[GridSignal]
    train_ids: list[int]
    error: str | None = None


def _load_areas(paths):
    out = []
    for p in paths:
        try:
            out.append((load_grid(p), None))
        except Exception as exc:  # recorded per fold, the sweep continues
            out.append((None, f"{p}: {exc}"))
    return out


def _score(rec: GridSignal, gt: GridSignal):
    td = topo_distances(rec, gt)
    return mse(rec, gt), td.h0, td.h1, td.total


def _run_cells(cfg, fold: _Fold, library, dump_dir):
    rows = []
    for M in cfg.M:
        for Q in cfg.Q:
            for base_seed in cfg.seeds:
                seed = run_seed(base_seed, fold.index, M, Q)
                obs = observe(fold.gt, SamplingSpec(M, Q, seed))
                for method in METHODS:
                    if method not in cfg.methods:
                        continue
                    t0 = time.perf_counter()
                    if method == "geneo":
                        rec = geneo.reconstruct_sampling(obs, library).phi_rec
                    else:
                        rec = knn1_reconstruct(obs)
                    m, w0, w1, wt = _score(rec, fold.gt)
                    wall = (time.perf_counter() - t0) * 1000
                    rows.append(ReportRow(fold.index, method, M, Q, base_seed, m, w0, w1, wt, wall))
                    if dump_dir is not None:
                        save_pgm(Path(dump_dir) / f"fold{fold.index}_{method}_M{_num(M)}_Q{_num(Q)}_s{base_seed}.pgm", rec)
    return rows


def _execute(cfg: ExperimentConfig, folds: list[_Fold], dump_dir) -> ExperimentReport:
    if dump_dir is not None:
        Path(dump_dir).mkdir(parents=True, exist_ok=True)
    report = ExperimentReport()
    libs: dict[tuple, PatternLibrary] = {}
    lib_lock = threading.Lock()

    def job(fold: _Fold):
        if fold.error:
            return fold.index, [], fold.error
        try:
            lib = None
            if "geneo" in cfg.methods:
                key = tuple(fold.train_ids)
                with lib_lock:
                    lib = libs.get(key)
                    if lib is None:
                        lib = build_library(fold.train, cfg.radius, cfg.rotation_step, fold.train_ids)
                        libs[key] = lib
            if dump_dir is not None:
                save_pgm(Path(dump_dir) / f"fold{fold.index}_gt.pgm", fold.gt)
            return fold.index, _run_cells(cfg, fold, lib, dump_dir), None
        except Exception as exc:
            log.exception("fold %d failed", fold.index)
            return fold.index, [], str(exc)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(job, folds))
    else:
        results = [job(f) for f in folds]
    for index, rows, err in sorted(results, key=lambda r: r[0]):
        if err:
            report.errors[index] = err
        report.rows.extend(rows)
    report.rows.sort(key=lambda r: (r.fold, METHODS.index(r.method), r.M, r.Q, r.seed))
    return report


def run_leave_one_out(cfg: ExperimentConfig, dump_dir=None) -> ExperimentReport:
    """Each area in turn is reconstructed from a library of all the others."""
    if cfg.protocol != "leave-one-out":
        raise ValueError("config protocol is not leave-one-out")
    areas = _load_areas(cfg.train_areas)
    folds = []
    for k, (gt, err) in enumerate(areas):
        others = [(j, g) for j, (g, _) in enumerate(areas) if j != k and g is not None]
        folds.append(_Fold(k, gt, [g for _, g in others], [j for j, _ in others], err))
    return _execute(cfg, folds, dump_dir)


def run_zero_shot(cfg: ExperimentConfig, dump_dir=None) -> ExperimentReport:
    """One library from every training area; each test area reconstructed in turn."""
    if cfg.protocol != "zero-shot" or not cfg.test_areas:
        raise ValueError("zero-shot needs a zero-shot config with test areas")
    train = _load_areas(cfg.train_areas)
    bad = [e for _, e in train if e]
    good = [(j, g) for j, (g, _) in enumerate(train) if g is not None]
    folds = []
    for k, (gt, err) in enumerate(_load_areas(cfg.test_areas)):
        if bad:
            err = err or "; ".join(bad)
        folds.append(_Fold(k, gt, [g for _, g in good], [j for j, _ in good], err))
    return _execute(cfg, folds, dump_dir)


def run(cfg: ExperimentConfig, dump_dir=None) -> ExperimentReport:
    if cfg.protocol == "leave-one-out":
        return run_leave_one_out(cfg, dump_dir)
    return run_zero_shot(cfg, dump_dir)
