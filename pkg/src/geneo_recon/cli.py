"""Command-line entry point: ``geneo-recon <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import geneo, scenario, tda
from .baselines import knn1_reconstruct, mse
from .grid import GridSignal, load_grid, load_sampling, save_grid, save_pgm, save_sampling
from .harness import ExperimentConfig, run
from .patterns import build_library, load_library, save_library
from .sampling import SamplingSpec, observe


def _cmd_sample(a):
    gt = load_grid(a.input)
    save_sampling(a.out, observe(gt, SamplingSpec(a.m, a.q, a.seed)))


def _cmd_extract(a):
    areas = [load_grid(p) for p in a.areas.split(",") if p]
    lib = build_library(areas, a.radius, a.rotation_step)
    save_library(a.out, lib)
    print(f"{len(lib)} patterns", file=sys.stderr)


def _cmd_reconstruct(a):
    obs = load_sampling(a.obs, a.width, a.height)
    lib = load_library(a.lib)
    res = geneo.reconstruct_sampling(obs, lib, workers=a.workers)
    save_grid(a.out, res.phi_rec)
    if a.dump_best_index:
        save_grid(a.dump_best_index, res.index_grid(len(lib)))
        sidecar = Path(a.dump_best_index).with_suffix(".csv")
        with open(sidecar, "w", encoding="utf-8") as fh:
            fh.write("pixel_x,pixel_y,pattern_index,anchor_x,anchor_y\n")
            for y in range(obs.height):
                for x in range(obs.width):
                    fh.write(f"{x},{y},{res.best_pattern[y, x]},{res.best_anchor_x[y, x]},{res.best_anchor_y[y, x]}\n")
    if a.dump_confidence:
        save_grid(a.dump_confidence, GridSignal(res.best_confidence))


def _cmd_knn(a):
    obs = load_sampling(a.obs, a.width, a.height)
    save_grid(a.out, knn1_reconstruct(obs))


def _cmd_mse(a):
    print(repr(mse(load_grid(a.a), load_grid(a.b))))


def _cmd_persistence(a):
    h0, h1 = tda.sublevel_persistence(load_grid(a.input))
    Path(a.out).write_text(tda.write_diagrams([h0, h1]), encoding="utf-8")


def _cmd_wasserstein(a):
    da = tda.read_diagrams(Path(a.a).read_text(encoding="utf-8"))
    db = tda.read_diagrams(Path(a.b).read_text(encoding="utf-8"))
    total = 0.0
    for dim in sorted(set(da) | set(db)):
        d1 = da.get(dim, tda.PersistenceDiagram(dim))
        d2 = db.get(dim, tda.PersistenceDiagram(dim))
        w = tda.wasserstein(d1, d2, a.p, a.essential_death)
        print(f"H{dim}\t{w!r}")
        total += w
    print(f"total\t{total!r}")


def _cmd_synth(a):
    gt = scenario.synth_normalized(a.seed, a.size, a.ntx, a.buildings)
    save_grid(a.out, gt)


def _cmd_import(a):
    save_grid(a.out, scenario.normalize_sinr(scenario.read_raw_sinr_csv(a.raw_sinr)))


def _cmd_pgm(a):
    save_pgm(a.out, load_grid(a.input))


def _cmd_evaluate(a):
    cfg = ExperimentConfig.load(a.config)
    if a.workers is not None:
        cfg.workers = a.workers
    report = run(cfg, a.dump_maps)
    Path(a.out).write_text(report.to_csv(), encoding="utf-8")
    for fold, err in sorted(report.errors.items()):
        print(f"fold {fold} failed: {err}", file=sys.stderr)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geneo-recon", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sparse, corrupted observation of a ground-truth grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--m", type=float, required=True, help="percent of pixels retained")
    p.add_argument("--q", type=float, default=0.0, help="percent of retained samples replaced by noise")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("extract-patterns", help="build a rotated pattern library from training areas")
    p.add_argument("--areas", required=True, help="comma-separated .grd files")
    p.add_argument("--radius", type=int, default=22)
    p.add_argument("--rotation-step", type=int, default=15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    for name, func, helptext in (("reconstruct", _cmd_reconstruct, "pattern-matching reconstruction"),
                                 ("knn", _cmd_knn, "1-nearest-neighbour reconstruction")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--obs", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--width", type=int, help="grid width if the .smp file lacks a size line")
        p.add_argument("--height", type=int)
        if name == "reconstruct":
            p.add_argument("--lib", required=True)
            p.add_argument("--dump-best-index")
            p.add_argument("--dump-confidence")
            p.add_argument("--workers", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("mse", help="mean squared error between two grids")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=_cmd_mse)

    p = sub.add_parser("persistence", help="H0/H1 sublevel persistence diagrams as CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_persistence)

    p = sub.add_parser("wasserstein", help="p-Wasserstein distance between diagram CSVs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--essential-death", type=float, default=None,
                   help="replace essential deaths by this value before matching")
    p.set_defaults(func=_cmd_wasserstein)

    p = sub.add_parser("synth", help="synthetic urban scene, normalised SINR grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--ntx", type=int, default=10)
    p.add_argument("--buildings", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("import", help="normalise an external raw SINR CSV (x,y,gamma)")
    p.add_argument("--raw-sinr", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_import)

    p = sub.add_parser("pgm", help="export a grid as 16-bit PGM")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pgm)

    p = sub.add_parser("evaluate", help="run a leave-one-out or zero-shot experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-maps")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_evaluate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        rc = args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
