"""Command-line experiment runner.

Exit codes: 0 success, 1 numerical failure, 2 input error.  ``KACIM_SEED``
sets the default ``--seed``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from kacim.data import CsvFormatError, DataError, PairedSample, load_csv, write_csv
from kacim.ecf import SmoothingSpec
from kacim.estimator import EstimationError, EstimatorConfig
from kacim.experiments import (
    DEFAULT_DIMS,
    DEFAULT_LAMBDAS,
    ORACLE_CONFIG,
    dim_sweep,
    fx_experiment,
    gaussian_oracle,
    noise_sweep,
    run_estimate,
    trace_csv,
)
from kacim.fx.extraction import FeatureExtractionError, FxConfig
from kacim.fx.stats import WilcoxonError
from kacim.gaussian import CovarianceError, GaussianSpec
from kacim.simgen import NOISE_FAMILIES, GeneratorSpec, gen_additive, gen_classification, gen_gaussian_pair, gen_independent

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _default_seed() -> int:
    return int(os.environ.get("KACIM_SEED", "0"))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", type=Path, default=None, help="directory for CSV/JSON/SVG outputs")
    p.add_argument("--workers", type=int, default=1, help="threads for independent seeded runs")


def _add_estimator(p: argparse.ArgumentParser, iterations: int) -> None:
    g = p.add_argument_group("estimator")
    g.add_argument("--iterations", type=int, default=iterations)
    g.add_argument("--batch-size", type=int, default=None, help="default: min(1024, n)")
    g.add_argument("--lr", type=float, default=0.007)
    g.add_argument("--wd", type=float, default=0.01)
    g.add_argument("--no-unit-sphere", dest="unit_sphere", action="store_false")
    g.add_argument("--no-standardize", dest="standardize", action="store_false")
    g.add_argument("--restarts", type=int, default=1)
    g.add_argument("--freq-bound", type=float, default=None)
    g.add_argument("--smooth", type=float, default=None, metavar="H", help="Gaussian smoothing bandwidth")


def _estimator_config(args, n: int, **overrides) -> EstimatorConfig:
    kw = dict(iterations=args.iterations, batch_size=args.batch_size or min(1024, n),
              learning_rate=args.lr, weight_decay=args.wd, unit_sphere=args.unit_sphere,
              smoothing=SmoothingSpec(args.smooth) if args.smooth is not None else None,
              freq_norm_bound=args.freq_bound, seed=args.seed, standardize_batches=args.standardize,
              restarts=args.restarts)
    kw.update(overrides)
    return EstimatorConfig(**kw)


def _emit(report, args, extra: dict | None = None) -> None:
    print(json.dumps({"command": report.command, "config": report.config}, sort_keys=True))
    sys.stdout.write(report.rows_csv())
    if args.out is not None:
        report.write(args.out)
        for name, text in (extra or {}).items():
            (args.out / name).write_text(text, encoding="utf-8")


def _sample_from_args(args) -> tuple[PairedSample, dict]:
    if args.gen is None:
        if args.x is None or args.y is None:
            raise InputError("give --x and --y CSV files, or --gen")
        x = load_csv(args.x)
        y = load_csv(args.y)
        if x.n != y.n:
            raise InputError(f"shape error: {args.x} has {x.n} rows but {args.y} has {y.n}")
        return PairedSample(x.x, y.x), {"x": str(args.x), "y": str(args.y)}
    source = {"gen": args.gen, "n": args.n, "d_x": args.dx, "d_y": args.dy, "seed": args.seed}
    if args.gen == "gaussian":
        source.update(r=args.r)
        return gen_gaussian_pair(GaussianSpec.correlated_scalars(args.r), args.n, args.seed), source
    spec = GeneratorSpec(args.n, args.dx, args.dy, args.noise_scale, args.noise, args.seed)
    source.update(noise_scale=args.noise_scale, noise=args.noise)
    if args.gen == "independent":
        return gen_independent(spec), source
    return gen_additive(spec)[0], source


def cmd_estimate(args) -> int:
    sample, source = _sample_from_args(args)
    cfg = _estimator_config(args, sample.n)
    report, trace = run_estimate(sample, cfg, args.null, args.workers, source)
    if args.trace is not None:
        args.trace.parent.mkdir(parents=True, exist_ok=True)
        args.trace.write_text(trace_csv(trace), encoding="utf-8")
    _emit(report, args)
    return EXIT_OK


def cmd_noise_sweep(args) -> int:
    cfg = _estimator_config(args, args.n)
    report, svg = noise_sweep(args.lambdas, args.families, args.repeats, args.n, args.d, cfg,
                              args.seed, args.workers)
    _emit(report, args, {"noise-sweep.svg": svg})
    print(json.dumps(report.summary, sort_keys=True))
    return EXIT_OK


def cmd_dim_sweep(args) -> int:
    cfg = _estimator_config(args, args.n)
    report, charts = dim_sweep(args.dims, args.repeats, args.n, args.noise_scale, cfg, args.seed, args.workers)
    _emit(report, args, {f"dim-sweep-{m}.svg": svg for m, svg in charts.items()})
    print(json.dumps(report.summary, sort_keys=True))
    return EXIT_OK


def cmd_fx(args) -> int:
    datasets = {}
    for path in args.data or []:
        if args.label_column is None:
            raise InputError("--data needs --label-column")
        datasets[Path(path).stem] = load_csv(path, label_column=args.label_column)
    if args.gen or not datasets:
        datasets["synthetic"] = gen_classification(args.n, args.dx, args.nc, args.informative, args.seed)
    cfg = FxConfig(iterations=args.iterations, learning_rate=args.lr, ortho_lambda=args.ortho_lambda,
                   batch_size=args.batch_size, seed=args.seed,
                   dimension_grid=tuple(args.grid) if args.grid else None)
    report, table = fx_experiment(datasets, args.baselines, args.runs, cfg, args.p_threshold,
                                  wilcoxon=not args.no_wilcoxon)
    _emit(report, args)
    print(json.dumps({k: report.summary[k] for k in ("ranking_score",) if k in report.summary}, sort_keys=True))
    return EXIT_OK


def cmd_gaussian_oracle(args) -> int:
    cfg = _estimator_config(args, args.n, unit_sphere=args.unit_sphere_on)
    report = gaussian_oracle(args.rs, args.n, cfg, args.seed, args.null, args.workers)
    _emit(report, args)
    return EXIT_OK


def cmd_generate(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    if args.gen == "classification":
        d = gen_classification(args.n, args.dx, args.nc, args.informative, args.seed)
        rows = [list(map(repr, map(float, r))) + [str(int(l))] for r, l in zip(d.x, d.labels)]
        header = [f"x{i}" for i in range(d.d_x)] + ["label"]
        path = args.out / "classification.csv"
        path.write_text(",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows), encoding="utf-8")
        print(path)
        return EXIT_OK
    sample, _ = _sample_from_args(args)
    write_csv(args.out / "x.csv", sample.x, [f"x{i}" for i in range(sample.d_x)])
    write_csv(args.out / "y.csv", sample.y, [f"y{i}" for i in range(sample.d_y)])
    print(args.out / "x.csv")
    print(args.out / "y.csv")
    return EXIT_OK


def _add_generator(p, gens) -> None:
    g = p.add_argument_group("generated data")
    g.add_argument("--gen", choices=gens, default=None)
    g.add_argument("--n", type=int, default=4096)
    g.add_argument("--dx", type=int, default=32)
    g.add_argument("--dy", type=int, default=32)
    g.add_argument("--lambda", dest="noise_scale", type=float, default=0.2)
    g.add_argument("--noise", choices=NOISE_FAMILIES, default="gaussian")
    g.add_argument("--r", type=float, default=0.8, help="correlation for --gen gaussian")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kacim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate KacIM on CSV or generated data")
    p.add_argument("--x", type=Path)
    p.add_argument("--y", type=Path)
    _add_generator(p, ("independent", "additive", "gaussian"))
    p.add_argument("--null", type=int, default=None, metavar="N_PERM")
    p.add_argument("--trace", type=Path, default=None)
    _add_estimator(p, 500)
    _add_common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("noise-sweep", help="KacIM against additive noise scale")
    p.add_argument("--lambdas", type=_floats, default=list(DEFAULT_LAMBDAS))
    p.add_argument("--families", type=lambda s: s.split(","), default=["gaussian"])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--d", type=int, default=32)
    _add_estimator(p, 500)
    _add_common(p)
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("dim-sweep", help="KacIM vs unbiased distance correlation across dimensions")
    p.add_argument("--dims", type=_ints, default=list(DEFAULT_DIMS))
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--lambda", dest="noise_scale", type=float, default=0.2)
    _add_estimator(p, 500)
    _add_common(p)
    p.set_defaults(func=cmd_dim_sweep)

    p = sub.add_parser("fx", help="supervised feature extraction protocol")
    p.add_argument("--data", action="append", help="labelled CSV (repeatable)")
    p.add_argument("--label-column")
    p.add_argument("--gen", action="store_true", help="include the synthetic classification dataset")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--dx", type=int, default=100)
    p.add_argument("--nc", type=int, default=3)
    p.add_argument("--informative", type=int, default=10)
    p.add_argument("--baselines", type=lambda s: s.split(","), default=["RAW", "KacIM", "HSIC", "dCor"])
    p.add_argument("--runs", type=int, default=25)
    p.add_argument("--iterations", type=int, default=250)
    p.add_argument("--lr", type=float, default=0.007)
    p.add_argument("--ortho-lambda", type=float, default=1.0)
    p.add_argument("--batch-size", type=int, default=1024)
    p.add_argument("--grid", type=_ints, default=None)
    p.add_argument("--p-threshold", type=float, default=0.01)
    p.add_argument("--no-wilcoxon", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_fx)

    p = sub.add_parser("gaussian-oracle", help="analytic Gaussian KacIM vs estimate")
    p.add_argument("--rs", type=_floats, default=[0.0, 0.3, 0.6, 0.9])
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--null", type=int, default=None, metavar="N_PERM")
    p.add_argument("--unit-sphere", dest="unit_sphere_on", action="store_true",
                   help="constrain frequencies to the unit sphere (off by default here)")
    _add_estimator(p, ORACLE_CONFIG.iterations)
    p.set_defaults(restarts=ORACLE_CONFIG.restarts)
    _add_common(p)
    p.set_defaults(func=cmd_gaussian_oracle)

    p = sub.add_parser("generate", help="export generated data as CSV")
    _add_generator(p, ("independent", "additive", "gaussian", "classification"))
    p.add_argument("--nc", type=int, default=3)
    p.add_argument("--informative", type=int, default=10)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EstimationError, FeatureExtractionError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, CsvFormatError, DataError, CovarianceError, WilcoxonError, ValueError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
