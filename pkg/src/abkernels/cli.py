"""Command-line surface: divergence evaluation, Gram/probe reports, SVM
runs, image segmentation, and the benchmark table generator.

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence.
Every stochastic command requires an explicit ``--seed`` so that reports
are reproducible byte for byte.
"""

import argparse
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from .divergences import DivergenceError, DivergenceSpec
from .kernels import KernelSpec, cpd_check, divergence_gram, gram, probe_hilbertianity, psd_check
from .measures import ValidationError, parse_spec
from .datasets import (
    DataFormatError,
    load_cats,
    load_csv_dataset,
    load_image,
    synth_two_class,
    to_densities,
    write_image,
)
from .segmentation import SegmentationConfig, segment
from .svm import (
    cross_validate,
    evaluate_svm,
    labeled_dataset,
    train_svm,
    train_test_split,
)

COMMANDS = ("div", "gram", "probe", "svm", "segment", "bench")
BENCH_ROWS = (
    ("euclidean", DivergenceSpec.dt(1.0)),
    ("hellinger", DivergenceSpec.dt(0.5)),
    ("itakura-saito", DivergenceSpec.dt(-0.5)),
    ("s-euclidean", DivergenceSpec.dt(-1.0)),
)
C_GRID = (1.0, 10.0, 100.0)
SIGMA_GRID = (0.5, 1.5)
NORM_NAMES = {"raw": "raw-255", "unit": "unit-interval"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """One parsed command invocation; renders back to its argv."""

    command: str
    spec: str | None = None
    mode: str | None = None
    sigma: float | None = None
    x: float | None = None
    y: float | None = None
    skew: str = "limit"
    data: str | None = None
    gene_path: str | None = None
    label_column: str = "class"
    positive_label: str = "B"
    density_mode: str | None = None
    n: int | None = None
    trials: int | None = None
    atoms: int = 8
    seed: int | None = None
    k: float | None = None
    norm: str | None = None
    epsilon: float | None = None
    input_path: str | None = None
    output_path: str | None = None
    out: str | None = None
    folds: int = 5
    train_fraction: float = 0.8

    def render_argv(self):
        argv = [self.command]
        defaults = RunConfig(command=self.command)
        flags = {
            "input_path": "--in", "output_path": "--out-file",
            "gene_path": "--gene-path", "label_column": "--label-column",
            "positive_label": "--positive-label",
            "density_mode": "--density-mode", "train_fraction": "--train-fraction",
            "skew": "--skew",
        }
        for f in fields(self):
            if f.name == "command":
                continue
            value = getattr(self, f.name)
            if value is None or value == getattr(defaults, f.name):
                continue
            flag = flags.get(f.name, "--" + f.name.replace("_", "-"))
            argv.extend([flag, f"{value:g}" if isinstance(value, float) else str(value)])
        return argv


def _add_spec(p, required=True):
    p.add_argument("--spec", required=required,
                   help="divergence: a name (euclidean, hellinger, jeffrey, "
                        "v1-hellinger, v2-hellinger, s-euclidean, "
                        "itakura-saito, euclidean-dt, hellinger-dt) or "
                        "ab:a,b / abs:a,b / dt:t. Name-to-parameter mapping "
                        "follows the defining formulas: itakura-saito is "
                        "dt:-0.5 and hellinger-dt is dt:0.5 (commonly "
                        "reprinted tables swap these two labels)")


def _add_data(p, with_seed=True):
    p.add_argument("--data", required=True, choices=("synth", "cats", "gene"),
                   help="dataset: synthetic generator, bundled cats table, "
                        "or a gene-expression CSV via --gene-path")
    p.add_argument("--gene-path", dest="gene_path",
                   help="CSV path for --data gene")
    p.add_argument("--label-column", dest="label_column", default="class",
                   help="label column name for --data gene")
    p.add_argument("--positive-label", dest="positive_label", default="B",
                   help="label value mapped to +1 for --data gene")
    p.add_argument("--density-mode", dest="density_mode",
                   choices=("simplex", "raw-positive"),
                   help="feature-to-density conversion (default: raw-positive "
                        "for cats, simplex for gene)")
    p.add_argument("--n", type=int, help="samples per class for --data synth")
    if with_seed:
        p.add_argument("--seed", type=int, required=True,
                       help="RNG seed (required: runs must be reproducible)")


def build_parser() -> _Parser:
    parser = _Parser(prog="abkernels", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("div", help="evaluate a scalar divergence",
                       description="Evaluate the divergence at (x, y).")
    _add_spec(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--skew", choices=("limit", "jeffreys"), default="limit",
                   help="form of the alpha = -beta branch (symmetric family)")

    p = sub.add_parser("gram", help="build a kernel Gram and check its spectrum")
    _add_spec(p)
    p.add_argument("--mode", required=True,
                   choices=("neg-divergence-cpd", "lemma-pd", "gaussian"))
    p.add_argument("--sigma", type=float, help="bandwidth for gaussian mode")
    _add_data(p)
    p.add_argument("--out", help="write the Gram matrix to this file")

    p = sub.add_parser("probe", help="randomized conditional-psd probe")
    _add_spec(p)
    p.add_argument("--n", type=int, required=True, help="densities per trial")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--atoms", type=int, default=8)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="write the report to this file")

    p = sub.add_parser("svm", help="split, cross-validate, train and score")
    _add_spec(p)
    p.add_argument("--mode", required=True,
                   choices=("neg-divergence-cpd", "lemma-pd", "gaussian"))
    _add_data(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--train-fraction", dest="train_fraction", type=float,
                   default=0.8)
    p.add_argument("--out", help="write the report to this file")

    p = sub.add_parser("segment", help="divergence-threshold image segmentation")
    _add_spec(p)
    p.add_argument("--k", type=float, required=True, help="threshold")
    p.add_argument("--norm", required=True, choices=("raw", "unit"),
                   help="channel scale: raw 0..255 or unit interval")
    p.add_argument("--mode", choices=("literal", "current"), default="literal",
                   help="literal: left vs top neighbor; current: pixel vs "
                        "its neighbors")
    p.add_argument("--epsilon", type=float, help="channel floor")
    p.add_argument("--in", dest="input_path", required=True)
    p.add_argument("--out-file", "--out", dest="output_path", required=True)

    p = sub.add_parser("bench", help="regenerate the experiment table")
    _add_data(p)
    p.add_argument("--out", help="directory for report files (default: cwd)")
    return parser


def parse_args(argv) -> RunConfig:
    namespace = build_parser().parse_args(argv)
    config = RunConfig(**{f.name: getattr(namespace, f.name)
                          for f in fields(RunConfig)
                          if hasattr(namespace, f.name)})
    if config.spec is not None:
        parse_spec(config.spec)  # fail early on malformed specs
    if config.sigma is not None and not config.sigma > 0:
        raise UsageError("--sigma must be positive")
    if config.command == "gram" and config.mode == "gaussian" \
            and config.sigma is None:
        raise UsageError("gaussian mode requires --sigma")
    if config.data == "synth" and config.seed is None:
        raise UsageError("--data synth requires --seed")
    if config.data == "gene" and not config.gene_path:
        raise DataFormatError("--data gene requires --gene-path")
    return config


def _load_labeled(config) -> "LabeledDataset":
    if config.data == "synth":
        return synth_two_class(config.n or 100, seed=config.seed)
    if config.data == "cats":
        raw = load_cats()
        mode = config.density_mode or "raw-positive"
    else:
        raw = load_csv_dataset(config.gene_path, config.label_column,
                               config.positive_label)
        mode = config.density_mode or "simplex"
    if raw.labels is None:
        raise DataFormatError("dataset has no labels")
    return labeled_dataset(to_densities(raw, mode=mode), raw.labels)


def _emit(lines, out_path=None):
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)


def cmd_div(config) -> int:
    spec = parse_spec(config.spec)
    value = spec.evaluate(config.x, config.y, skew_mode=config.skew)
    _emit([f"spec={spec.label()}", f"x={config.x:g}", f"y={config.y:g}",
           f"divergence={value!r}"])
    return 0


def cmd_gram(config) -> int:
    spec = parse_spec(config.spec)
    data = _load_labeled(config)
    kspec = KernelSpec(spec, config.mode, config.sigma)
    G = gram(kspec, data.densities)
    report = psd_check(G)
    lines = [f"kernel={kspec.label()}", f"data={config.data}"]
    lines += report.to_kv_lines()
    if config.mode == "neg-divergence-cpd":
        centered = cpd_check(divergence_gram(spec, data.densities))
        lines += ["centered." + kv for kv in centered.to_kv_lines()]
    _emit(lines)
    if config.out:
        np.savetxt(config.out, G.entries)
    return 0


def cmd_probe(config) -> int:
    spec = parse_spec(config.spec)
    result = probe_hilbertianity(spec, config.n, config.trials, config.seed,
                                 atoms=config.atoms)
    _emit(result.to_kv_lines(), config.out)
    return 0


def cmd_svm(config) -> int:
    spec = parse_spec(config.spec)
    data = _load_labeled(config)
    train, test = train_test_split(data, config.train_fraction, config.seed)
    sigma_grid = SIGMA_GRID if config.mode == "gaussian" else None
    report = cross_validate(train, spec, config.mode, C_GRID, sigma_grid,
                            folds=config.folds, seed=config.seed)
    C, sigma = report.best
    model = train_svm(train, KernelSpec(spec, config.mode, sigma), C)
    error = evaluate_svm(model, train, test)
    lines = [f"spec={spec.label()}", f"mode={config.mode}",
             f"data={config.data}", f"seed={config.seed}",
             f"train={len(train)}", f"test={len(test)}",
             f"best_C={C:g}", f"best_sigma={'-' if sigma is None else f'{sigma:g}'}",
             f"cv_error={report.best_error:.6f}", f"test_error={error:.6f}",
             f"converged={str(model.converged).lower()}"]
    _emit(lines, config.out)
    return 0 if model.converged else 3


def cmd_segment(config) -> int:
    spec = parse_spec(config.spec)
    image = load_image(config.input_path)
    seg_config = SegmentationConfig(spec=spec, k=config.k,
                                    normalization=NORM_NAMES[config.norm],
                                    epsilon=config.epsilon,
                                    neighbor_mode=config.mode or "literal")
    write_image(segment(image, seg_config), config.output_path)
    _emit([f"segmented={config.input_path}", f"out={config.output_path}",
           f"spec={spec.label()}", f"k={config.k:g}",
           f"norm={seg_config.normalization}",
           f"neighbor_mode={seg_config.neighbor_mode}"])
    return 0


def _bench_cell(train, test, spec, mode, seed):
    sigma_grid = SIGMA_GRID if mode == "gaussian" else None
    report = cross_validate(train, spec, mode, C_GRID, sigma_grid,
                            folds=5, seed=seed)
    C, sigma = report.best
    model = train_svm(train, KernelSpec(spec, mode, sigma), C)
    error = evaluate_svm(model, train, test)
    return error, C, sigma, model.converged


def cmd_bench(config) -> int:
    data = _load_labeled(config)
    train, test = train_test_split(data, 0.8, config.seed)
    cells = {}
    all_converged = True
    for name, spec in BENCH_ROWS:
        for line, mode in (("dir", "neg-divergence-cpd"), ("tran", "gaussian")):
            error, C, sigma, converged = _bench_cell(train, test, spec, mode,
                                                     config.seed)
            cells[name, line] = (error, C, sigma, converged)
            all_converged &= converged

    header1 = f"{'divergence':<22s}"
    header2 = f"{'':<22s}"
    for name, _ in BENCH_ROWS:
        header1 += f"{name:<22s}"
        header2 += f"{'error':<9s}{'C':<6s}{'sig':<7s}"
    table = [header1.rstrip(), header2.rstrip()]
    for line in ("dir", "tran"):
        row = f"{config.data + ' (' + line + ')':<22s}"
        for name, _ in BENCH_ROWS:
            error, C, sigma, _ = cells[name, line]
            sig = "-" if sigma is None else f"{sigma:g}"
            row += f"{error:<9.4f}{C:<6g}{sig:<7s}"
        table.append(row.rstrip())

    kv = [f"bench.data={config.data}", f"bench.seed={config.seed}",
          f"bench.split={0.8:g}", f"bench.folds=5",
          "bench.c_grid=" + ",".join(f"{c:g}" for c in C_GRID),
          "bench.sigma_grid=" + ",".join(f"{s:g}" for s in SIGMA_GRID)]
    for name, _ in BENCH_ROWS:
        for line in ("dir", "tran"):
            error, C, sigma, converged = cells[name, line]
            prefix = f"{name}.{line}"
            kv.append(f"{prefix}.error={error:.6f}")
            kv.append(f"{prefix}.C={C:g}")
            kv.append(f"{prefix}.sigma={'-' if sigma is None else f'{sigma:g}'}")
            kv.append(f"{prefix}.converged={str(converged).lower()}")

    out_dir = config.out or "."
    os.makedirs(out_dir, exist_ok=True)
    table_path = os.path.join(out_dir, f"bench_{config.data}.txt")
    kv_path = os.path.join(out_dir, f"bench_{config.data}.kv")
    with open(table_path, "w") as fh:
        fh.write("\n".join(table) + "\n")
    with open(kv_path, "w") as fh:
        fh.write("\n".join(kv) + "\n")
    sys.stdout.write("\n".join(table) + "\n")
    sys.stdout.write(f"reports: {table_path} {kv_path}\n")
    return 0 if all_converged else 3


_DISPATCH = {"div": cmd_div, "gram": cmd_gram, "probe": cmd_probe,
             "svm": cmd_svm, "segment": cmd_segment, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else list(argv))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, DivergenceError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    try:
        return _DISPATCH[config.command](config)
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
