"""Command line for fitting, analysing and simulating label embeddings.

    labelembed fit --input votes.csv --out runs/a --seed 7
    labelembed analyze --fit-dir runs/a --input votes.csv --group-by gold
    labelembed subsample --input votes.csv --groups 514@100,500@25,500@5 --seed 1 --out sub
    labelembed simulate --n 500 --J 50 --mu 1,0,-1 --seed 3 --out sim
    labelembed moment-surface --z1 -3:3:0.1 --z2 -3:3:0.1 --out surface
    labelembed validate --input votes.csv
    labelembed profile --fit-dir runs/a --input votes.csv --instance s1
    labelembed replay --config runs/a/run_config.json --out runs/b

Exit status: 0 ok, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from ..analysis import (
    Cohort, agreement_stats, build_report, dataset_overview, embedding_profile,
    subsample_annotations,
)
from ..em_driver import EmConfig, fit
from ..imports import (
    DEFAULT_BURNIN, DEFAULT_COVERAGE, DEFAULT_EM_ITERS, DEFAULT_LOG_LEVEL, DEFAULT_MCMC,
    DEFAULT_MIN_ITERS, DEFAULT_PROPOSAL_SCALE, DEFAULT_REL_TOL, DEFAULT_THIN,
    DEFAULT_WORKERS, EXIT_OK, EXIT_USAGE, ROBUST_BURNIN, ROBUST_THIN, DomainError,
    UsageError, attempt, exit_code_for,
)
from ..model_core import AnnotationDataset, GridRange, moment_surface
from ..sampler import McmcConfig
from ..simulate import SimSpec, sample_dataset
from .datasets import load_dataset, write_dataset
from .outputs import (
    MANIFEST, RUN_CONFIG, load_fit, safe_stem, write_csv, write_manifest, write_outputs,
    write_profile, write_report, write_surface, write_text,
)
from .schemas import RunConfig

logger = logging.getLogger("abstract_labelembed.io_cli")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# flags whose values may start with a minus sign, e.g. --z1 -3:3:0.1 or --mu -1,0,1
DASH_VALUE_FLAGS = frozenset({"--z1", "--z2", "--mu", "--sigma"})


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting with status 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _attach_dash_values(argv: list[str]) -> list[str]:
    """Rewrite ``--z1 -3:3:0.1`` as ``--z1=-3:3:0.1`` so argparse keeps it a value."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if token in DASH_VALUE_FLAGS and nxt is not None and nxt[:1] == "-" and (
                nxt[1:2].isdigit() or nxt[1:2] == "."):
            out.append(f"{token}={nxt}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def _csv_list(raw: Optional[str]) -> Optional[tuple[str, ...]]:
    if raw is None:
        return None
    return tuple(s.strip() for s in raw.split(",") if s.strip())


def _float_list(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(s) for s in raw.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {raw!r}") from None


def _int_list(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in raw.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {raw!r}") from None


# ---------------------------------------------------------------------------
# Recorded commands: each takes a RunConfig and an output directory
# ---------------------------------------------------------------------------
def _load(config: RunConfig) -> AnnotationDataset:
    dataset = load_dataset(config.input, config.format, labels=config.labels)
    return dataset.drop_classes(list(config.drop_classes))


def _load_args(args) -> AnnotationDataset:
    dataset = load_dataset(args.input, args.format, labels=_csv_list(args.labels))
    return dataset.drop_classes(list(args.drop_class))


def _finish(out: Path, produced: list, config: RunConfig) -> dict:
    produced.append(write_text(out / RUN_CONFIG, config.to_json() + "\n"))
    return write_manifest(out, produced)


def _run_fit(config: RunConfig, out: Path, workers: int) -> dict:
    dataset = _load(config)
    result = fit(dataset, config.em, workers=workers)
    ok, report, exc = attempt(build_report, result, dataset, config.group_by,
                              config.coverage, config.pca_scale)
    if not ok:
        if not isinstance(exc, DomainError):
            raise exc
        logger.warning("analysis skipped: %s", exc)
    manifest = write_outputs(result, report, out, config, save_draws=config.save_draws)
    state = "converged" if result.converged else "stopped at the iteration limit"
    print(f"fit {dataset.n} instances x {dataset.K} classes: {state} after "
          f"{result.iterations_run} iteration(s); wrote {len(manifest['files'])} files to {out}")
    return manifest


def _run_subsample(config: RunConfig, out: Path, workers: int) -> dict:
    dataset = _load(config)
    thinned = subsample_annotations(dataset, config.cohorts, seed=config.seed or 0)
    produced = [write_dataset(thinned, out / "dataset.csv", "wide")]
    print(f"subsampled {thinned.n} instances into {len(config.cohorts)} cohort(s) -> {produced[0]}")
    return _finish(out, produced, config)


def _run_simulate(config: RunConfig, out: Path, workers: int) -> dict:
    dataset, truth = sample_dataset(config.sim)
    names = dataset.labels.names
    produced = [
        write_dataset(dataset, out / "dataset.csv", config.output_format),
        write_csv(out / "truth.csv", ["instance_id", *(f"z_{c}" for c in names)],
                  ([iid, *z] for iid, z in zip(dataset.ids, truth))),
    ]
    print(f"simulated {dataset.n} instances over {dataset.K} classes -> {out}")
    return _finish(out, produced, config)


def _run_surface(config: RunConfig, out: Path, workers: int) -> dict:
    surface = moment_surface(config.z1, config.z2)
    produced = [write_surface(surface, out / "surface.csv")]
    print(f"moment surface: {len(surface)} grid points -> {produced[0]}")
    return _finish(out, produced, config)


_RECORDED = {
    "fit": _run_fit,
    "subsample": _run_subsample,
    "simulate": _run_simulate,
    "moment-surface": _run_surface,
}


def run_recorded(config: RunConfig, out, workers: int = DEFAULT_WORKERS) -> dict:
    """Execute a recorded command into ``out``; returns the manifest."""
    return _RECORDED[config.command](config, Path(out), workers)


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------
def _em_config(args) -> EmConfig:
    burn_in = args.burnin if args.burnin is not None else (ROBUST_BURNIN if args.robust else DEFAULT_BURNIN)
    thin = args.thin if args.thin is not None else (ROBUST_THIN if args.robust else DEFAULT_THIN)
    mcmc = McmcConfig(
        n_retained=args.mcmc,
        burn_in=burn_in,
        thin=thin,
        proposal_scale=args.proposal_scale,
        adapt=not args.no_adapt,
        seed=args.seed,
    )
    min_iters = args.min_iters if args.min_iters is not None else min(DEFAULT_MIN_ITERS, args.em_iters)
    return EmConfig(max_iterations=args.em_iters, rel_tol=args.rel_tol, mcmc=mcmc,
                    min_iterations=min_iters, m_step=args.m_step)


def _cmd_fit(args) -> int:
    config = RunConfig(
        command="fit", input=args.input, format=args.format, labels=_csv_list(args.labels),
        drop_classes=tuple(args.drop_class), em=_em_config(args), group_by=args.group_by,
        coverage=args.coverage, pca_scale=args.pca_scale, save_draws=args.save_draws,
    )
    run_recorded(config, args.out, args.workers)
    return EXIT_OK


def _cmd_subsample(args) -> int:
    cohorts = tuple(Cohort.parse(s) for s in _csv_list(args.groups) or ())
    config = RunConfig(command="subsample", input=args.input, format=args.format,
                       labels=_csv_list(args.labels), drop_classes=tuple(args.drop_class),
                       cohorts=cohorts, seed=args.seed)
    run_recorded(config, args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    mu = _float_list(args.mu)
    J = _int_list(args.J)
    if args.sigma is not None:
        sigma = tuple(_float_list(row) for row in args.sigma.split(";"))
    else:
        sigma = tuple(tuple(args.variance if i == j else 0.0 for j in range(len(mu)))
                      for i in range(len(mu)))
    spec = SimSpec(n=args.n, J=J[0] if len(J) == 1 else J, mu=mu, sigma=sigma,
                   seed=args.seed, class_names=_csv_list(args.classes))
    config = RunConfig(command="simulate", sim=spec, output_format=args.output_format)
    run_recorded(config, args.out)
    return EXIT_OK


def _cmd_surface(args) -> int:
    config = RunConfig(command="moment-surface", z1=GridRange.parse(args.z1),
                       z2=GridRange.parse(args.z2))
    run_recorded(config, args.out)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    dataset = _load_args(args)
    result = load_fit(args.fit_dir, dataset)
    report = build_report(result, dataset, args.group_by, args.coverage, args.pca_scale)
    out = Path(args.out) if args.out else Path(args.fit_dir) / "analysis"
    produced = write_report(report, result.labels.names, result.instance_ids, out)
    write_manifest(out, produced)
    print(f"analysis of {result.n} instances -> {out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    dataset = _load_args(args)
    overview = dataset_overview(dataset)
    agreement = agreement_stats(dataset)
    print(f"{args.input}: OK")
    print(f"  instances          {overview.n_instances}")
    print(f"  classes            {overview.n_classes} ({', '.join(dataset.labels.names)})")
    print(f"  distinct patterns  {overview.distinct_patterns}")
    print(f"  votes per instance {overview.j_min}..{overview.j_max} (total {overview.total_votes})")
    print(f"  full agreement     {agreement.full_agreement_fraction:.4f}")
    print(f"  majority counts    " + ", ".join(
        f"{name}={c}" for name, c in zip(dataset.labels.names, agreement.majority_counts)))
    return EXIT_OK


def _cmd_profile(args) -> int:
    dataset = _load_args(args)
    result = load_fit(args.fit_dir, dataset)
    profile = embedding_profile(result, dataset, args.instance)
    out = Path(args.out) if args.out else Path(args.fit_dir)
    path = write_profile(profile, out / f"profile_{safe_stem(args.instance)}.csv")
    for c in profile.classes:
        print(f"  {c.name:>16}  votes={c.votes:<5d} z={c.z: .4f}  p={c.softmax:.4f}  "
              f"[{c.q05: .3f}, {c.q95: .3f}]")
    print(f"profile -> {path}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = RunConfig.model_validate_json(fh.read())
    except ValidationError as exc:
        raise DomainError(f"{args.config} is not a valid run config: {exc}") from None
    out = Path(args.out) if args.out else Path(args.config).parent
    manifest = run_recorded(config, out, args.workers)
    if args.compare:
        with open(Path(args.compare) / MANIFEST, encoding="utf-8") as fh:
            reference = json.load(fh)
        if reference.get("files") != manifest["files"]:
            differing = sorted(k for k in set(reference.get("files", {})) | set(manifest["files"])
                               if reference.get("files", {}).get(k) != manifest["files"].get(k))
            raise DomainError(f"replay differs from {args.compare} in: {', '.join(differing)}")
        print(f"replay matches {args.compare}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="dataset CSV")
    p.add_argument("--format", choices=("wide", "long"), default="wide")
    p.add_argument("--labels", help="comma-separated class order (long format, or to reorder)")
    p.add_argument("--drop-class", action="append", default=[], metavar="NAME",
                   help="exclude a class before fitting; repeatable")


def _add_analysis_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--group-by", choices=("majority", "gold", "J_group", "none"),
                   default="majority", help="biplot grouping for concentration ellipses")
    p.add_argument("--coverage", type=float, default=DEFAULT_COVERAGE)
    p.add_argument("--pca-scale", action="store_true", help="correlation PCA instead of covariance PCA")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--log-level", default=DEFAULT_LOG_LEVEL,
                        help="DEBUG, INFO, WARNING... (env LABELEMBED_LOG_LEVEL)")
    workers = _Parser(add_help=False)
    workers.add_argument("--workers", type=int, default=DEFAULT_WORKERS,
                         help="E-step threads (env LABELEMBED_WORKERS); never changes output")

    parser = _Parser(prog="labelembed", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fit", parents=[common, workers], help="fit embeddings and the prior")
    _add_dataset_args(f)
    f.add_argument("--out", required=True, help="output directory")
    f.add_argument("--em-iters", type=int, default=DEFAULT_EM_ITERS)
    f.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    f.add_argument("--min-iters", type=int, default=None)
    f.add_argument("--mcmc", type=int, default=DEFAULT_MCMC, help="retained draws per chain")
    f.add_argument("--burnin", type=int, default=None, help=f"default {DEFAULT_BURNIN}")
    f.add_argument("--thin", type=int, default=None, help=f"default {DEFAULT_THIN}")
    f.add_argument("--robust", action="store_true",
                   help=f"burn-in {ROBUST_BURNIN}, thin {ROBUST_THIN} unless given explicitly")
    f.add_argument("--proposal-scale", type=float, default=DEFAULT_PROPOSAL_SCALE)
    f.add_argument("--no-adapt", action="store_true", help="keep the proposal scale fixed")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--m-step", choices=("paper", "means", "full-draws"), default="paper",
                   help="re-estimate the prior from posterior means (paper; alias means) "
                        "or from all retained draws (full-draws)")
    f.add_argument("--save-draws", action="store_true", help="write draws/<id>.csv per instance")
    _add_analysis_args(f)
    f.set_defaults(func=_cmd_fit)

    a = sub.add_parser("analyze", parents=[common], help="correlation, PCA and ellipses of a saved fit")
    _add_dataset_args(a)
    a.add_argument("--fit-dir", required=True)
    a.add_argument("--out", help="default <fit-dir>/analysis")
    _add_analysis_args(a)
    a.set_defaults(func=_cmd_analyze)

    s = sub.add_parser("subsample", parents=[common], help="thin votes into J cohorts")
    _add_dataset_args(s)
    s.add_argument("--groups", required=True, help="cohorts as N@J,N@J,...")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=_cmd_subsample)

    m = sub.add_parser("simulate", parents=[common], help="sample a synthetic dataset")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--J", required=True, help="votes per instance, or a comma list of n values")
    m.add_argument("--mu", required=True, help="comma-separated prior mean")
    m.add_argument("--variance", type=float, default=1.0, help="isotropic prior variance")
    m.add_argument("--sigma", help="full covariance, rows ';'-separated (overrides --variance)")
    m.add_argument("--classes", help="comma-separated class names")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--output-format", choices=("wide", "long"), default="wide")
    m.add_argument("--out", required=True, help="output directory")
    m.set_defaults(func=_cmd_simulate)

    g = sub.add_parser("moment-surface", parents=[common],
                       help="two-class mean/log-variance table over a z grid")
    g.add_argument("--z1", required=True, help="start:stop:step, inclusive")
    g.add_argument("--z2", required=True, help="start:stop:step, inclusive")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=_cmd_surface)

    v = sub.add_parser("validate", parents=[common], help="parse a dataset and summarise it")
    _add_dataset_args(v)
    v.set_defaults(func=_cmd_validate)

    p = sub.add_parser("profile", parents=[common], help="one instance's votes, embedding and draws")
    _add_dataset_args(p)
    p.add_argument("--fit-dir", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--out", help="default <fit-dir>")
    p.set_defaults(func=_cmd_profile)

    r = sub.add_parser("replay", parents=[common, workers], help="re-run a recorded run_config.json")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="default: the config's directory")
    r.add_argument("--compare", help="directory whose manifest the replay must match")
    r.set_defaults(func=_cmd_replay)
    return parser


def _configure_logging(level: str) -> None:
    numeric = logging.getLevelName(str(level).upper())
    if not isinstance(numeric, int):
        raise UsageError(f"unknown log level {level!r}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: list[str] | None = None) -> int:
    try:
        argv = list(sys.argv[1:] if argv is None else argv)
        args = build_parser().parse_args(_attach_dash_values(argv))
        _configure_logging(args.log_level)
    except UsageError as exc:
        print(f"labelembed: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    ok, code, exc = attempt(args.func, args, label=args.command)
    if ok:
        return code
    print(f"labelembed {args.command}: {exc}", file=sys.stderr)
    return exit_code_for(exc)


if __name__ == "__main__":
    raise SystemExit(main())
