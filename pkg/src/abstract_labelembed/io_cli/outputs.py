"""Run artefacts: CSV tables, JSON summaries and the hash manifest.

Floats are written with 17 significant digits so they read back exactly.
JSON is written with sorted keys and no timestamps; together with the
deterministic fit this makes a run's files byte-identical on replay.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import re
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from pydantic import ValidationError
from scipy.special import softmax

from ..analysis import AnalysisReport, EmbeddingProfile
from ..em_driver import FitResult, IterationRecord
from ..imports import FLOAT_FMT, FORMAT_VERSION, DomainError
from ..model_core import AnnotationDataset, Embedding, GaussianPrior, MomentSurface
from ..sampler import PosteriorDraws, posterior_covariance
from .schemas import RunConfig

logger = logging.getLogger("abstract_labelembed.io_cli")

MANIFEST = "manifest.json"
RUN_CONFIG = "run_config.json"
DRAWS_DIR = "draws"


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FMT)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_json(path: Path, payload) -> Path:
    os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise DomainError(f"{path} is empty")
    return rows[0], rows[1:]


def safe_stem(instance_id: str) -> str:
    """``instance_id`` reduced to characters that are safe in a file name."""
    return re.sub(r"[^A-Za-z0-9._-]+", "_", instance_id).strip("._") or "instance"


def draw_filenames(instance_ids: Sequence[str]) -> list[str]:
    """A distinct, filesystem-safe file name per instance id."""
    used: set[str] = set()
    names = []
    for i, iid in enumerate(instance_ids):
        slug = safe_stem(iid)
        name = f"{slug}.csv"
        if name in used:
            name = f"{slug}-{i}.csv"
        used.add(name)
        names.append(name)
    return names


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: Path, produced: Iterable[Path]) -> dict:
    files = {p.relative_to(out_dir).as_posix(): sha256_of(p) for p in produced}
    manifest = {"format_version": FORMAT_VERSION, "files": dict(sorted(files.items()))}
    write_json(out_dir / MANIFEST, manifest)
    logger.info("wrote %d file(s) and %s to %s", len(files), MANIFEST, out_dir)
    return manifest


# ---------------------------------------------------------------------------
# Fit outputs
# ---------------------------------------------------------------------------
def _matrix_rows(names: Sequence[str], matrix: np.ndarray):
    for name, row in zip(names, matrix):
        yield [name, *row]


def write_fit(fit: FitResult, out_dir: Path, save_draws: bool = False) -> list[Path]:
    names = fit.labels.names
    produced = []
    header = ["instance_id", *(f"z_{c}" for c in names), *(f"p_{c}" for c in names), "cov_trace"]
    rows = []
    for iid, emb, cov in zip(fit.instance_ids, fit.embeddings, fit.per_instance_cov):
        rows.append([iid, *emb.z, *softmax(emb.z), float(np.trace(cov))])
    produced.append(write_csv(out_dir / "embeddings.csv", header, rows))

    prior = fit.final_prior
    produced.append(write_json(out_dir / "prior.json", {
        "format_version": FORMAT_VERSION,
        "classes": list(names),
        "mu": prior.mu.tolist(),
        "sigma": prior.sigma.tolist(),
        "jitter": prior.jitter,
        "iterations": fit.iterations_run,
        "converged": fit.converged,
        "clamp_events": fit.clamp_events,
        "history": [h.model_dump(mode="json") for h in fit.history],
    }))

    if save_draws and fit.final_draws:
        for fname, draws in zip(draw_filenames(fit.instance_ids), fit.final_draws):
            produced.append(write_csv(out_dir / DRAWS_DIR / fname, list(names), draws.draws))
    return produced


def write_report(report: AnalysisReport, names: Sequence[str], instance_ids: Sequence[str],
                 out_dir: Path) -> list[Path]:
    produced = []
    corr = report.correlation
    produced.append(write_csv(out_dir / "correlation.csv", ["class", *names],
                              _matrix_rows(names, corr.corr)))
    produced.append(write_csv(out_dir / "correlation_std.csv", ["class", *names],
                              _matrix_rows(names, corr.std)))

    pca = report.pca
    groups = pca.groups or [""] * len(instance_ids)
    produced.append(write_csv(out_dir / "biplot.csv", ["instance_id", "pc1", "pc2", "group"],
                              ([iid, s[0], s[1], g] for iid, s, g in
                               zip(instance_ids, pca.scores, groups))))
    produced.append(write_csv(out_dir / "loadings.csv", ["class", "pc1", "pc2"],
                              _matrix_rows(names, pca.loadings)))
    produced.append(write_csv(
        out_dir / "ellipses.csv",
        ["group", "center_pc1", "center_pc2", "axis_major", "axis_minor", "angle", "coverage", "size"],
        ([e.group, *e.center, *e.axes, e.angle, e.coverage, e.size] for e in report.ellipses)))
    produced.append(write_json(out_dir / "summary.json", {
        "overview": report.overview.model_dump(mode="json"),
        "agreement": report.agreement.model_dump(mode="json"),
        "pca": {
            "explained_variance_ratio": pca.explained_variance_ratio.tolist(),
            "center": pca.center.tolist(),
            "scaled": pca.scaled,
        },
        "correlation": {"n_instances": corr.n_instances, "n_draw_slices": corr.n_draw_slices},
    }))
    return produced


def write_outputs(fit: FitResult, report: Optional[AnalysisReport], out_dir,
                  run_config: Optional[RunConfig] = None, save_draws: bool = False) -> dict:
    """Write every artefact of a fit and return the manifest."""
    out_dir = Path(out_dir)
    produced = write_fit(fit, out_dir, save_draws=save_draws)
    if report is not None:
        produced += write_report(report, fit.labels.names, fit.instance_ids, out_dir)
    if run_config is not None:
        produced.append(write_text(out_dir / RUN_CONFIG, run_config.to_json() + "\n"))
    return write_manifest(out_dir, produced)


def write_text(path: Path, text: str) -> Path:
    os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def write_surface(surface: MomentSurface, path: Path) -> Path:
    return write_csv(path, ["z1", "z2", "mean", "log_variance"], surface.rows())


def write_profile(profile: EmbeddingProfile, path: Path) -> Path:
    return write_csv(
        path, ["class", "votes", "z", "softmax", "q05", "q50", "q95"],
        ([c.name, c.votes, c.z, c.softmax, c.q05, c.q50, c.q95] for c in profile.classes))


# ---------------------------------------------------------------------------
# Reading a fit back
# ---------------------------------------------------------------------------
def load_fit(out_dir, dataset: AnnotationDataset) -> FitResult:
    """Rebuild a :class:`FitResult` from a fit directory.

    Draws are picked up when the fit was saved with them; without draws the
    per-instance covariances are unknown and left as NaN.
    """
    out_dir = Path(out_dir)
    try:
        with open(out_dir / "prior.json", encoding="utf-8") as fh:
            prior_doc = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {out_dir / 'prior.json'}: {exc.strerror or exc}") from exc
    try:
        names = tuple(prior_doc["classes"])
        history = tuple(IterationRecord(**h) for h in prior_doc.get("history", []))
        iterations_run = int(prior_doc["iterations"])
        converged = bool(prior_doc["converged"])
        mu = np.array(prior_doc["mu"], dtype=np.float64)
        sigma = np.array(prior_doc["sigma"], dtype=np.float64)
    except (KeyError, TypeError, ValueError, ValidationError) as exc:
        raise DomainError(f"{out_dir / 'prior.json'} is malformed: {exc}") from None
    if names != dataset.labels.names:
        raise DomainError(f"fit classes {list(names)} do not match dataset classes "
                          f"{list(dataset.labels.names)}")
    K = len(names)
    header, rows = _read_csv(out_dir / "embeddings.csv")
    ids = tuple(r[0] for r in rows)
    if ids != tuple(dataset.ids):
        raise DomainError("fit instances do not match the dataset's instances")
    embeddings = tuple(Embedding([float(v) for v in r[1:1 + K]]) for r in rows)

    draws_dir = out_dir / DRAWS_DIR
    final_draws: tuple[PosteriorDraws, ...] = ()
    if draws_dir.is_dir():
        loaded = []
        for fname in draw_filenames(ids):
            _, draw_rows = _read_csv(draws_dir / fname)
            loaded.append(PosteriorDraws(draws=np.array(draw_rows, dtype=np.float64),
                                         acceptance_rate=0.0, seed_used=0))
        final_draws = tuple(loaded)
    if final_draws:
        cov = np.stack([posterior_covariance(d) for d in final_draws])
    else:
        cov = np.full((len(ids), K, K), np.nan)

    return FitResult(
        labels=dataset.labels,
        instance_ids=ids,
        embeddings=embeddings,
        final_prior=GaussianPrior(mu=mu, sigma=sigma),
        per_instance_cov=cov,
        final_draws=final_draws,
        history=history,
        iterations_run=iterations_run,
        converged=converged,
        clamp_events=int(prior_doc.get("clamp_events", 0)),
    )
