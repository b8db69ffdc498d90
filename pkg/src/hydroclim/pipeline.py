"""Pipeline stages behind the CLI: features, summaries, importance.

Each stage reads its inputs from disk and writes its outputs under the
configured output directory with stable filenames, so stages are
individually rerunnable and reruns are byte-identical for unchanged inputs.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd

from . import climate as climate_mod
from . import summary as summary_mod
from .config import PipelineConfig
from .errors import DependencyError, DegenerateProblemError, HydroclimError
from .features import FEATURE_NAMES, FeatureVector, extract_features
from .forest import (
    build_problem,
    mean_decrease_accuracy,
    mean_decrease_gini,
    oob_error,
    rank_features,
    train,
)
from .ingest import load_monthly_dataset
from .series import aggregate_quarterly, find_qualifying_window
from .summary import UNCLASSIFIED

log = logging.getLogger(__name__)

FEATURE_COLUMNS = ["station_id", "variable_kind", "lat", "lon", *FEATURE_NAMES]
GROUPINGS = ("climate_class", "climate_zone", "region")
RANK_AXES = {"climate_class": "per_column", "climate_zone": "per_row",
             "region": "per_column"}


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(c) for c in row])


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_table(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise DependencyError(f"missing upstream table: {path}")
    return pd.read_csv(path, dtype={"station_id": str}, keep_default_na=False,
                       na_values=[])


def features_path(cfg: PipelineConfig, kind: str) -> Path:
    return cfg.output_dir / f"features_{kind}.csv"


def skip_log_path(cfg: PipelineConfig, kind: str) -> Path:
    return cfg.output_dir / f"skipped_{kind}.csv"


def labels_path(cfg: PipelineConfig, kind: str) -> Path:
    return cfg.output_dir / f"labels_{kind}.csv"


def _station_features(args):
    quarterly, stl_params, smoothing = args
    try:
        vec = extract_features(quarterly, stl_params, smoothing)
    except HydroclimError as exc:
        return quarterly.station.station_id, None, str(exc)
    return quarterly.station.station_id, vec, None


def run_features(cfg: PipelineConfig, threads: int = 1) -> dict[str, Path]:
    """Ingest, select windows, aggregate and extract features per kind.

    Writes one feature table and one machine-readable skip log per variable
    kind; processed + skipped always accounts for every loaded station.
    """
    out = {}
    for kind in sorted(cfg.inputs):
        dataset = load_monthly_dataset(cfg.inputs[kind], kind, cfg.missing_code)
        skipped: list[tuple[str, str]] = []
        jobs = []
        by_station = {}
        for series in dataset:
            window = find_qualifying_window(series, cfg.window)
            quarterly = (aggregate_quarterly(series, window)
                         if window is not None else None)
            if quarterly is None:
                skipped.append((series.station.station_id,
                                "no qualifying window"))
                continue
            by_station[series.station.station_id] = series.station
            jobs.append((quarterly, cfg.stl, cfg.spectral_smoothing))

        if threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(_station_features, jobs, chunksize=8))
        else:
            results = [_station_features(job) for job in jobs]

        rows = []
        for sid, vec, reason in sorted(results, key=lambda r: r[0]):
            if vec is None:
                skipped.append((sid, reason))
                continue
            st = by_station[sid]
            rows.append((sid, kind, st.latitude, st.longitude, *vec.as_tuple()))
        skipped.sort()
        _write_csv(features_path(cfg, kind), FEATURE_COLUMNS, rows)
        _write_csv(skip_log_path(cfg, kind), ["station_id", "reason"], skipped)
        log.info("%s: %d stations in, %d feature rows, %d skipped",
                 kind, len(dataset), len(rows), len(skipped))
        assert len(rows) + len(skipped) == len(dataset)
        out[kind] = features_path(cfg, kind)
    return out


def assign_labels(cfg: PipelineConfig, table: pd.DataFrame) -> pd.DataFrame:
    """Climate class/zone and region id per station of one feature table."""
    grid = climate_mod.load_climate_grid(cfg.climate_grid,
                                         cfg.climate_grid_resolution)
    regions = climate_mod.load_region_config(cfg.region_config)
    rows = []
    for rec in table.itertuples(index=False):
        label = climate_mod.classify_location(grid, rec.lat, rec.lon,
                                              cfg.climate_search_rings)
        region = climate_mod.assign_region(regions, rec.variable_kind,
                                           rec.lat, rec.lon)
        rows.append((rec.station_id,
                     label.class_code if label else UNCLASSIFIED,
                     label.zone if label else UNCLASSIFIED,
                     region if region else UNCLASSIFIED))
    return pd.DataFrame(rows, columns=["station_id", "class_code", "zone",
                                       "region"])


def run_summarize(cfg: PipelineConfig) -> list[Path]:
    """Emit global, per-class, per-zone and per-region summaries per kind."""
    kinds = sorted(cfg.inputs)
    tables = {}
    for kind in kinds:
        table = _read_table(features_path(cfg, kind))
        labels = assign_labels(cfg, table)
        _write_csv(labels_path(cfg, kind), list(labels.columns),
                   labels.itertuples(index=False))
        tables[kind] = table.merge(labels, on="station_id", how="left")

    # shared per-feature histogram ranges across the available kinds
    shared_ranges = {}
    for feat in FEATURE_NAMES:
        pooled = np.concatenate([tables[k][feat].to_numpy(dtype=float)
                                 for k in kinds])
        lo, hi = float(pooled.min()), float(pooled.max())
        shared_ranges[feat] = (lo, hi) if lo < hi else None

    sdir = cfg.output_dir / "summary"
    written: list[Path] = []
    omitted: list[dict] = []
    for kind in kinds:
        table = tables[kind]
        payload = {
            "variable_kind": kind,
            "n_stations": len(table),
            "means": {f: float(table[f].mean()) for f in FEATURE_NAMES},
            "histograms": {
                f: summary_mod.histogram(table[f].to_numpy(dtype=float),
                                         cfg.histogram_bins,
                                         shared_ranges[f]).to_dict()
                for f in FEATURE_NAMES
            },
        }
        path = sdir / f"global_{kind}.json"
        _write_json(path, payload)
        written.append(path)

        for grouping in GROUPINGS:
            stats = summary_mod.group_summarize(table, grouping,
                                                cfg.min_group_size)
            if not stats:
                log.info("%s/%s: no eligible groups, files omitted",
                         kind, grouping)
                omitted.append({"variable_kind": kind, "grouping": grouping,
                                "reason": "no eligible groups"})
                continue
            path = sdir / f"boxplots_{grouping}_{kind}.json"
            _write_json(path, {
                group: {f: s.to_dict() for f, s in per_feature.items()}
                for group, per_feature in stats.items()
            })
            written.append(path)

            ranked = summary_mod.ranked_mean_table(table, grouping,
                                                   RANK_AXES[grouping],
                                                   cfg.min_group_size)
            path = sdir / f"ranked_means_{grouping}_{kind}.csv"
            _write_csv(path, ["group", "feature", "mean", "rank"],
                       ranked.to_frame().itertuples(index=False))
            written.append(path)

        counts_rows = []
        for grouping in GROUPINGS:
            for group, count in summary_mod.group_counts(table, grouping).items():
                counts_rows.append((grouping, group, count))
        path = sdir / f"group_counts_{kind}.csv"
        _write_csv(path, ["grouping", "group", "count"], counts_rows)
        written.append(path)

        corr = summary_mod.feature_correlations(table)
        path = sdir / f"correlations_{kind}.csv"
        _write_csv(path, ["feature", *FEATURE_NAMES],
                   [(f, *corr.loc[f]) for f in FEATURE_NAMES])
        written.append(path)

    manifest = sdir / "manifest.json"
    _write_json(manifest, {
        "written": sorted(str(p.relative_to(cfg.output_dir)) for p in written),
        "omitted": omitted,
    })
    written.append(manifest)
    return written


def _setting_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def run_importance(cfg: PipelineConfig) -> list[Path]:
    """Train the six forests and write the twelve importance reports.

    Degenerate problems are skipped with a logged reason; the remaining
    settings still produce reports.
    """
    kinds = sorted(cfg.inputs)
    merged_frames = []
    for kind in kinds:
        table = _read_table(features_path(cfg, kind))
        labels_file = labels_path(cfg, kind)
        labels = (_read_table(labels_file) if labels_file.is_file()
                  else assign_labels(cfg, table))
        merged_frames.append(table.merge(labels, on="station_id", how="left"))
    merged = pd.concat(merged_frames, ignore_index=True)

    report_rows = []
    json_payload = []
    skipped = []
    index = 0
    for kind in kinds:
        for target in ("zone", "region"):
            seed = _setting_seed(cfg.seed, index)
            index += 1
            try:
                problem = build_problem(merged, kind, target)
                forest = train(problem, cfg.forest, seed)
            except (DegenerateProblemError, HydroclimError) as exc:
                log.warning("skipping %s/%s: %s", kind, target, exc)
                skipped.append((kind, target, str(exc)))
                continue
            err = oob_error(forest, problem)
            scores = {
                "mda": mean_decrease_accuracy(forest, problem,
                                              n_repeats=cfg.mda_repeats),
                "mdg": mean_decrease_gini(forest),
            }
            for measure in ("mda", "mdg"):
                report = rank_features(scores[measure], kind, target, measure)
                for f, s, r in zip(report.features, report.scores, report.ranks):
                    report_rows.append((kind, target, measure, f,
                                        float(s), int(r)))
                json_payload.append({
                    "variable_kind": kind,
                    "target": target,
                    "measure": measure,
                    "labels": problem.label_set,
                    "oob_error": err,
                    "seed": seed,
                    "scores": {f: float(s) for f, s
                               in zip(report.features, report.scores)},
                    "ranks": {f: int(r) for f, r
                              in zip(report.features, report.ranks)},
                    "note": report.note,
                })

    idir = cfg.output_dir / "importance"
    paths = [idir / "importance.csv", idir / "importance.json",
             idir / "skipped.csv"]
    _write_csv(paths[0], ["variable_kind", "target", "measure", "feature",
                          "score", "rank"], report_rows)
    _write_json(paths[1], json_payload)
    _write_csv(paths[2], ["variable_kind", "target", "reason"], skipped)
    return paths


def run_ingest_check(cfg: PipelineConfig) -> dict:
    """Report per-kind station counts and qualifying-window counts."""
    report = {}
    for kind in sorted(cfg.inputs):
        dataset = load_monthly_dataset(cfg.inputs[kind], kind, cfg.missing_code)
        qualifying = sum(
            1 for s in dataset if find_qualifying_window(s, cfg.window)
        )
        report[kind] = {"stations": len(dataset), "qualifying": qualifying}
    _write_json(cfg.output_dir / "ingest_check.json", report)
    return report


def run_all(cfg: PipelineConfig, threads: int = 1) -> None:
    run_features(cfg, threads)
    run_summarize(cfg)
    run_importance(cfg)
