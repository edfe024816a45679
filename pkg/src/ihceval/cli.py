"""Command-line surface: eval, dist, prep, stitch, features, report.

Exit codes: 0 clean, 1 usage/config error, 2 partial per-item failures.
All data outputs are byte-deterministic for fixed inputs and config;
wall-clock metadata goes to a separate metadata.json.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import distmetrics, featfile, imageio, preprocess, report, segmetrics, stats, texture
from .config import PairRow, RunConfig, read_pair_manifest
from .errors import IhcEvalError, InsufficientArea
from .stains import dab_mask


def _echo(quiet: bool, message: str) -> None:
    if not quiet:
        click.echo(message, err=True)


def _load_config(config_path, **overrides) -> RunConfig:
    try:
        return RunConfig.load(config_path).override(**overrides)
    except (IhcEvalError, ValueError, json.JSONDecodeError) as e:
        raise click.ClickException(f"bad config: {e}")


def _run_id(config: RunConfig, *seed_material: str) -> str:
    h = hashlib.sha256(config.digest().encode())
    for item in seed_material:
        h.update(item.encode())
    return h.hexdigest()[:12]


def _write_metadata(out_dir, **extra) -> None:
    payload = {"finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"), **extra}
    with open(os.path.join(out_dir, "metadata.json"), "w",
              encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


@click.group()
def main():
    """Evaluation toolkit for virtual IHC staining."""


def _score_row(row: PairRow, config: RunConfig, model_id: str):
    real = imageio.read_image(row.real_path)
    virt = imageio.read_image(row.virtual_path)
    tex = texture.score_pair(real, virt, config.ssim_params())
    basis = config.basis()
    cleanup = config.morphology()
    gt = (imageio.read_mask(row.real_mask_path) if row.real_mask_path
          else dab_mask(real, basis, config.dab_threshold, cleanup))
    pred = (imageio.read_mask(row.virtual_mask_path) if row.virtual_mask_path
            else dab_mask(virt, basis, config.dab_threshold, cleanup))
    seg = None
    excluded = False
    if config.positives_only and not gt.any():
        excluded = True
    else:
        seg = segmetrics.score_pair(gt, pred)
    return stats.MetricRecord(tile_id=row.tile_id, model_id=model_id,
                              group=row.group or None, texture=tex,
                              seg=seg), excluded


@main.command("eval")
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="Run-config JSON.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--model-id", default="model", show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--quiet", is_flag=True)
def cmd_eval(manifest, config_path, out_dir, model_id, seed, workers, quiet):
    """Score every real/virtual pair in MANIFEST and write reports."""
    config = _load_config(config_path, seed=seed)
    try:
        rows = read_pair_manifest(manifest)
    except (IhcEvalError, ValueError) as e:
        raise click.ClickException(str(e))
    if not rows:
        raise click.ClickException("manifest is empty")
    os.makedirs(out_dir, exist_ok=True)

    def worker(row: PairRow):
        try:
            return _score_row(row, config, model_id), None
        except Exception as e:
            return None, f"{row.tile_id}: {e!r}"

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        results = list(pool.map(worker, rows))

    records = []
    failures = []
    excluded_empty_gt = 0
    for result, failure in results:
        if failure is not None:
            failures.append(failure)
            continue
        record, excluded = result
        records.append(record)
        excluded_empty_gt += int(excluded)
    if not records:
        _echo(quiet, "no pair could be scored:")
        for failure in failures:
            _echo(quiet, f"  {failure}")
        sys.exit(2)

    aggregates = stats.aggregate(records, by="model")
    correlations = stats.correlation_matrix(records, stats.ALL_METRICS,
                                            level="tile")
    with open(manifest, "rb") as f:
        manifest_digest = hashlib.sha256(f.read()).hexdigest()
    run_id = _run_id(config, manifest_digest, model_id)
    payload = {
        "run_id": run_id,
        "config_digest": config.digest(),
        "config": config.to_dict(),
        "excluded_empty_gt": excluded_empty_gt,
        "failures": sorted(failures),
        "models": [{
            "model_id": model_id,
            "aggregates": aggregates[model_id],
            "correlations": correlations,
            "tests": [],
        }],
    }
    report.write_json(os.path.join(out_dir, "report.json"), payload)
    report.write_records_csv(os.path.join(out_dir, "records.csv"), records)
    scatter_points = [(r.value("psnr"), r.value("dice")) for r in records
                      if r.seg is not None and np.isfinite(r.value("psnr"))]
    if scatter_points:
        report.render_scatter(scatter_points,
                              [model_id] * len(scatter_points),
                              os.path.join(out_dir, "psnr_vs_dice.svg"),
                              title="PSNR vs Dice",
                              x_label="psnr", y_label="dice")
    _write_metadata(out_dir, run_id=run_id)
    _echo(quiet, f"scored {len(records)} pairs "
                 f"({excluded_empty_gt} excluded, {len(failures)} failed)")
    if failures:
        for failure in failures:
            _echo(quiet, f"  FAILED {failure}")
        sys.exit(2)


@main.command("dist")
@click.argument("real_features", type=click.Path(exists=True))
@click.argument("virt_features", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Output JSON path (default: stdout).")
@click.option("--allow-tag-mismatch", is_flag=True)
@click.option("--seed", type=int, default=None)
@click.option("--quiet", is_flag=True)
def cmd_dist(real_features, virt_features, config_path, out_path,
             allow_tag_mismatch, seed, quiet):
    """Distribution metrics between two FEAT1 embedding files."""
    config = _load_config(config_path, seed=seed)
    try:
        real = featfile.read_features(real_features)
        gen = featfile.read_features(virt_features)
    except IhcEvalError as e:
        raise click.ClickException(str(e))
    if real.encoder_tag != gen.encoder_tag \
            and not (allow_tag_mismatch or config.allow_tag_mismatch):
        raise click.ClickException(
            f"encoder tags differ ({real.encoder_tag!r} vs "
            f"{gen.encoder_tag!r}); pass --allow-tag-mismatch to override"
        )
    try:
        fd = distmetrics.frechet_distance(distmetrics.moments(real),
                                          distmetrics.moments(gen))
        subsets = config.kid_subset_spec(min(real.n, gen.n))
        kid = distmetrics.kernel_distance(real, gen, config.kid_estimator,
                                          subsets)
        precision, recall = distmetrics.precision_recall(real, gen,
                                                         config.knn_k)
    except IhcEvalError as e:
        raise click.ClickException(str(e))
    payload = {
        "config_digest": config.digest(),
        "encoder_tag": real.encoder_tag,
        "n_real": real.n,
        "n_generated": gen.n,
        "frechet": fd,
        "kid": kid,
        "kid_x1000": kid * 1000.0,
        "precision": precision,
        "recall": recall,
        "k": config.knn_k,
    }
    if out_path:
        report.write_json(out_path, payload)
        _echo(quiet, f"wrote {out_path}")
    else:
        click.echo(json.dumps(report.jsonable(payload), indent=2,
                              sort_keys=True))


@main.command("prep")
@click.option("--he", "he_paths", multiple=True, required=True,
              type=click.Path(exists=True), help="H&E slide image (repeatable).")
@click.option("--ihc", "ihc_paths", multiple=True, required=True,
              type=click.Path(exists=True),
              help="Registered IHC slide image, paired by position.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--count", "count_per_class", type=int, default=8,
              show_default=True, help="Patches per polarity per group.")
@click.option("--seed", type=int, default=None)
@click.option("--quiet", is_flag=True)
def cmd_prep(he_paths, ihc_paths, config_path, out_dir, count_per_class,
             seed, quiet):
    """Tissue boxes, areas of interest and balanced patch extraction."""
    config = _load_config(config_path, seed=seed)
    if len(he_paths) != len(ihc_paths):
        raise click.ClickException("--he and --ihc counts must match")
    os.makedirs(os.path.join(out_dir, "patches"), exist_ok=True)
    manifest_rows = []
    problems = []
    for he_path, ihc_path in zip(he_paths, ihc_paths):
        group = os.path.splitext(os.path.basename(he_path))[0]
        he = imageio.read_image(he_path)
        ihc = imageio.read_image(ihc_path)
        boxes = preprocess.tissue_boxes(he, config.min_area)
        _echo(quiet, f"{group}: {len(boxes)} tissue piece(s)")
        aoi = preprocess.areas_of_interest(ihc, config.basis(),
                                           config.dab_threshold)
        try:
            patches = preprocess.sample_patches(aoi, count_per_class,
                                                config.patch_size,
                                                config.seed)
        except InsufficientArea as e:
            problems.append(f"{group}: {e}")
            _echo(quiet, f"  WARNING {group}: {e}")
            continue
        for i, spec in enumerate(patches):
            x, y = spec.origin
            s = spec.size
            he_out = os.path.join(out_dir, "patches",
                                  f"{group}_{spec.polarity}_{i:04d}_he.png")
            ihc_out = os.path.join(out_dir, "patches",
                                   f"{group}_{spec.polarity}_{i:04d}_ihc.png")
            imageio.write_image(he_out, he[y:y + s, x:x + s])
            imageio.write_image(ihc_out, ihc[y:y + s, x:x + s])
            manifest_rows.append((group, spec.polarity, x, y, s,
                                  he_out, ihc_out))
    manifest_path = os.path.join(out_dir, "patches.csv")
    with open(manifest_path, "w", encoding="utf-8", newline="") as f:
        f.write("group,polarity,x,y,size,he_path,ihc_path\n")
        for row in manifest_rows:
            f.write(",".join(str(v) for v in row) + "\n")
    _echo(quiet, f"wrote {manifest_path} ({len(manifest_rows)} patches, "
                 f"{len(problems)} group(s) skipped)")


@main.command("stitch")
@click.argument("tile_dir", type=click.Path(exists=True))
@click.argument("grid_json", type=click.Path(exists=True))
@click.option("--blend", type=click.Choice(["average", "feather"]),
              default="average", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--quiet", is_flag=True)
def cmd_stitch(tile_dir, grid_json, blend, out_path, quiet):
    """Stitch tiles named tile_{x}_{y}.png back onto the grid canvas."""
    with open(grid_json, "r", encoding="utf-8") as f:
        grid = preprocess.grid_from_dict(json.load(f))
    tiles = []
    missing = []
    for x, y in grid.origins:
        path = os.path.join(tile_dir, f"tile_{x}_{y}.png")
        if not os.path.exists(path):
            missing.append((x, y))
            continue
        tiles.append(((x, y), imageio.read_image(path)))
    if missing:
        raise click.ClickException(
            f"missing tiles at origins: {missing}"
        )
    stitched = preprocess.stitch(tiles, grid, blend)
    imageio.write_image(out_path, stitched)
    seams = preprocess.seam_report(stitched, grid)
    report.write_json(out_path + ".seams.json", {
        "blend": blend,
        "vertical": {str(k): v for k, v in seams.vertical.items()},
        "horizontal": {str(k): v for k, v in seams.horizontal.items()},
        "max_seam": seams.max_seam,
        "mean_seam": seams.mean_seam,
    })
    _echo(quiet, f"wrote {out_path} (+ seam report)")


@main.command("features")
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--encoder", type=click.Choice(["toy"]), default="toy",
              show_default=True)
@click.option("--source", type=click.Choice(["real", "virtual"]),
              default="real", show_default=True,
              help="Which manifest column to encode.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--quiet", is_flag=True)
def cmd_features(manifest, encoder, source, config_path, out_path, quiet):
    """Encode manifest tiles with the built-in toy encoder into FEAT1."""
    config = _load_config(config_path)
    try:
        rows = read_pair_manifest(manifest)
    except (IhcEvalError, ValueError) as e:
        raise click.ClickException(str(e))
    if not rows:
        raise click.ClickException("manifest is empty")
    basis = config.basis()
    vectors = []
    ids = []
    skipped = []
    for row in rows:
        path = row.real_path if source == "real" else row.virtual_path
        try:
            img = imageio.read_image(path)
        except IhcEvalError as e:
            skipped.append(f"{row.tile_id}: {e}")
            continue
        vectors.append(distmetrics.toy_encoder(img, basis))
        ids.append(row.tile_id)
    if not vectors:
        raise click.ClickException("no tile could be encoded")
    fs = distmetrics.FeatureSet(data=np.asarray(vectors),
                                encoder_tag=distmetrics.TOY_ENCODER_TAG,
                                ids=tuple(ids))
    featfile.write_features(out_path, fs)
    _echo(quiet, f"wrote {out_path} (n={fs.n}, d={fs.d}, "
                 f"{len(skipped)} skipped)")
    if skipped:
        for item in skipped:
            _echo(quiet, f"  SKIPPED {item}")
        sys.exit(2)


@main.command("report")
@click.argument("records_csv", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--level", type=click.Choice(["tile", "model"]),
              default="tile", show_default=True)
@click.option("--quiet", is_flag=True)
def cmd_report(records_csv, config_path, out_dir, level, quiet):
    """Regenerate aggregate report and plots from a records CSV."""
    config = _load_config(config_path)
    records = report.read_records_csv(records_csv)
    if not records:
        raise click.ClickException("records file is empty")
    os.makedirs(out_dir, exist_ok=True)
    aggregates = stats.aggregate(records, by="model")
    correlations = stats.correlation_matrix(records, stats.ALL_METRICS,
                                            level=level)
    models = sorted(aggregates)
    tests = []
    for metric in stats.ALL_METRICS:
        for i, m_a in enumerate(models):
            for m_b in models[i + 1:]:
                a = [r.value(metric) for r in records if r.model_id == m_a
                     and math.isfinite(r.value(metric))]
                b = [r.value(metric) for r in records if r.model_id == m_b
                     and math.isfinite(r.value(metric))]
                try:
                    result = stats.ttest(a, b)
                except IhcEvalError:
                    continue
                tests.append({"metric": metric, "model_a": m_a,
                              "model_b": m_b, "result": result})
    with open(records_csv, "rb") as f:
        records_digest = hashlib.sha256(f.read()).hexdigest()
    run_id = _run_id(config, records_digest)
    payload = {
        "run_id": run_id,
        "config_digest": config.digest(),
        "models": [{
            "model_id": model,
            "aggregates": aggregates[model],
            "correlations": [c for c in correlations],
            "tests": [t for t in tests
                      if model in (t["model_a"], t["model_b"])],
        } for model in models],
    }
    report.write_json(os.path.join(out_dir, "report.json"), payload)
    points = []
    labels = []
    for rec in records:
        x, y = rec.value("psnr"), rec.value("dice")
        if np.isfinite(x) and np.isfinite(y):
            points.append((x, y))
            labels.append(rec.model_id)
    if points:
        report.render_scatter(points, labels,
                              os.path.join(out_dir, "psnr_vs_dice.svg"),
                              title="PSNR vs Dice", x_label="psnr",
                              y_label="dice")
    _write_metadata(out_dir, run_id=run_id)
    _echo(quiet, f"report for {len(models)} model(s) -> {out_dir}")


if __name__ == "__main__":
    main()
