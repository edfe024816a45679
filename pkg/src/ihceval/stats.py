"""Aggregation and statistical analysis of per-tile metric records:
Pearson correlation, two-sample t-tests, and tile/model-level metric
correlations.

PSNR +inf, Hausdorff +inf and NaN rates are sentinels for undefined
values; they are excluded from every mean with the exclusion count
reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .errors import DegenerateVariance, EmptyInput, TooFew, ZeroVariance
from .segmetrics import SegScore
from .texture import TextureScore

TEXTURE_METRICS = ("mse", "psnr", "ssim")
SEG_METRICS = ("dice", "iou", "hausdorff", "tpr", "tnr")
ALL_METRICS = TEXTURE_METRICS + SEG_METRICS


@dataclass(frozen=True)
class MetricRecord:
    """One tile's scored results across metric families."""

    tile_id: str
    model_id: str
    group: str | None = None
    texture: TextureScore | None = None
    seg: SegScore | None = None
    manual_flags: dict = field(default_factory=dict)

    def value(self, metric: str) -> float:
        """Metric value, or NaN when the family is absent."""
        if metric in TEXTURE_METRICS:
            return getattr(self.texture, metric) if self.texture else math.nan
        if metric in SEG_METRICS:
            return getattr(self.seg, metric) if self.seg else math.nan
        raise KeyError(f"unknown metric {metric!r}")


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape:
        raise TooFew("pearson inputs must have equal length")
    if len(x) < 3:
        raise TooFew(f"pearson needs >= 3 samples, got {len(x)}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("pearson undefined for a constant input")
    return float(dx @ dy) / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class TTestResult:
    t: float
    dof: float
    p: float
    n_a: int
    n_b: int
    variant: str


def t_sf2(t: float, dof: float) -> float:
    """Two-sided tail probability of Student's t via the regularized
    incomplete beta function."""
    if t == 0.0:
        return 1.0
    return float(betainc(dof / 2.0, 0.5, dof / (dof + t * t)))


def ttest(a, b, variant: str = "welch") -> TTestResult:
    """Two-sample t-test (Welch by default, or pooled-variance)."""
    if variant not in ("welch", "pooled"):
        raise ValueError(f"unknown t-test variant {variant!r}")
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    n, m = len(x), len(y)
    if n < 2 or m < 2:
        raise TooFew("each group needs >= 2 samples")
    va = float(x.var(ddof=1))
    vb = float(y.var(ddof=1))
    if va == 0.0 and vb == 0.0:
        if x[0] == y[0]:
            # both groups are the same constant: no evidence of difference
            return TTestResult(t=0.0, dof=float(n + m - 2), p=1.0,
                               n_a=n, n_b=m, variant=variant)
        raise DegenerateVariance("zero variance in both groups with "
                                 "differing means")
    if variant == "welch":
        se2 = va / n + vb / m
        dof = se2 * se2 / ((va / n) ** 2 / (n - 1) + (vb / m) ** 2 / (m - 1))
    else:
        sp2 = ((n - 1) * va + (m - 1) * vb) / (n + m - 2)
        se2 = sp2 * (1.0 / n + 1.0 / m)
        dof = float(n + m - 2)
    if se2 == 0.0:
        raise DegenerateVariance("zero standard error")
    t = (float(x.mean()) - float(y.mean())) / math.sqrt(se2)
    return TTestResult(t=t, dof=float(dof), p=t_sf2(t, dof), n_a=n, n_b=m,
                       variant=variant)


@dataclass(frozen=True)
class MetricAggregate:
    mean: float
    std: float
    median: float
    n: int
    excluded: int


def _aggregate_values(values) -> MetricAggregate:
    finite = sorted(v for v in values if math.isfinite(v))
    excluded = sum(1 for v in values if not math.isfinite(v))
    if not finite:
        return MetricAggregate(math.nan, math.nan, math.nan, 0, excluded)
    arr = np.asarray(finite)
    return MetricAggregate(
        mean=float(arr.mean()),
        std=float(arr.std(ddof=1)) if len(arr) > 1 else 0.0,
        median=float(np.median(arr)),
        n=len(arr),
        excluded=excluded,
    )


def aggregate(records, by: str = "model",
              metrics=ALL_METRICS) -> dict:
    """Per-key metric means/medians/stds with sentinel-exclusion tallies.

    `by` is "model" or "group". Values are sorted before reduction so the
    result is independent of record order.
    """
    if not records:
        raise EmptyInput("no records to aggregate")
    if by not in ("model", "group"):
        raise ValueError(f"unknown aggregation key {by!r}")
    keyfn = (lambda r: r.model_id) if by == "model" else (lambda r: r.group)
    out: dict = {}
    for key in sorted({keyfn(r) for r in records}, key=str):
        subset = [r for r in records if keyfn(r) == key]
        out[key] = {
            metric: _aggregate_values([r.value(metric) for r in subset
                                       if (r.texture if metric in TEXTURE_METRICS
                                           else r.seg) is not None])
            for metric in metrics
        }
    return out


@dataclass(frozen=True)
class CorrelationReport:
    metric_x: str
    metric_y: str
    r: float
    n: int
    level: str   # "tile" | "model"
    scope: str   # model_id, "pooled" or "per_model_mean"


def correlate(records, metric_x: str, metric_y: str, level: str = "model"
              ) -> list[CorrelationReport]:
    """Correlation between two metrics at tile or model level.

    Model level correlates per-model means (one point per model). Tile
    level reports one r per model plus the pooled r across all tiles and
    the mean of the per-model coefficients.

    Raises TooFew/ZeroVariance when the requested level lacks usable
    samples.
    """
    if level not in ("tile", "model"):
        raise ValueError(f"unknown correlation level {level!r}")

    def finite_pairs(subset):
        pts = [(r.value(metric_x), r.value(metric_y)) for r in subset]
        return [(x, y) for x, y in pts
                if math.isfinite(x) and math.isfinite(y)]

    models = sorted({r.model_id for r in records})
    if level == "model":
        points = []
        for model in models:
            pairs = finite_pairs([r for r in records if r.model_id == model])
            if pairs:
                xs, ys = zip(*pairs)
                points.append((float(np.mean(xs)), float(np.mean(ys))))
        if len(points) < 3:
            raise TooFew(f"model-level correlation needs >= 3 models with "
                         f"data, got {len(points)}")
        xs, ys = zip(*points)
        return [CorrelationReport(metric_x, metric_y, pearson(xs, ys),
                                  len(points), "model", "all_models")]
    reports = []
    pooled = []
    per_model_r = []
    for model in models:
        pairs = finite_pairs([r for r in records if r.model_id == model])
        pooled.extend(pairs)
        if len(pairs) >= 3:
            xs, ys = zip(*pairs)
            try:
                r = pearson(xs, ys)
            except ZeroVariance:
                continue
            per_model_r.append(r)
            reports.append(CorrelationReport(metric_x, metric_y, r,
                                             len(pairs), "tile", model))
    if len(pooled) < 3:
        raise TooFew("tile-level correlation needs >= 3 tiles with data")
    xs, ys = zip(*pooled)
    reports.append(CorrelationReport(metric_x, metric_y, pearson(xs, ys),
                                     len(pooled), "tile", "pooled"))
    if per_model_r:
        reports.append(CorrelationReport(
            metric_x, metric_y, float(np.mean(per_model_r)),
            len(per_model_r), "tile", "per_model_mean"))
    return reports


def correlation_matrix(records, metrics, level: str = "model") -> list:
    """All pairwise correlations among `metrics`; pairs that cannot be
    computed (too few samples, zero variance) are skipped."""
    out = []
    for i, mx in enumerate(metrics):
        for my in metrics[i + 1:]:
            try:
                out.extend(correlate(records, mx, my, level))
            except (TooFew, ZeroVariance):
                continue
    return out
