"""Run configuration and pair manifests.

The config is a single flat JSON document; its sha256 digest (canonical,
key-sorted serialization) is stamped into every output so metric
provenance stays auditable.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .errors import IoError
from .stains import DEFAULT_BASIS_ROWS, DEFAULT_DAB_THRESHOLD, MorphologySpec, StainBasis
from .texture import SsimParams

CONFIG_ENV_VAR = "IHCEVAL_CONFIG"

_DEFAULT_BASIS_FLAT = tuple(v for row in DEFAULT_BASIS_ROWS for v in row)


@dataclass(frozen=True)
class RunConfig:
    stain_basis: tuple = _DEFAULT_BASIS_FLAT  # 9 reals, row-major H/E/DAB
    dab_threshold: float = DEFAULT_DAB_THRESHOLD
    cleanup_operations: tuple = ("dilate",)
    cleanup_kernel: int = 3
    cleanup_iterations: int = 1
    ssim_window: int = 11
    ssim_window_kind: str = "gaussian"
    ssim_sigma: float = 1.5
    ssim_c1: float = (0.01 * 255) ** 2
    ssim_c2: float = (0.03 * 255) ** 2
    tile: int = 256
    overlap: int = 192
    min_area: int = 15_000
    patch_size: int = 256
    knn_k: int = 3
    kid_estimator: str = "unbiased"
    kid_subsets: int = 10
    kid_subset_size: int = 1000
    seed: int = 0
    positives_only: bool = True
    allow_tag_mismatch: bool = False

    def basis(self) -> StainBasis:
        return StainBasis(np.asarray(self.stain_basis,
                                     dtype=np.float64).reshape(3, 3))

    def morphology(self) -> MorphologySpec:
        return MorphologySpec(operations=tuple(self.cleanup_operations),
                              kernel=self.cleanup_kernel,
                              iterations=self.cleanup_iterations)

    def ssim_params(self) -> SsimParams:
        return SsimParams(window=self.ssim_window,
                          window_kind=self.ssim_window_kind,
                          sigma=self.ssim_sigma,
                          c1=self.ssim_c1, c2=self.ssim_c2)

    def kid_subset_spec(self, n: int) -> tuple:
        return (self.kid_subsets, min(self.kid_subset_size, n), self.seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stain_basis"] = list(self.stain_basis)
        d["cleanup_operations"] = list(self.cleanup_operations)
        return d

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, payload: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(payload)
        if "stain_basis" in kwargs:
            kwargs["stain_basis"] = tuple(float(v)
                                          for v in kwargs["stain_basis"])
        if "cleanup_operations" in kwargs:
            kwargs["cleanup_operations"] = tuple(kwargs["cleanup_operations"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path=None) -> "RunConfig":
        """Load from an explicit path, the env default, or builtin defaults."""
        if path is None:
            path = os.environ.get(CONFIG_ENV_VAR)
        if path is None:
            return cls()
        try:
            with open(path, "r", encoding="utf-8") as f:
                return cls.from_dict(json.load(f))
        except OSError as e:
            raise IoError(f"cannot read config {path}: {e}") from e

    def override(self, **kwargs) -> "RunConfig":
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **updates) if updates else self


@dataclass(frozen=True)
class PairRow:
    tile_id: str
    group: str
    real_path: str
    virtual_path: str
    real_mask_path: str | None = None
    virtual_mask_path: str | None = None


def read_pair_manifest(path) -> list[PairRow]:
    """Read a pair manifest CSV; tile_ids must be unique."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            required = {"tile_id", "real_path", "virtual_path"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise ValueError(
                    f"manifest must have columns {sorted(required)}, "
                    f"got {reader.fieldnames}"
                )
            rows = []
            for raw in reader:
                rows.append(PairRow(
                    tile_id=raw["tile_id"],
                    group=raw.get("group") or "",
                    real_path=raw["real_path"],
                    virtual_path=raw["virtual_path"],
                    real_mask_path=raw.get("real_mask_path") or None,
                    virtual_mask_path=raw.get("virtual_mask_path") or None,
                ))
    except OSError as e:
        raise IoError(f"cannot read manifest {path}: {e}") from e
    seen = set()
    for row in rows:
        if row.tile_id in seen:
            raise ValueError(f"duplicate tile_id {row.tile_id!r} in manifest")
        seen.add(row.tile_id)
    return rows
