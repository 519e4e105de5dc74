"""Paired and set-level evaluation of reconstructed shape collections.

Reference and generated shapes pair up by label.  Accuracy metrics
(chamfer, edge chamfer, normal consistency) are computed per pair on
large clouds normalized by the reference bounding box, then medianed.
Distribution metrics (coverage, minimum matching distance, occupancy
divergence) run on smaller per-shape clouds normalized by their own
boxes, over repeated random subsets, and are averaged.

Sampling seeds derive from (protocol seed, purpose, label), never from
the reference/generated role, so identical geometry on both sides yields
exactly zero distance.  Reports serialize to stable JSON and CSV: two
runs over the same inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from . import metrics
from .geometry import Mesh, bounding_box
from .metrics import EdgeParams
from .sampling import PointCloud, sample_surface, unit_normalize

_PURPOSE_ACCURACY = 0
_PURPOSE_DISTRIBUTION = 1
_PURPOSE_SUBSET = 2


@dataclass(frozen=True)
class EvalProtocol:
    points_accuracy: int = 100000
    points_distribution: int = 2000
    subset_size: int = 3000
    repeats: int = 10
    rng_seed: int = 0
    voxel_resolution: int = 32

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvalProtocol":
        known = {f: int(data[f]) for f in cls.__dataclass_fields__ if f in data}
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown protocol fields: {', '.join(sorted(unknown))}")
        return cls(**known)

    def as_dict(self) -> dict[str, int]:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


@dataclass(frozen=True)
class PairResult:
    label: str
    cd: float  # x1000
    ecd: float | None  # x1000
    nc: float


@dataclass(frozen=True)
class MetricsReport:
    protocol: EvalProtocol
    normalization: str
    reference_count: int
    generated_count: int
    valid_pairs: int
    ecd_undefined: int
    invalid_count: int
    cd_median: float | None
    ecd_median: float | None
    nc_median: float | None
    cov_pct: float | None
    mmd: float | None
    jsd: float | None
    ir_pct: float
    pairs: tuple[PairResult, ...]

    def as_dict(self) -> dict[str, Any]:
        return {
            "protocol": self.protocol.as_dict(),
            "normalization": self.normalization,
            "counts": {
                "reference": self.reference_count,
                "generated": self.generated_count,
                "valid_pairs": self.valid_pairs,
                "ecd_undefined": self.ecd_undefined,
                "invalid": self.invalid_count,
            },
            "metrics": {
                "cd": self.cd_median,
                "ecd": self.ecd_median,
                "nc": self.nc_median,
                "mmd": self.mmd,
                "cov": self.cov_pct,
                "jsd": self.jsd,
                "ir": self.ir_pct,
            },
            "pairs": [
                {"label": p.label, "cd": p.cd, "ecd": p.ecd, "nc": p.nc}
                for p in self.pairs
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["label,cd,ecd,nc"]
        for p in self.pairs:
            ecd = "" if p.ecd is None else repr(p.ecd)
            lines.append(f"{p.label},{repr(p.cd)},{ecd},{repr(p.nc)}")
        return "\n".join(lines) + "\n"

    def summary_table(self) -> str:
        def fmt(x: float | None) -> str:
            return "n/a" if x is None else f"{x:.4f}"

        headers = ["CD", "ECD", "NC", "MMD", "COV", "JSD", "IR"]
        values = [
            fmt(self.cd_median),
            fmt(self.ecd_median),
            fmt(self.nc_median),
            fmt(self.mmd),
            fmt(self.cov_pct),
            fmt(self.jsd),
            fmt(self.ir_pct),
        ]
        widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
        head = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
        row = "  ".join(v.rjust(w) for v, w in zip(values, widths))
        return f"{head}\n{row}"


def _label_entropy(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _rng(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(entropy)))


def _check_labels(reference, generated) -> None:
    ref_labels = [label for label, _ in reference]
    gen_labels = [label for label, _ in generated]
    if len(set(ref_labels)) != len(ref_labels):
        raise ValueError("duplicate reference labels")
    if len(set(gen_labels)) != len(gen_labels):
        raise ValueError("duplicate generated labels")
    if set(ref_labels) != set(gen_labels):
        missing = sorted(set(ref_labels) ^ set(gen_labels))
        raise ValueError(f"label sets differ: {', '.join(missing[:5])}")


def evaluate_sets(
    reference: Iterable[tuple[str, Mesh]],
    generated: Iterable[tuple[str, Mesh | None]],
    protocol: EvalProtocol = EvalProtocol(),
    edge_params: EdgeParams = EdgeParams(),
) -> MetricsReport:
    """Run the full protocol over label-paired shape collections.

    Generated entries may carry None instead of a mesh, meaning the
    program produced no valid geometry; they count toward the invalidity
    ratio and are excluded from the other metrics.
    """
    reference = sorted(reference, key=lambda kv: kv[0])
    generated = sorted(generated, key=lambda kv: kv[0])
    _check_labels(reference, generated)
    gen_by_label = dict(generated)
    seed = protocol.rng_seed

    invalid = sum(1 for _, mesh in generated if mesh is None)
    ir = metrics.invalidity_ratio(invalid, len(generated)) if generated else 0.0

    # Accuracy: large clouds, reference-box normalization, per-pair.
    pair_rows: list[PairResult] = []
    ecd_undefined = 0
    for label, ref_mesh in reference:
        gen_mesh = gen_by_label[label]
        if gen_mesh is None:
            continue
        entropy = _label_entropy(label)
        ref_cloud = sample_surface(
            ref_mesh, protocol.points_accuracy, _rng(seed, _PURPOSE_ACCURACY, entropy)
        )
        gen_cloud = sample_surface(
            gen_mesh, protocol.points_accuracy, _rng(seed, _PURPOSE_ACCURACY, entropy)
        )
        ref_box = bounding_box(ref_mesh)
        ref_cloud = unit_normalize(ref_cloud, ref_box)
        gen_cloud = unit_normalize(gen_cloud, ref_box)
        cd = metrics.chamfer_distance(ref_cloud.points, gen_cloud.points)
        ecd = metrics.edge_chamfer_distance(ref_cloud, gen_cloud, edge_params)
        nc = metrics.normal_consistency(ref_cloud, gen_cloud)
        if ecd is None:
            ecd_undefined += 1
        pair_rows.append(
            PairResult(
                label,
                cd * 1000.0,
                None if ecd is None else ecd * 1000.0,
                nc,
            )
        )

    def median(values: list[float]) -> float | None:
        return float(np.median(values)) if values else None

    cd_median = median([p.cd for p in pair_rows])
    ecd_median = median([p.ecd for p in pair_rows if p.ecd is not None])
    nc_median = median([p.nc for p in pair_rows])

    # Distribution: small clouds, own-box normalization, subset repeats.
    cov = mmd = jsd = None
    valid_gen = [(label, mesh) for label, mesh in generated if mesh is not None]
    if valid_gen and reference:
        ref_clouds = [
            _distribution_cloud(mesh, label, protocol) for label, mesh in reference
        ]
        gen_clouds = [
            _distribution_cloud(mesh, label, protocol) for label, mesh in valid_gen
        ]
        n_ref = min(protocol.subset_size, len(ref_clouds))
        n_gen = min(protocol.subset_size, len(gen_clouds))
        cache: dict[tuple[int, int], float] = {}

        def pair_cd(i: int, j: int) -> float:
            key = (i, j)
            if key not in cache:
                cache[key] = metrics.chamfer_distance(
                    ref_clouds[i].points, gen_clouds[j].points
                )
            return cache[key]

        cov_sum = mmd_sum = jsd_sum = 0.0
        for rep in range(protocol.repeats):
            ref_idx = _subset(len(ref_clouds), n_ref, _rng(seed, _PURPOSE_SUBSET, rep, 0))
            gen_idx = _subset(len(gen_clouds), n_gen, _rng(seed, _PURPOSE_SUBSET, rep, 1))
            matrix = np.array(
                [[pair_cd(i, j) for j in gen_idx] for i in ref_idx], dtype=np.float64
            )
            cov_sum += metrics.coverage(matrix)
            mmd_sum += metrics.minimum_matching_distance(matrix)
            jsd_sum += metrics.jensen_shannon_divergence(
                [ref_clouds[i].points for i in ref_idx],
                [gen_clouds[j].points for j in gen_idx],
                protocol.voxel_resolution,
            )
        cov = cov_sum / protocol.repeats
        mmd = mmd_sum / protocol.repeats
        jsd = jsd_sum / protocol.repeats

    return MetricsReport(
        protocol=protocol,
        normalization="reference-bbox",
        reference_count=len(reference),
        generated_count=len(generated),
        valid_pairs=len(pair_rows),
        ecd_undefined=ecd_undefined,
        invalid_count=invalid,
        cd_median=cd_median,
        ecd_median=ecd_median,
        nc_median=nc_median,
        cov_pct=cov,
        mmd=mmd,
        jsd=jsd,
        ir_pct=ir,
        pairs=tuple(pair_rows),
    )


def _distribution_cloud(mesh: Mesh, label: str, protocol: EvalProtocol) -> PointCloud:
    """Each shape is sampled once and reused across subset repeats."""
    rng = _rng(protocol.rng_seed, _PURPOSE_DISTRIBUTION, _label_entropy(label))
    cloud = sample_surface(mesh, protocol.points_distribution, rng)
    return unit_normalize(cloud, bounding_box(mesh))


def _subset(total: int, size: int, rng: np.random.Generator) -> list[int]:
    if size >= total:
        return list(range(total))
    return sorted(int(i) for i in rng.choice(total, size=size, replace=False))
