"""
Result models produced by the analysis package and serialized by the CLI.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from src.models.assignment import AssignerSpec, DiffReport
from src.models.histogram import Histogram, Histogram2D


class MobStats(BaseModel):
    """Distribution of mask-over-box ratios over a set of ground truths"""
    histogram: Histogram
    gts: int
    below_half: int

    @property
    def fraction_below_half(self) -> float:
        return self.below_half / self.gts if self.gts else 0.0

    def merge(self, other: "MobStats") -> "MobStats":
        return MobStats(
            histogram=self.histogram.merge(other.histogram),
            gts=self.gts + other.gts,
            below_half=self.below_half + other.below_half,
        )

    def to_dict(self) -> Dict:
        return {
            "gts": self.gts,
            "below_half": self.below_half,
            "fraction_below_half": self.fraction_below_half,
            "edges": list(self.histogram.edges),
            "counts": list(self.histogram.counts),
        }


class JointStats(BaseModel):
    """
    Joint distribution of (pixel IoU, maIoU) over anchor/gt pairs.

    Pairs where both measures are zero are dropped before binning.
    """
    histogram: Histogram2D
    pairs: int
    dropped_zero_pairs: int = 0
    low_iou_high_maiou: int = 0
    high_iou_low_maiou: int = 0

    def merge(self, other: "JointStats") -> "JointStats":
        return JointStats(
            histogram=self.histogram.merge(other.histogram),
            pairs=self.pairs + other.pairs,
            dropped_zero_pairs=self.dropped_zero_pairs + other.dropped_zero_pairs,
            low_iou_high_maiou=self.low_iou_high_maiou + other.low_iou_high_maiou,
            high_iou_low_maiou=self.high_iou_low_maiou + other.high_iou_low_maiou,
        )

    def to_dict(self) -> Dict:
        return {
            "pairs": self.pairs,
            "dropped_zero_pairs": self.dropped_zero_pairs,
            "diagonal": self.histogram.diagonal_total,
            "quadrants": {
                "low_iou_high_maiou": self.low_iou_high_maiou,
                "high_iou_low_maiou": self.high_iou_low_maiou,
            },
            "iou_edges": list(self.histogram.x_edges),
            "maiou_edges": list(self.histogram.y_edges),
            "counts": [list(row) for row in self.histogram.counts],
        }


class AssignerSummary(BaseModel):
    name: str
    spec: AssignerSpec
    anchors: int = 0
    positive: int = 0
    negative: int = 0
    ignore: int = 0
    gts: int = 0
    # number of gts that received n positives, keyed by n
    positives_per_gt: Dict[int, int] = Field(default_factory=dict)

    @property
    def gts_without_positive(self) -> int:
        return self.positives_per_gt.get(0, 0)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "spec": self.spec.model_dump(mode="json"),
            "anchors": self.anchors,
            "positive": self.positive,
            "negative": self.negative,
            "ignore": self.ignore,
            "gts": self.gts,
            "gts_without_positive": self.gts_without_positive,
            "positives_per_gt": {str(k): v for k, v in sorted(self.positives_per_gt.items())},
        }


class PairDiff(BaseModel):
    a: int
    b: int
    report: DiffReport

    def to_dict(self, names: List[str]) -> Dict:
        return {
            "a": names[self.a],
            "b": names[self.b],
            "changed": self.report.changed,
            "transitions": dict(self.report.counts),
            "reassigned": len(self.report.reassigned),
        }


class ComparisonReport(BaseModel):
    assigners: List[AssignerSummary]
    diffs: List[PairDiff] = Field(default_factory=list)

    @property
    def names(self) -> List[str]:
        # duplicate specs get a positional suffix so report keys stay unique
        seen: Dict[str, int] = {}
        names = []
        for summary in self.assigners:
            n = seen.get(summary.name, 0)
            seen[summary.name] = n + 1
            names.append(summary.name if n == 0 else f"{summary.name}#{n + 1}")
        return names

    def diff(self, a: int, b: int) -> Optional[DiffReport]:
        for d in self.diffs:
            if (d.a, d.b) == (a, b):
                return d.report
        return None

    def to_dict(self) -> Dict:
        names = self.names
        assigners = []
        for name, summary in zip(names, self.assigners):
            entry = summary.to_dict()
            entry["name"] = name
            assigners.append(entry)
        return {
            "assigners": assigners,
            "diffs": [d.to_dict(names) for d in self.diffs],
        }


class BenchCase(BaseModel):
    grid: int = Field(ge=1)
    anchors: int = Field(ge=1)
    gts: int = Field(ge=1)


class BenchResult(BaseModel):
    case: BenchCase
    pairs: int
    brute_seconds: float
    fast_seconds: float
    repetitions: int
    identical: bool
    low_confidence: bool = False

    @property
    def speedup(self) -> float:
        if self.fast_seconds <= 0:
            return float("inf")
        return self.brute_seconds / self.fast_seconds

    def to_dict(self, include_times: bool = True) -> Dict:
        out = {
            "grid": self.case.grid,
            "anchors": self.case.anchors,
            "gts": self.case.gts,
            "pairs": self.pairs,
            "repetitions": self.repetitions,
            "identical": self.identical,
            "low_confidence": self.low_confidence,
        }
        if include_times:
            out.update(
                brute_seconds=self.brute_seconds,
                fast_seconds=self.fast_seconds,
                speedup=self.speedup,
            )
        return out


class BenchReport(BaseModel):
    results: List[BenchResult]
    seed: int = 0
    speedup_floor: float = 10.0
    host: Optional[str] = None
    note: str = (
        "Kernel-only timing of brute-force versus integral-image maIoU. "
        "Speedups reported for whole training iterations are not comparable."
    )

    def to_dict(self, include_times: bool = True) -> Dict:
        out = {
            "seed": self.seed,
            "speedup_floor": self.speedup_floor,
            "note": self.note,
            "results": [r.to_dict(include_times) for r in self.results],
        }
        if include_times:
            out["host"] = self.host
        return out
