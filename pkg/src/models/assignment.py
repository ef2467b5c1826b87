from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.ground_truth import ProximityMeasure

# Label encoding: a non-negative label is the index of the matched ground truth
NEGATIVE = -1
IGNORE = -2

# (tau_neg, tau_pos) used by published fixed-threshold assigners
THRESHOLD_PRESETS: Dict[str, Tuple[float, float]] = {
    "yolact": (0.40, 0.50),
    "retinamask": (0.40, 0.50),
    "rpn": (0.30, 0.70),
    "mask_rcnn": (0.50, 0.50),
}


class LabelKind(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    IGNORE = "ignore"

    @classmethod
    def of(cls, label: int) -> "LabelKind":
        if label >= 0:
            return cls.POSITIVE
        if label == NEGATIVE:
            return cls.NEGATIVE
        return cls.IGNORE


class FixedThresholds(BaseModel):
    """Fixed IoU-threshold rule: positive at or above tau_pos, negative below tau_neg"""
    tau_neg: float = Field(0.40, ge=0.0, le=1.0)
    tau_pos: float = Field(0.50, ge=0.0, le=1.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_order(self):
        if self.tau_neg > self.tau_pos:
            raise ValueError(f"tau_neg ({self.tau_neg}) must not exceed tau_pos ({self.tau_pos})")
        return self

    @classmethod
    def preset(cls, name: str) -> "FixedThresholds":
        key = name.strip().lower().replace("-", "_")
        if key not in THRESHOLD_PRESETS:
            raise ValueError(f"Unknown threshold preset {name!r}; valid presets: {', '.join(THRESHOLD_PRESETS)}")
        tau_neg, tau_pos = THRESHOLD_PRESETS[key]
        return cls(tau_neg=tau_neg, tau_pos=tau_pos)


class AssignerSpec(BaseModel):
    """Which assigner to run, with which proximity measure and parameters"""
    kind: Literal["fixed", "atss"] = "atss"
    measure: ProximityMeasure = ProximityMeasure.MAIOU
    k: int = Field(9, ge=1)
    tau_neg: float = Field(0.40, ge=0.0, le=1.0)
    tau_pos: float = Field(0.50, ge=0.0, le=1.0)
    preset: Optional[str] = None

    model_config = ConfigDict(frozen=True)

    @field_validator("kind", mode="before")
    def normalize_kind(cls, v):
        return str(v).strip().lower() if v is not None else v

    @field_validator("measure", mode="before")
    def parse_measure(cls, v):
        return ProximityMeasure.parse(v)

    @model_validator(mode="before")
    @classmethod
    def apply_preset(cls, data):
        # a preset overrides explicit thresholds
        if isinstance(data, dict) and data.get("preset") is not None:
            th = FixedThresholds.preset(data["preset"])
            data = {**data, "tau_neg": th.tau_neg, "tau_pos": th.tau_pos}
        return data

    @model_validator(mode="after")
    def validate_order(self):
        if self.tau_neg > self.tau_pos:
            raise ValueError(f"tau_neg ({self.tau_neg}) must not exceed tau_pos ({self.tau_pos})")
        return self

    @property
    def thresholds(self) -> FixedThresholds:
        return FixedThresholds(tau_neg=self.tau_neg, tau_pos=self.tau_pos)

    @property
    def name(self) -> str:
        if self.kind == "atss":
            return f"atss-{self.measure.value}-k{self.k}"
        return f"fixed-{self.measure.value}-{self.tau_neg:.2f}-{self.tau_pos:.2f}"


class AssignmentResult(BaseModel):
    """
    One label per anchor: gt index (positive), NEGATIVE or IGNORE.

    thresholds holds the adaptive threshold per gt for ATSS and is empty
    for the fixed rule.
    mask_fallback lists the gts scored with pixel IoU because their mask
    is empty; it is only filled for maIoU.
    """
    labels: Tuple[int, ...]
    num_gts: int = Field(ge=0)
    positives_per_gt: Tuple[int, ...]
    thresholds: Tuple[float, ...] = ()
    kind: Literal["fixed", "atss"] = "fixed"
    measure: ProximityMeasure = ProximityMeasure.IOU
    mask_fallback: Tuple[int, ...] = ()

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_labels(self):
        for label in self.labels:
            if label >= self.num_gts or label < IGNORE:
                raise ValueError(f"Label {label} is not a valid gt index for {self.num_gts} ground truths")
        if len(self.positives_per_gt) != self.num_gts:
            raise ValueError("positives_per_gt needs one entry per ground truth")
        if any(g < 0 or g >= self.num_gts for g in self.mask_fallback):
            raise ValueError(f"mask_fallback indices must be gt indices below {self.num_gts}")
        return self

    @classmethod
    def from_labels(cls, labels: np.ndarray, num_gts: int, **extra) -> "AssignmentResult":
        labels = np.asarray(labels, dtype=np.int64)
        positives = labels[labels >= 0]
        per_gt = np.bincount(positives, minlength=num_gts) if num_gts else np.zeros(0, dtype=np.int64)
        return cls(
            labels=tuple(int(v) for v in labels),
            num_gts=num_gts,
            positives_per_gt=tuple(int(v) for v in per_gt),
            **extra,
        )

    def __len__(self):
        return len(self.labels)

    @property
    def labels_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)

    def count(self, kind: LabelKind) -> int:
        labels = self.labels_array
        if kind is LabelKind.POSITIVE:
            return int((labels >= 0).sum())
        if kind is LabelKind.NEGATIVE:
            return int((labels == NEGATIVE).sum())
        return int((labels == IGNORE).sum())

    def summary(self) -> Dict:
        return {
            "anchors": len(self.labels),
            "positive": self.count(LabelKind.POSITIVE),
            "negative": self.count(LabelKind.NEGATIVE),
            "ignore": self.count(LabelKind.IGNORE),
            "positives_per_gt": list(self.positives_per_gt),
            "thresholds": [round(t, 12) for t in self.thresholds],
            "mask_fallback": list(self.mask_fallback),
        }


class DiffReport(BaseModel):
    """Label transitions between two assignments of the same anchors"""
    counts: Dict[str, int]
    indices: Dict[str, List[int]]
    reassigned: List[int] = Field(default_factory=list)

    @staticmethod
    def key(a: LabelKind, b: LabelKind) -> str:
        return f"{a.value}->{b.value}"

    def count(self, a: LabelKind, b: LabelKind) -> int:
        return self.counts.get(self.key(a, b), 0)

    @property
    def changed(self) -> int:
        """Anchors whose label kind differs"""
        return sum(v for k, v in self.counts.items() if k.split("->")[0] != k.split("->")[1])

    def merge(self, other: "DiffReport", offset: int = 0) -> "DiffReport":
        counts = {k: self.counts.get(k, 0) + other.counts.get(k, 0) for k in set(self.counts) | set(other.counts)}
        indices = {
            k: self.indices.get(k, []) + [i + offset for i in other.indices.get(k, [])]
            for k in set(self.indices) | set(other.indices)
        }
        return DiffReport(
            counts=dict(sorted(counts.items())),
            indices=dict(sorted(indices.items())),
            reassigned=self.reassigned + [i + offset for i in other.reassigned],
        )
