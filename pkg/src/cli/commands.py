"""
Command implementations behind run.py.

Each command computes every output in memory first and only then writes
the output directory, so a failing run leaves nothing behind. Exit codes:
0 success, 1 input or I/O error, 2 usage or validation error.
"""

import functools
import logging
import sys
from typing import Callable, Dict, List, NamedTuple, Optional

from pydantic import ValidationError

from src.analysis.bench import bench_maiou
from src.analysis.reports import (
    bench_table,
    comparison_table,
    format_table,
    histogram2d_csv,
    histogram_csv,
    mob_table,
    to_json,
    write_outputs,
)
from src.analysis.statistics import compare_assigners, joint_histogram, mob_histogram
from src.config.run_config import RunConfig, load_run_config
from src.core.anchors import generate
from src.core.assigner import run_assigner
from src.data.coco import LoadOptions, load_with_stats
from src.models.assignment import AssignerSpec, LabelKind
from src.models.ground_truth import ProximityMeasure, Scene
from src.utils.errors import MaiouError, UsageError
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_USAGE = 2

ASSIGNER_KEYS = ("k", "tau_neg", "tau_pos", "preset")


class CommandOutput(NamedTuple):
    files: Dict[str, str]
    text: str = ""


##############################################################################
# Helpers
##############################################################################

def validation_message(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        where = ".".join(str(p) for p in err["loc"]) or "config"
        parts.append(f"{where}: {err['msg']}")
    return "; ".join(parts)


def exit_codes(fn: Callable[..., CommandOutput]) -> Callable[..., int]:
    """Turn a command into an exit status; messages go to stderr"""

    @functools.wraps(fn)
    def wrapper(cfg: RunConfig, *args, **kwargs) -> int:
        try:
            output = fn(cfg, *args, **kwargs)
            files = {"run_config.json": cfg.to_json(), **output.files}
            written = write_outputs(cfg.out, files)
        except ValidationError as e:
            print(f"error: invalid configuration: {validation_message(e)}", file=sys.stderr)
            return EXIT_USAGE
        except UsageError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
        except (MaiouError, OSError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INPUT
        if output.text:
            sys.stdout.write(output.text)
        logger.info(f"{fn.__name__}: wrote {len(written)} files to {cfg.out}")
        return EXIT_OK

    return wrapper


def parse_assigner(text: str) -> AssignerSpec:
    """
    Parse KIND:MEASURE[:key=value...], e.g. "atss:maiou:k=9" or
    "fixed:iou:preset=yolact".
    """
    parts = [p.strip() for p in text.split(":")]
    if len(parts) < 2 or not parts[0] or not parts[1]:
        raise UsageError(f"assigner {text!r} must look like KIND:MEASURE[:key=value...]")
    kind, measure = parts[0].lower(), parts[1]
    if kind not in ("fixed", "atss"):
        raise UsageError(f"unknown assigner kind {parts[0]!r}; valid kinds: fixed, atss")
    try:
        measure = ProximityMeasure.parse(measure)
    except ValueError as e:
        raise UsageError(str(e)) from None

    params = {}
    for item in parts[2:]:
        key, sep, value = item.partition("=")
        key = key.strip().lower()
        if not sep or key not in ASSIGNER_KEYS:
            raise UsageError(f"assigner parameter {item!r} must be one of {', '.join(ASSIGNER_KEYS)} as key=value")
        params[key] = value.strip()
    try:
        return AssignerSpec(kind=kind, measure=measure, **params)
    except ValidationError as e:
        raise UsageError(f"assigner {text!r}: {validation_message(e)}") from None


def _load_scenes(cfg: RunConfig) -> List[Scene]:
    if cfg.dataset is None:
        raise UsageError("a dataset is required (--dataset or 'dataset' in the config file)")
    scenes, stats = load_with_stats(cfg.dataset, LoadOptions(include_crowd=cfg.include_crowd, workers=cfg.workers))
    if stats.skipped:
        logger.warning(f"{stats.skipped} of {stats.annotations} annotations skipped")
    return scenes


##############################################################################
# Commands
##############################################################################

@exit_codes
def cmd_assign(cfg: RunConfig) -> CommandOutput:
    """Per-scene label summaries for every configured assigner"""
    scenes = _load_scenes(cfg)

    def one(scene: Scene):
        anchors = generate(scene.height, scene.width, cfg.anchors)
        return [run_assigner(spec, anchors, scene.gts) for spec in cfg.assigners]

    per_scene = ordered_map(one, scenes, cfg.workers)

    assigners = []
    rows = []
    for i, spec in enumerate(cfg.assigners):
        totals = {kind.value: 0 for kind in LabelKind}
        totals["anchors"] = 0
        entries = []
        for scene, results in zip(scenes, per_scene):
            r = results[i]
            summary = r.summary()
            for key in ("anchors", "positive", "negative", "ignore"):
                totals[key] += summary[key]
            entries.append({
                "image_id": scene.image_id,
                "annotation_ids": [gt.annotation_id for gt in scene.gts],
                **summary,
            })
        assigners.append({"name": spec.name, "spec": spec.model_dump(mode="json"), "scenes": entries, "totals": totals})
        rows.append((spec.name, totals["anchors"], totals["positive"], totals["negative"], totals["ignore"]))

    payload = {
        "dataset": str(cfg.dataset),
        "scenes": len(scenes),
        "gts": sum(len(s) for s in scenes),
        "anchor_config": cfg.anchors.model_dump(mode="json"),
        "assigners": assigners,
    }
    text = format_table(("assigner", "anchors", "positive", "negative", "ignore"), rows)
    return CommandOutput(files={"assign.json": to_json(payload)}, text=text)


@exit_codes
def cmd_stats(cfg: RunConfig) -> CommandOutput:
    """MOB histogram and IoU vs maIoU joint histogram"""
    if not (cfg.analysis.mob or cfg.analysis.joint):
        raise UsageError("nothing to compute: both the MOB and the joint histogram are disabled")
    scenes = _load_scenes(cfg)
    bins = cfg.analysis.bins

    payload = {"dataset": str(cfg.dataset), "bins": bins}
    files = {}
    text = ""
    if cfg.analysis.mob:
        mob = mob_histogram(scenes, bins, cfg.workers)
        payload["mob"] = mob.to_dict()
        files["mob_histogram.csv"] = histogram_csv(mob.histogram)
        text += mob_table(mob)
    if cfg.analysis.joint:
        joint = joint_histogram(scenes, cfg.anchors, bins, cfg.workers)
        payload["joint"] = joint.to_dict()
        files["joint_histogram.csv"] = histogram2d_csv(joint.histogram)
        text += (
            f"\njoint: {joint.pairs} pairs, {joint.histogram.diagonal_total} on the diagonal, "
            f"{joint.low_iou_high_maiou} low-IoU/high-maIoU, {joint.high_iou_low_maiou} high-IoU/low-maIoU\n"
        )
    files["stats.json"] = to_json(payload)
    return CommandOutput(files=files, text=text)


@exit_codes
def cmd_bench(cfg: RunConfig) -> CommandOutput:
    """Brute-force versus integral-image timing table"""
    b = cfg.bench
    report = bench_maiou(b.grids, b.anchors, b.gts, repetitions=b.repetitions, seed=cfg.seed)
    return CommandOutput(files={"bench.json": to_json(report.to_dict())}, text=bench_table(report))


@exit_codes
def cmd_compare(cfg: RunConfig) -> CommandOutput:
    """Label totals and transition counts between two or more assigners"""
    if len(cfg.assigners) < 2:
        raise UsageError(f"compare needs at least two assigners, got {len(cfg.assigners)}")
    scenes = _load_scenes(cfg)
    report = compare_assigners(scenes, cfg.anchors, cfg.assigners, cfg.workers)
    payload = {"dataset": str(cfg.dataset), **report.to_dict()}
    return CommandOutput(files={"compare.json": to_json(payload)}, text=comparison_table(report))


def cmd_validate_config(path: Optional[str]) -> int:
    """Load and validate a config file without running anything"""
    try:
        cfg = load_run_config(path)
    except ValidationError as e:
        print(f"Configuration error: {validation_message(e)}", file=sys.stderr)
        return EXIT_USAGE
    except MaiouError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_INPUT
    print(f"Configuration is valid ({len(cfg.assigners)} assigners, {len(cfg.bench.grids)} bench cases).")
    return EXIT_OK
