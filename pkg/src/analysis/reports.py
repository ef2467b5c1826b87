"""
Report rendering: JSON documents, CSV histograms and aligned text tables.

Everything renders to a string first; writing happens in one step once
every output of a command is ready.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence

from src.config.settings import settings
from src.models.histogram import Histogram, Histogram2D
from src.models.reports import BenchReport, ComparisonReport, MobStats

logger = logging.getLogger(__name__)


def with_schema(payload: Mapping[str, Any]) -> Dict[str, Any]:
    return {"schema_version": settings.SCHEMA_VERSION, **payload}


def to_json(payload: Mapping[str, Any]) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline"""
    return json.dumps(with_schema(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def histogram_csv(hist: Histogram) -> str:
    rows = [
        (repr(lo), repr(hi), count)
        for lo, hi, count in zip(hist.edges, hist.edges[1:], hist.counts)
    ]
    return _csv_text(("bin_lo", "bin_hi", "count"), rows)


def histogram2d_csv(hist: Histogram2D) -> str:
    rows = []
    for i, row in enumerate(hist.counts):
        for j, count in enumerate(row):
            rows.append((
                repr(hist.x_edges[i]), repr(hist.x_edges[i + 1]),
                repr(hist.y_edges[j]), repr(hist.y_edges[j + 1]),
                count,
            ))
    return _csv_text(("iou_lo", "iou_hi", "maiou_lo", "maiou_hi", "count"), rows)


def format_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Plain-text table; numbers right-aligned, text left-aligned"""
    cells = [[str(h) for h in headers]] + [[_cell(v) for v in row] for row in rows]
    widths = [max(len(r[c]) for r in cells) for c in range(len(headers))]
    numeric = [
        all(isinstance(row[c], (int, float)) and not isinstance(row[c], bool) for row in rows)
        for c in range(len(headers))
    ]

    def line(values: List[str]) -> str:
        parts = [v.rjust(w) if num else v.ljust(w) for v, w, num in zip(values, widths, numeric)]
        return "  ".join(parts).rstrip()

    out = [line(cells[0]), "  ".join("-" * w for w in widths)]
    out.extend(line(r) for r in cells[1:])
    return "\n".join(out) + "\n"


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def mob_table(stats: MobStats) -> str:
    h = stats.histogram
    rows = [(f"[{lo:.2f}, {hi:.2f})", c) for lo, hi, c in zip(h.edges, h.edges[1:], h.counts)]
    table = format_table(("MOB", "gts"), rows)
    return table + f"\nMOB < 0.5: {stats.below_half}/{stats.gts} ({stats.fraction_below_half:.1%})\n"


def bench_table(report: BenchReport) -> str:
    rows = [
        (r.case.grid, r.case.anchors, r.case.gts, r.brute_seconds, r.fast_seconds,
         round(r.speedup, 1), r.identical, r.low_confidence)
        for r in report.results
    ]
    table = format_table(
        ("grid", "anchors", "gts", "brute_s", "fast_s", "speedup", "identical", "low_conf"), rows
    )
    return table + f"\nspeedup floor: {report.speedup_floor:g}x. {report.note}\n"


def comparison_table(report: ComparisonReport) -> str:
    names = report.names
    rows = [
        (name, s.anchors, s.positive, s.negative, s.ignore, s.gts_without_positive)
        for name, s in zip(names, report.assigners)
    ]
    out = format_table(("assigner", "anchors", "positive", "negative", "ignore", "gts_no_pos"), rows)
    for d in report.diffs:
        transitions = [(k, v) for k, v in d.report.counts.items()]
        out += f"\n{names[d.a]} -> {names[d.b]}\n"
        out += format_table(("transition", "anchors"), transitions)
    return out


def write_outputs(out_dir: Path, files: Mapping[str, str]) -> List[Path]:
    """Write rendered outputs under out_dir, creating it if needed"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        path = out_dir / name
        path.write_text(text, encoding="utf-8", newline="")
        written.append(path)
        logger.debug(f"Wrote {path}")
    return written
