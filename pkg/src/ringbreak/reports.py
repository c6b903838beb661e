"""Report serialization.

Reports are plain JSON with sorted keys, no timestamps, and the resolved
experiment config embedded, so re-running a report's config reproduces the
file byte for byte. Anything non-reproducible (output paths, worker count)
stays out of the embedded config.
"""

from __future__ import annotations

import csv
import json
from typing import Optional, Sequence

SCHEMA_VERSION = 1


def make_report(kind: str, config: dict, body: dict) -> dict:
    report = {"schema_version": SCHEMA_VERSION, "kind": kind, "config": config}
    overlap = set(body) & set(report)
    if overlap:
        raise ValueError(f"body shadows reserved report fields: {sorted(overlap)}")
    report.update(body)
    return report


def render_report(report: dict) -> bytes:
    return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode()


def write_report(report: dict, path: Optional[str]) -> bytes:
    data = render_report(report)
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
    return data


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
