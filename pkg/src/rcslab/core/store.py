"""Deterministic, atomic persistence of result records as CSV and JSONL."""

import csv
import io
import json
import logging
import os
import tempfile
from collections.abc import Sequence
from contextlib import suppress
from pathlib import Path
from typing import Any

from rcslab.core.models import CSV_COLUMNS, ResultRecord

logger = logging.getLogger(__name__)


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ReportStore:
    """Writes a scan's records under one output directory.

    Files are replaced atomically: a reader sees either the previous report
    or the complete new one, never a partial file.
    """

    def __init__(self, out_dir: Path, include_timing: bool = False):
        self.out_dir = Path(out_dir)
        self.include_timing = include_timing

    def csv_path(self, stem: str) -> Path:
        return self.out_dir / f"{stem}.csv"

    def jsonl_path(self, stem: str) -> Path:
        return self.out_dir / f"{stem}.jsonl"

    def render_csv(self, records: Sequence[ResultRecord]) -> str:
        """CSV text: header plus one row per record, fixed column order."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            row = record.to_row()
            writer.writerow([_format_cell(row[column]) for column in CSV_COLUMNS])
        return buffer.getvalue()

    def render_jsonl(self, records: Sequence[ResultRecord]) -> str:
        """JSONL text: one full-fidelity JSON object per record."""
        lines = [
            json.dumps(r.to_dict(include_timing=self.include_timing), sort_keys=True)
            for r in records
        ]
        return "".join(line + "\n" for line in lines)

    def write(self, stem: str, records: Sequence[ResultRecord], fmt: str = "both") -> list[Path]:
        """Write the report in the requested format(s) and return the paths."""
        written: list[Path] = []
        if fmt in ("csv", "both"):
            path = self.csv_path(stem)
            self._atomic_write(path, self.render_csv(records))
            written.append(path)
        if fmt in ("jsonl", "both"):
            path = self.jsonl_path(stem)
            self._atomic_write(path, self.render_jsonl(records))
            written.append(path)
        logger.info("Wrote %d record(s) to %s", len(records), ", ".join(map(str, written)))
        return written

    def read_jsonl(self, stem: str) -> list[ResultRecord]:
        """Load records back from a JSONL report."""
        path = self.jsonl_path(stem)
        records = []
        with open(path) as f:
            for line in f:
                line = line.strip()
                if line:
                    records.append(ResultRecord.from_dict(json.loads(line)))
        return records

    def _atomic_write(self, path: Path, content: str) -> None:
        """Write text to path atomically via temp-file rename.

        The temp file lives in the target directory so os.replace() stays on
        one filesystem.
        """
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as f:
                f.write(content)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp_path, path)
        except Exception:
            with suppress(OSError):
                os.unlink(tmp_path)
            raise


def emit_report(
    records: Sequence[ResultRecord],
    path: Path,
    fmt: str = "both",
    include_timing: bool = False,
) -> list[Path]:
    """Write ``records`` next to ``path`` (its stem names the files)."""
    path = Path(path)
    store = ReportStore(path.parent, include_timing=include_timing)
    return store.write(path.stem if path.suffix else path.name, records, fmt)
