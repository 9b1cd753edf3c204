"""
Result persistence for the annealbench CLI.

Every file goes through one ResultWriter: CSV with a comment header carrying
the tool version and config hash, floats at 17 significant digits, an
optional JSON mirror, and atomically replaced manifests.
"""

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from annealbench import __version__
from src.utils import get_logger

logger = get_logger(__name__)


def format_value(value: Any) -> str:
    """Canonical text for one CSV cell."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


class ResultWriter:
    """Serialized writer for one output directory."""

    def __init__(self, out_dir: Path | str, config_sha256: str = "", config_json: str = "{}"):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.config_sha256 = config_sha256
        self.config_json = config_json

    def _atomic_write(self, path: Path, text: str) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def header(self) -> str:
        return (
            f"# annealbench {__version__}\n"
            f"# config_sha256 {self.config_sha256}\n"
            f"# config {self.config_json}\n"
        )

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[dict[str, Any]]) -> Path:
        buffer = io.StringIO()
        buffer.write(self.header())
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
        path = self.out_dir / name
        self._atomic_write(path, buffer.getvalue())
        logger.info("results_written", path=str(path))
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        document = {
            "version": __version__,
            "config_sha256": self.config_sha256,
            "data": payload,
        }
        path = self.out_dir / name
        self._atomic_write(path, json.dumps(document, indent=2, sort_keys=True) + "\n")
        logger.info("results_written", path=str(path))
        return path

    def write_records(self, stem: str, fmt: str, columns: Sequence[str], rows: list[dict[str, Any]]) -> Path:
        """CSV, or JSON when ``fmt`` is json."""
        if fmt == "json":
            return self.write_json(f"{stem}.json", [{c: row.get(c) for c in columns} for row in rows])
        return self.write_csv(f"{stem}.csv", columns, rows)

    def write_manifest(self, text: str) -> Path:
        path = self.out_dir / "manifest.json"
        self._atomic_write(path, text)
        return path

    def read_manifest(self) -> Optional[str]:
        path = self.out_dir / "manifest.json"
        return path.read_text(encoding="utf-8") if path.is_file() else None


def read_results_csv(path: Path | str) -> list[dict[str, str]]:
    """Rows of a results CSV, skipping the comment header."""
    with open(path, encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))
