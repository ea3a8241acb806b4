import csv
import datetime
import hashlib
import json
import math
import numbers
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import humanize
import numpy as np
import structlog

from observability.tracing import Tracing
from tma_exception import OutputException

TOOL_VERSION = "0.1.0"
SIGNIFICANT_DIGITS = 12
PHASOR_DECIMALS = 15


def snap(value: float, decimals: int = PHASOR_DECIMALS) -> float:
    """Rounds away float residue such as cos(pi/2) = 6.1e-17"""
    return round(float(value), decimals) + 0.0


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        text = f"{value:.{SIGNIFICANT_DIGITS}g}"
        return "0" if text == "-0" else text
    return str(value)


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunManifest:
    """Everything needed to rerun a command; the only artifact carrying a timestamp"""

    command: str
    config: dict[str, Any]
    outputs: dict[str, str] = field(default_factory=dict)
    """File name -> sha256"""
    assumptions: dict[str, Any] = field(default_factory=dict)
    version: str = TOOL_VERSION
    created: str = field(default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat())
    trace: dict[str, str] = field(default_factory=dict)


class RunOutput:
    """Writes the artifacts of one command into a directory and records them in its manifest"""

    def __init__(self, out_dir: Path | str, command: str, config: dict[str, Any], assumptions: dict[str, Any] | None = None) -> None:
        self.out_dir = Path(out_dir)
        self.manifest = RunManifest(command, config, assumptions=dict(assumptions or {}))
        self._logger = structlog.getLogger(self.__class__.__name__)
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as os_error:
            raise OutputException(f"Unable to create output directory {self.out_dir}: {os_error}")

    def _record(self, path: Path) -> Path:
        self.manifest.outputs[path.name] = sha256_file(path)
        self._logger.info("Wrote", path=str(path), size=humanize.naturalsize(path.stat().st_size))
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]], metadata: dict[str, Any] | None = None) -> Path:
        """Header row, LF line endings, 12 significant digits; metadata goes on a leading '# {json}' line"""
        path = self.out_dir / name
        with structlog.contextvars.bound_contextvars(output=name):
            try:
                with open(path, "w", encoding="utf-8", newline="") as csv_file:
                    if metadata is not None:
                        csv_file.write(f"# {json.dumps(metadata, sort_keys=True)}\n")
                    writer = csv.writer(csv_file, lineterminator="\n")
                    writer.writerow(header)
                    writer.writerows([format_value(v) for v in row] for row in rows)
            except OSError as os_error:
                raise OutputException(f"Unable to write {path}: {os_error}")
            return self._record(path)

    def write_json(self, name: str, content: Any) -> Path:
        path = self.out_dir / name
        try:
            path.write_text(json.dumps(content, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        except OSError as os_error:
            raise OutputException(f"Unable to write {path}: {os_error}")
        return self._record(path)

    def svg_path(self, csv_name: str) -> Path:
        return self.out_dir / (Path(csv_name).stem + ".svg")

    def record(self, path: Path) -> Path:
        """For artifacts written by someone else, such as plots"""
        return self._record(path)

    def write_manifest(self) -> Path:
        self.manifest.trace = Tracing.get_trace_context()
        path = self.out_dir / f"{self.manifest.command}.manifest.json"
        try:
            path.write_text(json.dumps(asdict(self.manifest), sort_keys=True, indent=2) + "\n", encoding="utf-8")
        except OSError as os_error:
            raise OutputException(f"Unable to write {path}: {os_error}")
        self._logger.info("Wrote manifest", path=str(path), outputs=len(self.manifest.outputs))
        return path
