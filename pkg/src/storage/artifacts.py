"""
File-system storage of run artifacts: CSV tables, SVG plots, key=value sidecars and manifests.

Each run owns one directory; every file is written through a temporary sibling and renamed into
place, so a reader never sees a half-written artifact.
"""

import csv
import dataclasses
import io
import logging
import os
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from lxml import etree

from src.config.app import OUTPUT_PATH, TOOL_VERSION
from src.exceptions import UnsupportedArtifactError
from src.utils import content_hash

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


@dataclasses.dataclass
class CsvTable:
    header: list[str]
    rows: list[list[str]]

    def column(self, name: str) -> np.ndarray:
        index = self.header.index(name)
        return np.array([float(row[index]) for row in self.rows])

    def text_column(self, name: str) -> list[str]:
        index = self.header.index(name)
        return [row[index] for row in self.rows]


class ArtifactStore:
    """Writer for one run directory (created on first write)"""

    def __init__(self, run_dir: Path) -> None:
        self.run_dir = Path(run_dir)
        self.written: list[Path] = []

    @classmethod
    def for_run(cls, name: str, payload: Any, root: Path | None = None) -> "ArtifactStore":
        """Directory named after the scenario and the hash of its inputs"""
        return cls((root or OUTPUT_PATH) / f"{name}-{content_hash(payload)[:12]}")

    def path(self, filename: str) -> Path:
        return self.run_dir / filename

    def _write_text(self, filename: str, text: str) -> Path:
        self.run_dir.mkdir(parents=True, exist_ok=True)
        target = self.path(filename)
        temporary = target.with_name(f".{target.name}.tmp")
        temporary.write_text(text, encoding="utf-8")
        os.replace(temporary, target)
        self.written.append(target)
        logger.info("Artifact written: %s", target)
        return target

    def write_csv(
        self, filename: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
        return self._write_text(filename, buffer.getvalue())

    def write_key_values(self, filename: str, values: dict[str, Any]) -> Path:
        lines = [f"{key}={format_value(value)}" for key, value in values.items()]
        return self._write_text(filename, "\n".join(lines) + "\n")

    def write_svg(self, filename: str, svg: etree._Element) -> Path:
        text = etree.tostring(svg, pretty_print=True, xml_declaration=True, encoding="UTF-8")
        return self._write_text(filename, text.decode("utf-8"))

    def write_manifest(self, config: dict[str, Any], seed: int | None, dt: float | None) -> Path:
        """Everything needed to reproduce the run; no timestamps, so reruns are byte-identical"""
        return self.write_key_values(
            "manifest.txt",
            {
                "config_hash": content_hash(config),
                "seed": seed if seed is not None else "",
                "dt": dt if dt is not None else "",
                "tool_version": TOOL_VERSION,
                "numpy_version": np.__version__,
                "artifacts": ",".join(sorted(p.name for p in self.written)),
            },
        )


def read_csv(path: Path) -> CsvTable:
    with open(path, "rt", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise UnsupportedArtifactError(f"{path} is empty")
        return CsvTable(header=header, rows=[row for row in reader if row])


def read_key_values(path: Path) -> dict[str, str]:
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            values[key] = value
    return values
