"""Report container and writers: CSV data, JSON documents, metadata sidecar.

Determinism contract: the data file (CSV rows or the embed report JSON)
is a pure function of the config and seed.  Anything run-dependent (wall
time, library versions) lives only in the sidecar, so byte comparison of
data files is the reproducibility check.
"""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .config import SCHEMA_VERSION
from .errors import StructuralError


@dataclass
class Report:
    """Rows of named numeric columns plus regeneration metadata.

    document, when set, replaces the CSV as the data payload (the embed
    kind emits a single JSON object rather than rows).
    """

    kind: str
    columns: list[str] = field(default_factory=list)
    rows: list[tuple] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    document: dict | None = None

    def csv_text(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            if len(row) != len(self.columns):
                raise StructuralError("row width does not match the header")
            lines.append(",".join(format_cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def document_text(self) -> str:
        if self.document is None:
            raise StructuralError("report has no JSON document")
        return json.dumps(self.document, indent=2, sort_keys=True) + "\n"

    def write(self, out_path: str) -> None:
        payload = self.document_text() if self.document is not None else self.csv_text()
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        with open(sidecar_path(out_path), "w", encoding="utf-8", newline="") as fh:
            fh.write(json.dumps(self.metadata, indent=2, sort_keys=True) + "\n")


def sidecar_path(out_path: str) -> str:
    return out_path + ".meta.json"


def format_cell(v) -> str:
    """One CSV cell; floats use repr for exact round-trips."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    s = str(v)
    if "," in s or "\n" in s:
        raise StructuralError(f"cell {s!r} would break the CSV layout")
    return s


def config_sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def base_metadata(kind: str, config_text: str, seed: int,
                  derived_seeds: dict[str, int]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config_sha256": config_sha256(config_text),
        "seed": seed,
        "derived_seeds": derived_seeds,
        "versions": {
            "sofic_lab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
