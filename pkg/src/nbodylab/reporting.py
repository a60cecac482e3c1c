"""Run directories, schema-validated JSON reports, and CSV emission.

Every CLI invocation lands in its own directory named by subcommand,
UTC timestamp, and a short parameter digest.  JSON payloads are validated
against the schemas shipped under ``nbodylab/schemas`` before they reach
disk; floats round-trip exactly because both the JSON and CSV writers emit
Python's shortest repr (up to 17 significant digits).
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__


def jsonable(obj):
    """Recursively convert numpy scalars/arrays into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _schema(name: str) -> dict:
    ref = resources.files("nbodylab.schemas").joinpath(f"{name}.schema.json")
    return json.loads(ref.read_text(encoding="utf-8"))


def validate_payload(payload: dict, schema_name: str) -> None:
    jsonschema.validate(payload, _schema(schema_name))


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def params_digest(subcommand: str, params: dict) -> str:
    blob = json.dumps({"subcommand": subcommand, "parameters": params},
                      sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:8]


class RunReport:
    """Output directory of one CLI run plus its manifest bookkeeping."""

    def __init__(self, base: str | Path, subcommand: str, params: dict):
        stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
        name = f"{subcommand}-{stamp}-{params_digest(subcommand, params)}"
        self.directory = Path(base) / name
        self.directory.mkdir(parents=True, exist_ok=True)
        self.subcommand = subcommand
        self.params = params
        self._t0 = time.monotonic()
        self._outputs: list[Path] = []

    def write_json(self, name: str, payload: dict, schema_name: str) -> Path:
        validate_payload(payload, schema_name)
        path = self.directory / name
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
        self._outputs.append(path)
        return path

    def write_csv(self, name: str, header, rows) -> Path:
        path = self.directory / name
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([
                    repr(float(v)) if isinstance(v, (float, np.floating)) else v
                    for v in row
                ])
        self._outputs.append(path)
        return path

    def finish(self) -> Path:
        manifest = {
            "subcommand": self.subcommand,
            "parameters": self.params,
            "tool_version": __version__,
            "wall_time_s": time.monotonic() - self._t0,
            "outputs": {p.name: sha256_file(p) for p in self._outputs},
        }
        validate_payload(manifest, "manifest")
        path = self.directory / "manifest.json"
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(manifest, handle, indent=2)
            handle.write("\n")
        return path
