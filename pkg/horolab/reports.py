import csv
import json
import logging
import os
import pkgutil
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import jsonschema

from horolab import status

logger = logging.getLogger("django-horolab.horolab.reports")

REPORT_FILENAME = "report.json"


@dataclass
class Table:
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(
                "Expected {} values for columns {}, got {}.".format(
                    len(self.columns), self.columns, len(values)
                )
            )
        self.rows.append([_plain(value) for value in values])

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(row) for row in self.rows]}


@dataclass
class ExperimentOutcome:
    """
    What an experiment function hands back to the runner.
    """

    tables: Dict[str, Table] = field(default_factory=dict)
    values: Dict[str, Any] = field(default_factory=dict)
    assertions: Dict[str, bool] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    version: str
    key: str
    payload: dict
    assertions: Dict[str, bool]
    warnings: List[str]
    wall_clock: float
    cached: bool = False

    @property
    def status(self) -> str:
        if all(self.assertions.values()):
            return status.REPORT_PASSED
        return status.REPORT_FAILED

    @property
    def failed_assertions(self) -> List[str]:
        return sorted(name for name, passed in self.assertions.items() if not passed)

    @property
    def exit_code(self) -> int:
        if self.status == status.REPORT_PASSED:
            return status.EXIT_OK
        return status.EXIT_ASSERTION_FAILED

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "status": self.status,
            "config": self.config,
            "version": self.version,
            "key": self.key,
            "payload": self.payload,
            "assertions": dict(self.assertions),
            "warnings": list(self.warnings),
            "wall_clock": self.wall_clock,
        }

    @classmethod
    def from_dict(cls, data: dict, cached: bool = False) -> "ExperimentReport":
        return cls(
            kind=data["kind"],
            config=data["config"],
            version=data["version"],
            key=data["key"],
            payload=data["payload"],
            assertions=data["assertions"],
            warnings=data["warnings"],
            wall_clock=data["wall_clock"],
            cached=cached,
        )

    def payload_bytes(self) -> bytes:
        """
        Canonical payload encoding; equal configs give equal bytes.
        """
        return json.dumps(self.payload, sort_keys=True, separators=(",", ":")).encode(
            "UTF-8"
        )


def _plain(value):
    # numpy scalars and tuples into JSON-native values
    if hasattr(value, "item"):
        return value.item()
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def build_payload(outcome: ExperimentOutcome) -> dict:
    return {
        "tables": {name: table.to_dict() for name, table in sorted(outcome.tables.items())},
        "values": {name: _plain(value) for name, value in sorted(outcome.values.items())},
    }


def load_schema() -> dict:
    return json.loads(pkgutil.get_data("horolab", "schemas/report.schema.json"))


def validate_report(data: dict) -> None:
    jsonschema.validate(instance=data, schema=load_schema())


def write_report(report: ExperimentReport, out_dir: str) -> str:
    data = report.to_dict()
    validate_report(data)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, REPORT_FILENAME)
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug("Wrote %s", path, extra={"kind": report.kind, "key": report.key})
    return path


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_plotdata(report: ExperimentReport, out_dir: str) -> List[str]:
    """
    One CSV per payload table, named after the table, with a header row and floats in
    full repr precision.
    """
    tables = report.payload.get("tables", {})
    if not tables:
        logger.warning("Report has no tables to emit", extra={"kind": report.kind})
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name in sorted(tables):
        path = os.path.join(out_dir, "{}.csv".format(name))
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(tables[name]["columns"])
            for row in tables[name]["rows"]:
                writer.writerow([_cell(value) for value in row])
        paths.append(path)
    return paths


def read_table(path: str) -> Optional[Sequence[List[str]]]:
    with open(path, newline="") as f:
        return list(csv.reader(f))
