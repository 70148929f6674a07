# app/core/reporting.py
#
# Serialisation of harness reports. Output is canonical (sorted keys, fixed
# row order, LF endings) so identical inputs give identical bytes; JSON
# reports carry a SHA-256 checksum over that canonical content.

import csv
import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from app.core.errors import MatrixFileError
from app.models.verification import CrossCheckReport, ResidualReport

logger = logging.getLogger(__name__)

NA = "NA"


class _ReportEncoder(json.JSONEncoder):
    """Serialises numpy scalars that slip into report payloads."""
    def default(self, obj):
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.integer):
            return int(obj)
        return super().default(obj)


def _dumps(obj: Any) -> str:
    return json.dumps(obj, cls=_ReportEncoder, sort_keys=True, indent=2)


def checksum(payload: Dict[str, Any]) -> str:
    body = json.dumps(payload, cls=_ReportEncoder, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def format_error(value: float) -> str:
    return format(value, ".17g")


# ─────────────────────────────────────────────
# CROSS-CHECK REPORTS
# ─────────────────────────────────────────────

def csv_header(m_values: Sequence[int]) -> List[str]:
    return ["method", *(f"m={m}" for m in m_values)]


def cross_check_csv(report: CrossCheckReport) -> str:
    """One row per method, one column per m; inapplicable cells are NA."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(report.m_values))
    for method in report.methods:
        cells = (report.cell(method, m) for m in report.m_values)
        writer.writerow([method, *(NA if c.inapplicable else format_error(c.error) for c in cells)])
    return buf.getvalue()


def cross_check_json(report: CrossCheckReport) -> str:
    payload = report.model_dump(mode="json")
    payload["checksum"] = checksum(report.model_dump(mode="json"))
    return _dumps(payload) + "\n"


def residual_json(report: ResidualReport) -> str:
    payload = report.model_dump(mode="json")
    payload["checksum"] = checksum(report.model_dump(mode="json"))
    return _dumps(payload) + "\n"


def verify_checksum(text: str) -> bool:
    payload = json.loads(text)
    stored = payload.pop("checksum", None)
    return stored is not None and stored == checksum(payload)


def write_report(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as exc:
        raise MatrixFileError(f"cannot write report {path}: {exc.strerror}", path=str(path)) from exc
    logger.info("wrote report %s (%d bytes)", path, len(text.encode("utf-8")))
    return path
