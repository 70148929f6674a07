"""
app/database/matrix_files.py
----------------------------
Matrix persistence for the CLI: one JSON document per matrix,

    {"rows": q, "cols": n, "data": [[re, im], ...]}   (row-major)

Floats are written with Python's shortest round-trip repr, so a
write/parse cycle reproduces every double bit for bit.
"""

import json
import logging
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from app.core.errors import MatrixFileError
from app.core.matrix_core import ComplexMatrix, as_matrix
from app.models.matrix import MatrixFile

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


# ─────────────────────────────────────────────────────────────────────────────
# CONVERSION
# ─────────────────────────────────────────────────────────────────────────────

def to_matrix_file(a: ComplexMatrix) -> MatrixFile:
    flat = np.asarray(a, dtype=np.complex128).reshape(-1)
    return MatrixFile(
        rows=int(a.shape[0]),
        cols=int(a.shape[1]),
        data=[[float(z.real), float(z.imag)] for z in flat],
    )


def from_matrix_file(doc: MatrixFile) -> ComplexMatrix:
    values = np.array([complex(re, im) for re, im in doc.data], dtype=np.complex128)
    return as_matrix(values.reshape(doc.rows, doc.cols))


# ─────────────────────────────────────────────────────────────────────────────
# FILE I/O
# ─────────────────────────────────────────────────────────────────────────────

def parse_matrix(path: PathLike) -> ComplexMatrix:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixFileError(f"cannot read matrix file {path}: {exc.strerror}", path=str(path)) from exc

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(
            f"malformed JSON in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}",
            path=str(path),
        ) from exc

    try:
        doc = MatrixFile.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "document"
        if "data length" in first["msg"]:
            message = f"shape mismatch in {path}: {first['msg']}"
        elif "not finite" in first["msg"]:
            message = f"non-finite entry in {path}: {first['msg']}"
        else:
            message = f"invalid matrix document {path} at {where}: {first['msg']}"
        raise MatrixFileError(message, path=str(path)) from exc

    logger.debug("parsed %dx%d matrix from %s", doc.rows, doc.cols, path)
    return from_matrix_file(doc)


def write_matrix(path: PathLike, a: ComplexMatrix) -> Path:
    path = Path(path)
    doc = to_matrix_file(a)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(json.dumps(doc.model_dump(), allow_nan=False))
            f.write("\n")
    except OSError as exc:
        raise MatrixFileError(f"cannot write matrix file {path}: {exc.strerror}", path=str(path)) from exc
    logger.info("wrote %dx%d matrix to %s", doc.rows, doc.cols, path)
    return path
