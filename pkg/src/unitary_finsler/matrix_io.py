"""Matrix files: a UTF-8 JSON object {"dim": n, "entries": [[re, im], ...]} in row-major order."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from unitary_finsler.errors import MatrixFormatError

LOGGER = logging.getLogger(__name__)

Pointer = Tuple[Union[str, int], ...]


def _where(pointer: Pointer) -> str:
    return "$" + "".join(f"[{key}]" if isinstance(key, int) else f".{key}" for key in pointer)


def _number(value: Any, pointer: Pointer) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MatrixFormatError(f"{_where(pointer)}: expected a number, got {type(value).__name__}", pointer=pointer)
    if not math.isfinite(value):
        raise MatrixFormatError(f"{_where(pointer)}: entries must be finite", pointer=pointer)
    return float(value)


@dataclass(eq=False)
class MatrixDocument:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_payload(cls, payload: Any) -> "MatrixDocument":
        if not isinstance(payload, dict):
            raise MatrixFormatError("$: expected an object with 'dim' and 'entries'")
        dim = payload.get("dim")
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            pointer: Pointer = ("dim",) if "dim" in payload else ()
            raise MatrixFormatError(f"$.dim: expected a positive integer, got {dim!r}", pointer=pointer)
        entries = payload.get("entries")
        if not isinstance(entries, list):
            pointer = ("entries",) if "entries" in payload else ()
            raise MatrixFormatError("$.entries: expected a list of [re, im] pairs", pointer=pointer)
        if len(entries) != dim * dim:
            raise MatrixFormatError(
                f"$.entries: dimension mismatch, {len(entries)} pairs for dim {dim}", pointer=("entries",)
            )
        values = np.empty(dim * dim, dtype=np.complex128)
        for index, pair in enumerate(entries):
            pointer = ("entries", index)
            if not isinstance(pair, list) or len(pair) != 2:
                raise MatrixFormatError(f"{_where(pointer)}: expected a [re, im] pair", pointer=pointer)
            values[index] = complex(_number(pair[0], pointer + (0,)), _number(pair[1], pointer + (1,)))
        return cls(values.reshape(dim, dim))

    def to_payload(self) -> Dict[str, Any]:
        flat = self.matrix.reshape(-1)
        return {"dim": self.dim, "entries": [[float(z.real), float(z.imag)] for z in flat]}


def _skip_space(text: str, index: int) -> int:
    while index < len(text) and text[index] in " \t\n\r":
        index += 1
    return index


def _offset(text: str, pointer: Sequence[Union[str, int]]) -> Optional[int]:
    """Character offset of the value at ``pointer`` in JSON text that already parsed."""
    decoder = json.JSONDecoder()
    index = _skip_space(text, 0)
    try:
        for key in pointer:
            opening = text[index]
            index = _skip_space(text, index + 1)
            if opening == "{":
                while text[index] != "}":
                    name, index = decoder.raw_decode(text, index)
                    index = _skip_space(text, _skip_space(text, index) + 1)
                    if name == key:
                        break
                    _, index = decoder.raw_decode(text, index)
                    index = _skip_space(text, index)
                    if text[index] == ",":
                        index = _skip_space(text, index + 1)
                else:
                    return None
            elif opening == "[" and isinstance(key, int):
                for _ in range(key):
                    _, index = decoder.raw_decode(text, index)
                    index = _skip_space(text, _skip_space(text, index) + 1)
            else:
                return None
    except (IndexError, ValueError):
        return None
    return index


def _line_column(text: str, offset: int) -> Tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


def read_matrix(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise MatrixFormatError(f"cannot read matrix file: {exc}", path=str(path)) from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(exc.msg, path=str(path), line=exc.lineno, column=exc.colno) from exc
    try:
        document = MatrixDocument.from_payload(payload)
    except MatrixFormatError as exc:
        offset = _offset(text, exc.pointer)
        line, column = _line_column(text, offset) if offset is not None else (None, None)
        raise MatrixFormatError(exc.message, path=str(path), line=line, column=column, pointer=exc.pointer) from exc
    LOGGER.debug("Read %dx%d matrix from %s", document.dim, document.dim, path)
    return document.matrix


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    """Float repr is the shortest decimal that round-trips, so read_matrix(write_matrix(m)) == m bit for bit."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise MatrixFormatError(f"expected a square matrix, got shape {matrix.shape}")
    path = Path(path)
    if not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(MatrixDocument(matrix).to_payload()) + "\n", encoding="utf-8")
