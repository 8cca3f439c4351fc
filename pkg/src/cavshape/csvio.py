"""Deterministic CSV output.

All artifacts use comma separators, CRLF row endings, a single header
row, and shortest-roundtrip float formatting (%.17g), so identical runs
produce byte-identical files on any platform.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["format_float", "write_csv", "read_csv"]


def format_float(value: float) -> str:
    """Shortest decimal that round-trips a double (17 significant digits)."""
    return f"{value:.17g}"


def write_csv(path: Path | str, header: list[str], columns: list[np.ndarray]) -> None:
    """Write equal-length columns under ``header`` to ``path``.

    Complex columns are not supported; split them into real/imag first.
    """
    if len(header) != len(columns):
        raise ValueError(f"{len(header)} names for {len(columns)} columns")
    cols = [np.asarray(c) for c in columns]
    n = cols[0].shape[0]
    for name, col in zip(header, cols):
        if col.ndim != 1 or col.shape[0] != n:
            raise ValueError(f"column {name!r} has shape {col.shape}, expected ({n},)")
        if np.iscomplexobj(col):
            raise ValueError(f"column {name!r} is complex; write real and imag parts")
    rows = ["\r\n".join(",".join(format_float(float(col[i])) for col in cols)
                        for i in range(n))]
    text = ",".join(header) + "\r\n" + rows[0] + ("\r\n" if n else "")
    Path(path).write_bytes(text.encode("ascii"))


def read_csv(path: Path | str) -> dict[str, np.ndarray]:
    """Read a :func:`write_csv` file back into named float columns."""
    # read_text would translate the CRLF endings; decode the bytes directly
    text = Path(path).read_bytes().decode("ascii")
    lines = [ln for ln in text.split("\r\n") if ln]
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.size == 0:
        data = np.empty((0, len(header)))
    return {name: data[:, i].copy() for i, name in enumerate(header)}
