"""CSV and PGM serialization.

Signal CSV: a ``re,im`` header followed by one complex entry per line as
``<re>,<im>``. Readers also accept headerless files. Matrix CSV: one row
per ambient dimension, columns in consecutive ``re,im`` pairs (one pair
per atom). Images: binary PGM (P5, 8-bit, row-major).

Floats are written with ``repr`` so output is deterministic and
round-trips exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _fmt(v: float) -> str:
    return repr(float(v))


def write_signal_csv(path, values) -> None:
    values = np.asarray(values, dtype=np.complex128).ravel()
    lines = ["re,im"]
    lines.extend(f"{_fmt(v.real)},{_fmt(v.imag)}" for v in values)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _is_header(line: str) -> bool:
    try:
        float(line.split(",")[0])
        return False
    except ValueError:
        return True


def read_signal_csv(path) -> np.ndarray:
    raw = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    raw = [ln for ln in raw if ln]
    if not raw:
        raise ValueError(f"{path}: empty signal file")
    if _is_header(raw[0]):
        raw = raw[1:]
    out = np.empty(len(raw), dtype=np.complex128)
    for i, line in enumerate(raw):
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"{path}: line {i + 1} is not 're,im'")
        out[i] = complex(float(parts[0]), float(parts[1]))
    return out


def write_matrix_csv(path, matrix) -> None:
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2:
        raise ValueError("matrix must be 2D")
    lines = []
    for row in matrix:
        cells = []
        for v in row:
            cells.append(_fmt(v.real))
            cells.append(_fmt(v.imag))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix_csv(path) -> np.ndarray:
    raw = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    raw = [ln for ln in raw if ln]
    if not raw:
        raise ValueError(f"{path}: empty matrix file")
    if _is_header(raw[0]):
        raw = raw[1:]
    rows = []
    for i, line in enumerate(raw):
        parts = [float(p) for p in line.split(",")]
        if len(parts) % 2 != 0:
            raise ValueError(f"{path}: row {i + 1} must hold re,im pairs")
        rows.append([complex(parts[2 * j], parts[2 * j + 1]) for j in range(len(parts) // 2)])
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged matrix rows")
    return np.asarray(rows, dtype=np.complex128)


def write_pgm(path, image) -> None:
    """Write a 2D array as binary 8-bit PGM, clipping to [0, 255]."""
    image = np.asarray(image)
    if np.iscomplexobj(image):
        image = image.real
    if image.ndim != 2:
        raise ValueError("PGM output requires a 2D array")
    data = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    rows, cols = data.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary 8-bit PGM into a float array of gray levels 0..255."""
    blob = Path(path).read_bytes()
    if not blob.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # Header: magic, width, height, maxval; '#' comments allowed between tokens.
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(blob[start:pos])
    pos += 1  # single whitespace after maxval
    cols, rows, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM supported (maxval 255)")
    body = blob[pos : pos + rows * cols]
    if len(body) != rows * cols:
        raise ValueError(f"{path}: truncated PGM data")
    return np.frombuffer(body, dtype=np.uint8).reshape(rows, cols).astype(np.float64)
