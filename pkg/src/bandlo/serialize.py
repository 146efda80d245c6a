"""File formats.

Matrix text format: a header line ``n_rows n_cols modulus_or_Z`` followed
by row-major integers, one row per line. Matrix binary format: the magic
bytes ``BLOMAT1\\n``, three little-endian int64 words (n_rows, n_cols,
modulus with 0 meaning Z), then row-major little-endian int64 entries.

Kernel text format: header ``kernel p dim`` then dim rows of n integers.

Exact pmf dump: lines ``residue mass_numerator mass_exponent`` for the
nonzero masses, ascending residues (mass = numerator / 2**exponent).

All formats round-trip exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ensembles import IntegerMatrix

__all__ = [
    "save_matrix_text",
    "load_matrix_text",
    "save_matrix_binary",
    "load_matrix_binary",
    "save_matrix",
    "load_matrix",
    "save_kernel_text",
    "load_kernel_text",
    "save_pmf_text",
    "load_pmf_text",
]

_MAGIC = b"BLOMAT1\n"


class FormatError(ValueError):
    """Raised when a file does not match its declared format."""


def _modulus_token(modulus: int | None) -> str:
    return "Z" if modulus is None else str(int(modulus))


def save_matrix_text(path: str | Path, entries: np.ndarray, modulus: int | None = None) -> None:
    entries = np.asarray(entries)
    with open(path, "w") as fh:
        fh.write(f"{entries.shape[0]} {entries.shape[1]} {_modulus_token(modulus)}\n")
        for row in entries:
            fh.write(" ".join(str(int(x)) for x in row))
            fh.write("\n")


def load_matrix_text(path: str | Path) -> tuple[np.ndarray, int | None]:
    """Returns (entries, modulus); modulus None means integers over Z."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise FormatError(f"{path}: bad header {header!r}")
        try:
            n_rows, n_cols = int(header[0]), int(header[1])
        except ValueError as exc:
            raise FormatError(f"{path}: bad header dimensions") from exc
        modulus = None if header[2] == "Z" else int(header[2])
        data = fh.read().split()
    if len(data) != n_rows * n_cols:
        raise FormatError(
            f"{path}: expected {n_rows * n_cols} entries, found {len(data)}"
        )
    try:
        flat = np.array([int(tok) for tok in data], dtype=np.int64)
    except ValueError as exc:
        raise FormatError(f"{path}: non-integer entry") from exc
    entries = flat.reshape(n_rows, n_cols)
    if modulus is not None and (np.any(entries < 0) or np.any(entries >= modulus)):
        raise FormatError(f"{path}: residues out of range for modulus {modulus}")
    return entries, modulus


def save_matrix_binary(path: str | Path, entries: np.ndarray, modulus: int | None = None) -> None:
    entries = np.ascontiguousarray(entries, dtype=np.int64)
    header = np.array(
        [entries.shape[0], entries.shape[1], 0 if modulus is None else int(modulus)],
        dtype="<i8",
    )
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(header.tobytes())
        fh.write(entries.astype("<i8").tobytes())


def load_matrix_binary(path: str | Path) -> tuple[np.ndarray, int | None]:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise FormatError(f"{path}: bad magic")
        header = np.frombuffer(fh.read(24), dtype="<i8")
        if header.size != 3:
            raise FormatError(f"{path}: truncated header")
        n_rows, n_cols, mod_word = (int(x) for x in header)
        body = fh.read()
    expected = n_rows * n_cols * 8
    if len(body) != expected:
        raise FormatError(f"{path}: expected {expected} payload bytes, found {len(body)}")
    entries = np.frombuffer(body, dtype="<i8").reshape(n_rows, n_cols).astype(np.int64)
    return entries, (None if mod_word == 0 else mod_word)


def save_matrix(path: str | Path, matrix: IntegerMatrix | np.ndarray,
                modulus: int | None = None, binary: bool = False) -> None:
    entries = matrix.entries if isinstance(matrix, IntegerMatrix) else matrix
    if binary:
        save_matrix_binary(path, entries, modulus)
    else:
        save_matrix_text(path, entries, modulus)


def load_matrix(path: str | Path) -> tuple[np.ndarray, int | None]:
    """Sniff text vs binary by the magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(len(_MAGIC))
    if head == _MAGIC:
        return load_matrix_binary(path)
    return load_matrix_text(path)


def save_kernel_text(path: str | Path, p: int, vectors: np.ndarray) -> None:
    vectors = np.asarray(vectors)
    with open(path, "w") as fh:
        fh.write(f"kernel {int(p)} {vectors.shape[0]}\n")
        for row in vectors:
            fh.write(" ".join(str(int(x)) for x in row))
            fh.write("\n")


def load_kernel_text(path: str | Path) -> tuple[int, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "kernel":
            raise FormatError(f"{path}: bad kernel header {header!r}")
        p, dim = int(header[1]), int(header[2])
        rows = [ln.split() for ln in fh if ln.strip()]
    if len(rows) != dim:
        raise FormatError(f"{path}: expected {dim} vectors, found {len(rows)}")
    if dim == 0:
        return p, np.zeros((0, 0), dtype=np.int64)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise FormatError(f"{path}: ragged kernel rows")
    vecs = np.array([[int(tok) for tok in r] for r in rows], dtype=np.int64)
    return p, vecs


def save_pmf_text(path: str | Path, items, exponent: int) -> None:
    """items: iterable of (residue, numerator), ascending residues."""
    with open(path, "w") as fh:
        for x, num in items:
            fh.write(f"{int(x)} {int(num)} {int(exponent)}\n")


def load_pmf_text(path: str | Path) -> list[tuple[int, int, int]]:
    out = []
    with open(path) as fh:
        for lineno, ln in enumerate(fh, 1):
            if not ln.strip():
                continue
            parts = ln.split()
            if len(parts) != 3:
                raise FormatError(f"{path}:{lineno}: expected 3 columns")
            try:
                x, num, exp = int(parts[0]), int(parts[1]), int(parts[2])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-integer field") from exc
            if num < 0 or x < 0:
                raise FormatError(f"{path}:{lineno}: negative field")
            out.append((x, num, exp))
    return out
