"""Signals, frames, and two-frame dictionaries.

Signals are plain numpy arrays of complex samples: shape ``(n,)`` for 1D
data, or ``(rows, cols)`` row-major grids for images. Every operator in
this module acts on the flattened vector, so a grid and its flattening are
interchangeable at call boundaries.

A :class:`Frame` couples a linear synthesis operator (coefficients to
signal) with its adjoint analysis operator (signal to coefficients). The
adjoint is the conjugate transpose, so Parseval identities hold for complex
atoms. Built-in kinds (``dirac``, ``fourier``, ``dct``, ``haar1d`` and the
separable 2D tensor products ``haar2d``, ``dct2d``) are orthonormal bases
backed by fast transforms; arbitrary dictionaries enter through the
``matrix`` kind. Frames are immutable after construction and all
operations are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct as _scipy_dct, idct as _scipy_idct

BUILTIN_KINDS = ("dirac", "fourier", "dct", "haar1d", "haar2d", "dct2d", "matrix")

# Dense realizations (Gram matrices, exhaustive checks) are capped at this
# many matrix entries; beyond it the operators stay implicit.
DENSE_ENTRY_LIMIT = 1 << 22


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _as_complex_vector(values, length: int | None = None) -> np.ndarray:
    vec = np.asarray(values, dtype=np.complex128).ravel()
    if length is not None and vec.size != length:
        raise ValueError(f"expected a vector of length {length}, got {vec.size}")
    return vec


def default_zero_threshold(values) -> float:
    """Support cutoff used for l0 counting: 1e-8 * max(1, peak modulus)."""
    values = np.asarray(values)
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    return 1e-8 * max(1.0, peak)


# ---------------------------------------------------------------------------
# fast transforms, batched along the last axis


def _dct_ortho(x: np.ndarray, axis: int, inverse: bool) -> np.ndarray:
    # scipy's DCT is real; extend linearly to complex input.
    fn = _scipy_idct if inverse else _scipy_dct
    return fn(x.real, norm="ortho", axis=axis) + 1j * fn(x.imag, norm="ortho", axis=axis)


def _haar_forward_last(x: np.ndarray) -> np.ndarray:
    """Full-depth orthonormal Haar analysis along the last axis.

    Coefficient layout: [coarsest average, coarsest detail, ..., finest
    details], i.e. detail blocks of size 1, 1, 2, 4, ... n/2.
    """
    out = np.empty_like(x)
    approx = x
    pos = x.shape[-1]
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    while approx.shape[-1] > 1:
        even = approx[..., 0::2]
        odd = approx[..., 1::2]
        detail = (even - odd) * inv_sqrt2
        approx = (even + odd) * inv_sqrt2
        width = detail.shape[-1]
        out[..., pos - width : pos] = detail
        pos -= width
    out[..., 0] = approx[..., 0]
    return out


def _haar_inverse_last(c: np.ndarray) -> np.ndarray:
    n = c.shape[-1]
    approx = c[..., 0:1].copy()
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    width = 1
    while width < n:
        detail = c[..., width : 2 * width]
        merged = np.empty(c.shape[:-1] + (2 * width,), dtype=c.dtype)
        merged[..., 0::2] = (approx + detail) * inv_sqrt2
        merged[..., 1::2] = (approx - detail) * inv_sqrt2
        approx = merged
        width *= 2
    return approx


def _haar_along(x: np.ndarray, axis: int, inverse: bool) -> np.ndarray:
    moved = np.moveaxis(x, axis, -1)
    out = _haar_inverse_last(moved) if inverse else _haar_forward_last(moved)
    return np.moveaxis(out, -1, axis)


# ---------------------------------------------------------------------------


class Frame:
    """A synthesis operator together with its conjugate-transpose adjoint.

    Use :func:`make_frame` to construct one. ``synthesize`` maps a
    coefficient vector of length ``num_atoms`` to a signal of length
    ``ambient_dim``; ``analyze`` applies the adjoint. ``shape`` is the
    ``(rows, cols)`` grid of the 2D kinds and ``None`` otherwise.
    """

    def __init__(self, kind: str, ambient_dim: int, num_atoms: int,
                 shape: tuple[int, int] | None = None,
                 matrix: np.ndarray | None = None):
        self.kind = kind
        self.ambient_dim = int(ambient_dim)
        self.num_atoms = int(num_atoms)
        self.shape = shape
        if matrix is not None:
            matrix = np.array(matrix, dtype=np.complex128)
            matrix.setflags(write=False)
        self._matrix = matrix

    def __repr__(self) -> str:
        extra = f", shape={self.shape}" if self.shape else ""
        return f"Frame(kind={self.kind!r}, ambient_dim={self.ambient_dim}, num_atoms={self.num_atoms}{extra})"

    # -- operator application ------------------------------------------------

    def synthesize(self, coeffs) -> np.ndarray:
        """Return the signal sum_i c_i * atom_i as a flat complex vector."""
        c = _as_complex_vector(coeffs, self.num_atoms)
        return self._synth_batch(c[np.newaxis, :])[0]

    def analyze(self, signal) -> np.ndarray:
        """Return the adjoint image (inner products with each atom)."""
        x = _as_complex_vector(signal, self.ambient_dim)
        return self._analyze_batch(x[np.newaxis, :])[0]

    def atom(self, index: int) -> np.ndarray:
        if not 0 <= index < self.num_atoms:
            raise ValueError(f"atom index {index} out of range")
        e = np.zeros(self.num_atoms, dtype=np.complex128)
        e[index] = 1.0
        return self.synthesize(e)

    def dense(self) -> np.ndarray:
        """Dense ``ambient_dim x num_atoms`` matrix whose columns are atoms."""
        if self.ambient_dim * self.num_atoms > DENSE_ENTRY_LIMIT:
            raise ValueError("frame too large to densify")
        if self._matrix is not None:
            return np.array(self._matrix)
        eye = np.eye(self.num_atoms, dtype=np.complex128)
        return self._synth_batch(eye).T.copy()

    # -- batched kernels (rows are independent inputs) -----------------------

    def _synth_batch(self, coeffs: np.ndarray) -> np.ndarray:
        kind = self.kind
        if kind == "dirac":
            return coeffs.copy()
        if kind == "fourier":
            return np.fft.ifft(coeffs, axis=-1) * np.sqrt(self.ambient_dim)
        if kind == "dct":
            return _dct_ortho(coeffs, axis=-1, inverse=True)
        if kind == "haar1d":
            return _haar_inverse_last(coeffs)
        if kind in ("haar2d", "dct2d"):
            rows, cols = self.shape
            grid = coeffs.reshape(coeffs.shape[0], rows, cols)
            if kind == "haar2d":
                grid = _haar_along(grid, -1, inverse=True)
                grid = _haar_along(grid, -2, inverse=True)
            else:
                grid = _dct_ortho(grid, axis=-1, inverse=True)
                grid = _dct_ortho(grid, axis=-2, inverse=True)
            return grid.reshape(coeffs.shape[0], self.ambient_dim)
        if kind == "matrix":
            return coeffs @ self._matrix.T
        raise ValueError(f"unknown frame kind {kind!r}")

    def _analyze_batch(self, signals: np.ndarray) -> np.ndarray:
        kind = self.kind
        if kind == "dirac":
            return signals.copy()
        if kind == "fourier":
            return np.fft.fft(signals, axis=-1) / np.sqrt(self.ambient_dim)
        if kind == "dct":
            return _dct_ortho(signals, axis=-1, inverse=False)
        if kind == "haar1d":
            return _haar_forward_last(signals)
        if kind in ("haar2d", "dct2d"):
            rows, cols = self.shape
            grid = signals.reshape(signals.shape[0], rows, cols)
            if kind == "haar2d":
                grid = _haar_along(grid, -1, inverse=False)
                grid = _haar_along(grid, -2, inverse=False)
            else:
                grid = _dct_ortho(grid, axis=-1, inverse=False)
                grid = _dct_ortho(grid, axis=-2, inverse=False)
            return grid.reshape(signals.shape[0], self.num_atoms)
        if kind == "matrix":
            return signals @ self._matrix.conj()
        raise ValueError(f"unknown frame kind {kind!r}")


def make_frame(kind: str, ambient_dim: int | None = None, *,
               shape: tuple[int, int] | None = None,
               matrix=None) -> Frame:
    """Construct a frame of the given kind.

    Parameters
    ----------
    kind : str
        One of ``dirac``, ``fourier``, ``dct``, ``haar1d``, ``haar2d``,
        ``dct2d``, ``matrix`` (case-insensitive).
    ambient_dim : int, optional
        Signal length for the 1D kinds.
    shape : (rows, cols), optional
        Grid shape for the 2D kinds.
    matrix : array_like, optional
        Dense complex ``n x num_atoms`` payload for ``kind="matrix"``.
    """
    kind = kind.lower()
    if kind not in BUILTIN_KINDS:
        raise ValueError(f"unknown frame kind {kind!r}; expected one of {BUILTIN_KINDS}")

    if kind == "matrix":
        if matrix is None:
            raise ValueError("matrix kind requires a matrix payload")
        payload = np.asarray(matrix, dtype=np.complex128)
        if payload.ndim != 2 or payload.shape[0] < 1 or payload.shape[1] < 1:
            raise ValueError("matrix payload must be a 2D array with positive shape")
        if not np.all(np.isfinite(payload.view(np.float64))):
            raise ValueError("matrix payload must be finite")
        return Frame(kind, payload.shape[0], payload.shape[1], matrix=payload)

    if kind in ("haar2d", "dct2d"):
        if shape is None:
            raise ValueError(f"{kind} requires shape=(rows, cols)")
        rows, cols = int(shape[0]), int(shape[1])
        if rows < 1 or cols < 1:
            raise ValueError("grid dimensions must be positive")
        if kind == "haar2d" and not (_is_pow2(rows) and _is_pow2(cols)):
            raise ValueError("haar2d requires dyadic (power-of-two) grid dimensions")
        n = rows * cols
        return Frame(kind, n, n, shape=(rows, cols))

    if ambient_dim is None:
        raise ValueError(f"{kind} requires ambient_dim")
    n = int(ambient_dim)
    if n < 1:
        raise ValueError("ambient_dim must be positive")
    if kind == "haar1d" and not _is_pow2(n):
        raise ValueError("haar1d requires a dyadic (power-of-two) length")
    return Frame(kind, n, n)


@dataclass(frozen=True)
class ParsevalCheck:
    """Outcome of the probabilistic Parseval test; truthy when it passed."""

    ok: bool
    max_defect: float

    def __bool__(self) -> bool:
        return self.ok


def is_parseval(frame, num_probes: int = 8, tol: float = 1e-10, seed: int = 0) -> ParsevalCheck:
    """Probe whether synthesize(analyze(x)) == x on random signals.

    This is a probabilistic check: it draws ``num_probes`` random complex
    signals and reports the worst relative round-trip defect observed.
    """
    if num_probes < 1:
        raise ValueError("num_probes must be at least 1")
    rng = np.random.default_rng(seed)
    n = frame.ambient_dim
    worst = 0.0
    for _ in range(num_probes):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = frame.synthesize(frame.analyze(x))
        worst = max(worst, float(np.linalg.norm(y - x) / np.linalg.norm(x)))
    return ParsevalCheck(worst <= tol, worst)


class ConcatDictionary:
    """Two frames over the same space acting as a single atom system.

    Coefficients are stored as one vector with the first frame's block
    followed by the second's.
    """

    def __init__(self, first: Frame, second: Frame):
        if first.ambient_dim != second.ambient_dim:
            raise ValueError("both frames must share the same ambient dimension")
        self.first = first
        self.second = second

    @property
    def ambient_dim(self) -> int:
        return self.first.ambient_dim

    @property
    def num_atoms(self) -> int:
        return self.first.num_atoms + self.second.num_atoms

    @property
    def block_split(self) -> int:
        return self.first.num_atoms

    def split_coeffs(self, coeffs) -> tuple[np.ndarray, np.ndarray]:
        c = _as_complex_vector(coeffs, self.num_atoms)
        return c[: self.block_split], c[self.block_split :]

    def synthesize(self, coeffs) -> np.ndarray:
        c1, c2 = self.split_coeffs(coeffs)
        return self.first.synthesize(c1) + self.second.synthesize(c2)

    def analyze(self, signal) -> np.ndarray:
        x = _as_complex_vector(signal, self.ambient_dim)
        return np.concatenate([self.first.analyze(x), self.second.analyze(x)])

    def dense(self) -> np.ndarray:
        if self.ambient_dim * self.num_atoms > DENSE_ENTRY_LIMIT:
            raise ValueError("dictionary too large to densify")
        return np.hstack([self.first.dense(), self.second.dense()])

    def __repr__(self) -> str:
        return f"ConcatDictionary({self.first!r}, {self.second!r})"


@dataclass(frozen=True)
class CoefficientVector:
    """Complex coefficients with an optional two-block structure.

    ``block_split`` is the index where the first frame's block ends; it is
    ``None`` for single-frame use.
    """

    values: np.ndarray
    block_split: int | None = None

    def support(self, zero_threshold: float | None = None) -> np.ndarray:
        """Indices whose modulus exceeds the zero threshold."""
        if zero_threshold is None:
            zero_threshold = default_zero_threshold(self.values)
        return np.flatnonzero(np.abs(self.values) > zero_threshold)

    def l0_count(self, zero_threshold: float | None = None) -> int:
        return int(self.support(zero_threshold).size)

    @property
    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.values)))

    @property
    def block1(self) -> np.ndarray:
        if self.block_split is None:
            raise ValueError("coefficient vector has no block structure")
        return self.values[: self.block_split]

    @property
    def block2(self) -> np.ndarray:
        if self.block_split is None:
            raise ValueError("coefficient vector has no block structure")
        return self.values[self.block_split :]
