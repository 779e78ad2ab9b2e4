"""Sparse separation solvers.

Four convex programs over a two-frame dictionary [A1 | A2], plus an
exhaustive minimal-support oracle:

* ``bp_synthesis``   minimize ||c1||_1 + ||c2||_1      s.t. x = A1 c1 + A2 c2
* ``bp_analysis``    minimize ||A1* x1||_1 + ||A2* x2||_1  s.t. x = x1 + x2
* ``bpdn_synthesis`` minimize ||c1||_1 + ||c2||_1 + lam ||x - A1 c1 - A2 c2||_2^2
* ``bpdn_analysis``  minimize ||A1* x1||_1 + ||A2* x2||_1 + lam ||x - x1 - x2||_2^2

Algorithms: Douglas-Rachford splitting for the exact-fit synthesis
program (the affine projection is closed-form for a Parseval pair and a
dense normal-equation solve otherwise), a primal-dual scheme for the two
analysis programs, and a monotone accelerated proximal-gradient
(soft-thresholding) loop for the penalized synthesis program. Every
solver tracks the best-objective admissible iterate seen so far; that
candidate is what gets logged and returned, so logged objectives are
non-increasing by construction. Complex soft-thresholding shrinks the
modulus and preserves the phase.

All solvers are deterministic for a fixed config seed and reentrant;
concurrent solves on distinct inputs are safe.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .frames import (CoefficientVector, ConcatDictionary, Frame,
                     _as_complex_vector, is_parseval)

_TINY = 1e-300


@dataclass
class SolverConfig:
    """Iteration budget, tolerances, and the denoising weight ``lam``.

    ``convergence_tol`` bounds the relative fixed-point residual of the
    underlying iteration; ``feasibility_tol`` bounds the relative equality
    defect ||x - reconstruction||/||x|| for the exact-fit programs.
    """

    max_iterations: int = 20000
    convergence_tol: float = 1e-9
    feasibility_tol: float = 1e-8
    lam: float = 0.0
    seed: int = 0
    keep_trace: bool = False
    trace_path: str | None = None

    def validate(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not 0.0 < self.convergence_tol < 1.0:
            raise ValueError("convergence_tol must lie in (0, 1)")
        if not 0.0 < self.feasibility_tol < 1.0:
            raise ValueError("feasibility_tol must lie in (0, 1)")
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")


@dataclass
class SolverCertificate:
    """What the iteration achieved.

    ``feasibility_defect`` is the violation of the program's hard
    constraints; the denoising programs are unconstrained, so it is zero
    there by definition. ``trace`` holds (iteration, objective,
    feasibility_defect) rows when tracing was requested.
    """

    iterations_used: int
    final_residual: float
    feasibility_defect: float
    converged: bool
    trace: list[tuple[int, float, float]] | None = None


class _Trace:
    def __init__(self, config: SolverConfig):
        self.rows = [] if config.keep_trace else None
        self._fh = None
        self._writer = None
        if config.trace_path is not None:
            self._fh = open(config.trace_path, "w", newline="", encoding="utf-8")
            self._writer = csv.writer(self._fh)
            self._writer.writerow(["iteration", "objective", "feasibility_defect"])

    def log(self, iteration: int, objective: float, defect: float) -> None:
        if self.rows is not None:
            self.rows.append((iteration, objective, defect))
        if self._writer is not None:
            self._writer.writerow([iteration, repr(objective), repr(defect)])

    def close(self) -> list[tuple[int, float, float]] | None:
        if self._fh is not None:
            self._fh.close()
        return self.rows


def _soft(values: np.ndarray, threshold: float) -> np.ndarray:
    mags = np.abs(values)
    scale = np.maximum(mags - threshold, 0.0) / np.maximum(mags, _TINY)
    return values * scale


def _project_linf_ball(values: np.ndarray) -> np.ndarray:
    mags = np.abs(values)
    return values / np.maximum(mags, 1.0)


def _l1(values: np.ndarray) -> float:
    return float(np.sum(np.abs(values)))


def _l2(values: np.ndarray) -> float:
    return float(np.linalg.norm(values))


def _require_parseval(frame: Frame, seed: int, what: str) -> None:
    check = is_parseval(frame, num_probes=4, tol=1e-8, seed=seed)
    if not check:
        raise ValueError(f"{what} requires Parseval frames "
                         f"(round-trip defect {check.max_defect:.2e})")


def _parseval_pair(dictionary: ConcatDictionary, seed: int) -> bool:
    return bool(is_parseval(dictionary.first, 4, 1e-8, seed)
                and is_parseval(dictionary.second, 4, 1e-8, seed))


def _gram_solver(dictionary: ConcatDictionary, seed: int):
    """Return v -> (A A*)^-1 v for the concatenated synthesis operator."""
    if _parseval_pair(dictionary, seed):
        # A A* = 2 I for a pair of Parseval frames.
        return lambda v: v / 2.0
    G = dictionary.dense()
    G = G @ G.conj().T
    G_inv = np.linalg.pinv(G)
    return lambda v: G_inv @ v


def _dict_opnorm_sq(dictionary: ConcatDictionary, seed: int, iterations: int = 50) -> float:
    """Power-iteration estimate of ||A||^2 (exact 2.0 for a Parseval pair)."""
    if _parseval_pair(dictionary, seed):
        return 2.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dictionary.num_atoms) + 1j * rng.standard_normal(dictionary.num_atoms)
    v /= _l2(v)
    value = 1.0
    for _ in range(iterations):
        w = dictionary.analyze(dictionary.synthesize(v))
        value = _l2(w)
        if value < _TINY:
            return 1.0
        v = w / value
    return float(value)


def _zero_certificate(trace: _Trace) -> SolverCertificate:
    trace.log(0, 0.0, 0.0)
    return SolverCertificate(0, 0.0, 0.0, True, trace.close())


# ---------------------------------------------------------------------------
# exhaustive minimal-support oracle


def l0_oracle(dictionary: ConcatDictionary, x, k_max: int,
              feasibility_tol: float = 1e-8) -> CoefficientVector | None:
    """Smallest-support exact representation of ``x``, by enumeration.

    Supports are scanned in increasing size (and lexicographic order
    within a size); each candidate is fit by least squares and accepted
    when the relative residual is within ``feasibility_tol``. Returns
    ``None`` when no representation with at most ``k_max`` atoms exists.
    The search is combinatorial, hence limited to k_max <= 12 and at most
    64 atoms.
    """
    if k_max > 12 or dictionary.num_atoms > 64:
        raise ValueError("l0_oracle regime exceeded (k_max <= 12, atoms <= 64)")
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    x = _as_complex_vector(x, dictionary.ambient_dim)
    num_atoms = dictionary.num_atoms
    split = dictionary.block_split
    xnorm = _l2(x)
    if xnorm == 0.0:
        return CoefficientVector(np.zeros(num_atoms, dtype=np.complex128), split)
    A = dictionary.dense()
    for size in range(1, k_max + 1):
        for support in combinations(range(num_atoms), size):
            cols = A[:, support]
            coeffs, *_ = np.linalg.lstsq(cols, x, rcond=None)
            if _l2(x - cols @ coeffs) <= feasibility_tol * xnorm:
                full = np.zeros(num_atoms, dtype=np.complex128)
                full[list(support)] = coeffs
                return CoefficientVector(full, split)
    return None


# ---------------------------------------------------------------------------
# exact-fit synthesis program (Douglas-Rachford)


def bp_synthesis(dictionary: ConcatDictionary, x,
                 config: SolverConfig | None = None) -> tuple[CoefficientVector, SolverCertificate]:
    """Minimize ||c||_1 subject to exact reconstruction through [A1 | A2].

    Douglas-Rachford splitting between complex soft-thresholding and the
    affine projection onto {c : A c = x}. The returned coefficients are the
    feasible candidate with the smallest l1 norm generated along the run.
    Non-convergence is reported through the certificate, not raised.
    """
    cfg = config or SolverConfig()
    cfg.validate()
    x = _as_complex_vector(x, dictionary.ambient_dim)
    if not np.all(np.isfinite(x.view(np.float64))):
        raise ValueError("input signal must be finite")
    split = dictionary.block_split
    trace = _Trace(cfg)
    xnorm = _l2(x)
    if xnorm == 0.0:
        zeros = np.zeros(dictionary.num_atoms, dtype=np.complex128)
        return CoefficientVector(zeros, split), _zero_certificate(trace)

    solve_gram = _gram_solver(dictionary, cfg.seed)

    def project(c: np.ndarray) -> np.ndarray:
        return c - dictionary.analyze(solve_gram(dictionary.synthesize(c) - x))

    z = dictionary.analyze(x)
    gamma = 0.25 * float(np.max(np.abs(z)))
    if gamma <= 0.0:
        gamma = 0.25 * xnorm

    best = None
    best_obj = np.inf
    best_defect = np.inf
    residual = np.inf
    iteration = 0
    for iteration in range(1, cfg.max_iterations + 1):
        c = _soft(z, gamma)
        w = project(2.0 * c - z)
        z += w - c
        obj = _l1(w)
        if obj < best_obj:
            best_obj = obj
            best = w.copy()
            best_defect = _l2(dictionary.synthesize(w) - x) / xnorm
        residual = _l2(w - c) / max(_l2(w), _l2(c), _TINY)
        trace.log(iteration, best_obj, best_defect)
        if residual <= cfg.convergence_tol:
            break

    converged = residual <= cfg.convergence_tol and best_defect <= cfg.feasibility_tol
    cert = SolverCertificate(iteration, residual, best_defect, converged, trace.close())
    return CoefficientVector(best, split), cert


# ---------------------------------------------------------------------------
# exact-fit analysis program (primal-dual on x1, with x2 = x - x1)


def bp_analysis(frame1: Frame, frame2: Frame, x,
                config: SolverConfig | None = None) -> tuple[np.ndarray, np.ndarray, SolverCertificate]:
    """Minimize ||A1* x1||_1 + ||A2* x2||_1 subject to x1 + x2 = x.

    Feasibility is enforced exactly by parametrizing x2 = x - x1, so what
    remains is the unconstrained primal-dual iteration in x1. Both frames
    must be Parseval.
    """
    cfg = config or SolverConfig()
    cfg.validate()
    if frame1.ambient_dim != frame2.ambient_dim:
        raise ValueError("frames must share the ambient dimension")
    _require_parseval(frame1, cfg.seed, "analysis-side separation")
    _require_parseval(frame2, cfg.seed, "analysis-side separation")
    x = _as_complex_vector(x, frame1.ambient_dim)
    trace = _Trace(cfg)
    xnorm = _l2(x)
    zeros = np.zeros_like(x)
    if xnorm == 0.0:
        return zeros, zeros.copy(), _zero_certificate(trace)

    b = frame2.analyze(x)
    # tau * sigma * ||K||^2 <= 1 with ||K||^2 = 2 for a Parseval pair.
    step = 0.999 / np.sqrt(2.0)

    # Start from the all-in-first-frame split; it is feasible, so the
    # best-candidate objective never exceeds it.
    x1 = x.copy()
    w1 = frame1.analyze(x1)
    w2 = frame2.analyze(x1)
    w1_bar = w1.copy()
    w2_bar = w2.copy()
    u1 = np.zeros(frame1.num_atoms, dtype=np.complex128)
    u2 = np.zeros(frame2.num_atoms, dtype=np.complex128)

    best_x1 = x1.copy()
    best_obj = _l1(w1) + _l1(b - w2)
    residual = np.inf
    iteration = 0
    for iteration in range(1, cfg.max_iterations + 1):
        u1_new = _project_linf_ball(u1 + step * w1_bar)
        u2_new = _project_linf_ball(u2 + step * (w2_bar - b))
        x1_new = x1 - step * (frame1.synthesize(u1_new) + frame2.synthesize(u2_new))

        w1_new = frame1.analyze(x1_new)
        w2_new = frame2.analyze(x1_new)
        obj = _l1(w1_new) + _l1(b - w2_new)
        if obj < best_obj:
            best_obj = obj
            best_x1 = x1_new.copy()

        residual = (_l2(x1_new - x1) / max(_l2(x1_new), _TINY)
                    + (_l2(u1_new - u1) + _l2(u2_new - u2))
                    / max(_l2(u1_new) + _l2(u2_new), _TINY))
        w1_bar = 2.0 * w1_new - w1
        w2_bar = 2.0 * w2_new - w2
        x1, w1, w2, u1, u2 = x1_new, w1_new, w2_new, u1_new, u2_new

        trace.log(iteration, best_obj, 0.0)
        if residual <= cfg.convergence_tol:
            break

    converged = residual <= cfg.convergence_tol
    cert = SolverCertificate(iteration, residual, 0.0, converged, trace.close())
    return best_x1, x - best_x1, cert


# ---------------------------------------------------------------------------
# penalized synthesis program (monotone accelerated soft-thresholding)


def bpdn_synthesis(dictionary: ConcatDictionary, x,
                   config: SolverConfig) -> tuple[CoefficientVector, SolverCertificate]:
    """Minimize ||c||_1 + lam ||x - A c||_2^2 by iterative soft-thresholding.

    Accelerated proximal gradient with a monotone safeguard: an accelerated
    candidate is only accepted when it does not increase the objective, so
    the logged objective sequence is non-increasing. Requires lam > 0; use
    ``bp_synthesis`` for the exact-fit problem.
    """
    cfg = config
    cfg.validate()
    if cfg.lam <= 0.0:
        raise ValueError("bpdn_synthesis requires lam > 0; use bp_synthesis for lam = 0")
    x = _as_complex_vector(x, dictionary.ambient_dim)
    split = dictionary.block_split
    trace = _Trace(cfg)
    if _l2(x) == 0.0:
        zeros = np.zeros(dictionary.num_atoms, dtype=np.complex128)
        return CoefficientVector(zeros, split), _zero_certificate(trace)

    lam = cfg.lam
    lipschitz = 2.0 * lam * _dict_opnorm_sq(dictionary, cfg.seed) * 1.05
    step = 1.0 / lipschitz

    def objective(c: np.ndarray, reconstruction: np.ndarray) -> float:
        return _l1(c) + lam * float(np.linalg.norm(x - reconstruction) ** 2)

    c = np.zeros(dictionary.num_atoms, dtype=np.complex128)
    c_obj = objective(c, np.zeros_like(x))
    y = c.copy()
    t = 1.0
    residual = np.inf
    iteration = 0
    for iteration in range(1, cfg.max_iterations + 1):
        grad = -2.0 * lam * dictionary.analyze(x - dictionary.synthesize(y))
        z = _soft(y - step * grad, step)
        z_obj = objective(z, dictionary.synthesize(z))
        residual = _l2(z - y) / max(_l2(y), _l2(z), _TINY)

        if z_obj <= c_obj:
            c_next, c_next_obj = z, z_obj
        else:
            c_next, c_next_obj = c, c_obj
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = c_next + (t / t_next) * (z - c_next) + ((t - 1.0) / t_next) * (c_next - c)
        c, c_obj, t = c_next, c_next_obj, t_next

        trace.log(iteration, c_obj, 0.0)
        if residual <= cfg.convergence_tol:
            break

    converged = residual <= cfg.convergence_tol
    cert = SolverCertificate(iteration, residual, 0.0, converged, trace.close())
    return CoefficientVector(c, split), cert


# ---------------------------------------------------------------------------
# penalized analysis program (primal-dual with exact quadratic prox)


def bpdn_analysis(frame1: Frame, frame2: Frame, x,
                  config: SolverConfig) -> tuple[np.ndarray, np.ndarray, SolverCertificate]:
    """Minimize ||A1* x1||_1 + ||A2* x2||_1 + lam ||x - x1 - x2||_2^2.

    Primal-dual iteration on (x1, x2); the coupling quadratic enters
    through its closed-form prox, so the step sizes do not degrade with
    lam. The data partition x = x1 + x2 + residual holds exactly by
    construction once the residual is set to x - x1 - x2.
    """
    cfg = config
    cfg.validate()
    if cfg.lam <= 0.0:
        raise ValueError("bpdn_analysis requires lam > 0; use bp_analysis for lam = 0")
    if frame1.ambient_dim != frame2.ambient_dim:
        raise ValueError("frames must share the ambient dimension")
    _require_parseval(frame1, cfg.seed, "analysis-side separation")
    _require_parseval(frame2, cfg.seed, "analysis-side separation")
    x = _as_complex_vector(x, frame1.ambient_dim)
    trace = _Trace(cfg)
    if _l2(x) == 0.0:
        zeros = np.zeros_like(x)
        return zeros, zeros.copy(), _zero_certificate(trace)

    lam = cfg.lam
    step = 0.999  # tau = sigma, ||K||^2 = 1 for Parseval blocks

    def quad_prox(v1: np.ndarray, v2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        shift = (2.0 * step * lam) * (x - v1 - v2) / (1.0 + 4.0 * step * lam)
        return v1 + shift, v2 + shift

    x1 = x / 2.0
    x2 = x / 2.0
    w1 = frame1.analyze(x1)
    w2 = frame2.analyze(x2)
    w1_bar = w1.copy()
    w2_bar = w2.copy()
    u1 = np.zeros(frame1.num_atoms, dtype=np.complex128)
    u2 = np.zeros(frame2.num_atoms, dtype=np.complex128)

    def objective(w1v, w2v, x1v, x2v) -> float:
        return _l1(w1v) + _l1(w2v) + lam * float(np.linalg.norm(x - x1v - x2v) ** 2)

    best = (x1.copy(), x2.copy())
    best_obj = objective(w1, w2, x1, x2)
    residual = np.inf
    iteration = 0
    for iteration in range(1, cfg.max_iterations + 1):
        u1_new = _project_linf_ball(u1 + step * w1_bar)
        u2_new = _project_linf_ball(u2 + step * w2_bar)
        x1_new, x2_new = quad_prox(x1 - step * frame1.synthesize(u1_new),
                                   x2 - step * frame2.synthesize(u2_new))

        w1_new = frame1.analyze(x1_new)
        w2_new = frame2.analyze(x2_new)
        obj = objective(w1_new, w2_new, x1_new, x2_new)
        if obj < best_obj:
            best_obj = obj
            best = (x1_new.copy(), x2_new.copy())

        residual = ((_l2(x1_new - x1) + _l2(x2_new - x2))
                    / max(_l2(x1_new) + _l2(x2_new), _TINY)
                    + (_l2(u1_new - u1) + _l2(u2_new - u2))
                    / max(_l2(u1_new) + _l2(u2_new), _TINY))
        w1_bar = 2.0 * w1_new - w1
        w2_bar = 2.0 * w2_new - w2
        x1, x2, w1, w2, u1, u2 = x1_new, x2_new, w1_new, w2_new, u1_new, u2_new

        trace.log(iteration, best_obj, 0.0)
        if residual <= cfg.convergence_tol:
            break

    converged = residual <= cfg.convergence_tol
    cert = SolverCertificate(iteration, residual, 0.0, converged, trace.close())
    return best[0], best[1], cert
