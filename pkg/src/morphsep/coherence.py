"""Coherence measures for frames and two-frame dictionaries.

All measures are computed exactly from dense Gram matrices, so they apply
to any frame small enough to densify (see ``DENSE_ENTRY_LIMIT``). The
``nsp_check`` routine decides the order-k nullspace property of a small
real dictionary by exact linear programming over its nullspace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from itertools import combinations, product

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .frames import ConcatDictionary, Frame, is_parseval

ATOM_NORM_TOL = 1e-10
# Witnesses that reach the 1/2 threshold within this slack count as
# failures: the property requires a strict inequality.
NSP_BOUNDARY_TOL = 1e-9


def _atoms(frame_or_dict) -> np.ndarray:
    return frame_or_dict.dense()


def _check_normalized(A: np.ndarray) -> None:
    norms = np.linalg.norm(A, axis=0)
    if np.max(np.abs(norms - 1.0)) > ATOM_NORM_TOL:
        raise ValueError("atoms must be unit-norm for this coherence measure")


def _abs_gram(A: np.ndarray) -> np.ndarray:
    G = np.abs(A.conj().T @ A)
    np.fill_diagonal(G, 0.0)
    return G


def mutual_coherence(frame_or_dict) -> float:
    """Largest |<atom_i, atom_j>| over distinct atoms of a normalized system.

    For a two-frame dictionary the maximum runs over all atoms of both
    blocks, cross terms included.
    """
    A = _atoms(frame_or_dict)
    _check_normalized(A)
    if A.shape[1] < 2:
        return 0.0
    return float(np.max(_abs_gram(A)))


def _column_tail_sums(frame_or_dict) -> np.ndarray:
    """Per-column off-diagonal Gram magnitudes, sorted descending."""
    A = _atoms(frame_or_dict)
    _check_normalized(A)
    G = _abs_gram(A)
    return np.sort(G, axis=0)[::-1]


def babel_function(frame_or_dict, m: int) -> float:
    """Cumulative coherence: worst total correlation of an m-atom cluster
    with one outside atom.

    Exact: for each candidate outside atom the m largest off-diagonal Gram
    magnitudes in its column are summed, then the worst column is taken.
    """
    A = _atoms(frame_or_dict)
    _check_normalized(A)
    num_atoms = A.shape[1]
    if not 1 <= m <= num_atoms - 1:
        raise ValueError(f"m must lie in [1, {num_atoms - 1}]")
    G = _abs_gram(A)
    sorted_cols = np.sort(G, axis=0)[::-1]
    return float(np.max(np.sum(sorted_cols[:m], axis=0)))


def babel_profile(frame_or_dict) -> np.ndarray:
    """``babel_function`` for every m = 1 .. num_atoms-1 in one pass."""
    sorted_cols = _column_tail_sums(frame_or_dict)
    partial = np.cumsum(sorted_cols, axis=0)
    return np.max(partial, axis=1)[:-1].copy()


def structured_babel(frame_or_dict, family_of_sets, p: float = 1.0) -> float:
    """Worst p-norm correlation of a cluster drawn from a fixed family.

    ``family_of_sets`` is an iterable of index sets into the atom system;
    for each set the inner maximum runs over atoms outside it.
    """
    if not 1 <= p < np.inf:
        raise ValueError("p must satisfy 1 <= p < inf")
    A = _atoms(frame_or_dict)
    _check_normalized(A)
    num_atoms = A.shape[1]
    G = _abs_gram(A)
    family = [np.asarray(sorted(set(int(i) for i in s)), dtype=int) for s in family_of_sets]
    if not family:
        raise ValueError("family_of_sets must be nonempty")
    worst = 0.0
    for idx in family:
        if idx.size and (idx.min() < 0 or idx.max() >= num_atoms):
            raise ValueError("cluster index out of range")
        if idx.size == 0 or idx.size == num_atoms:
            continue
        outside = np.setdiff1d(np.arange(num_atoms), idx, assume_unique=True)
        sums = np.sum(G[np.ix_(idx, outside)] ** p, axis=0)
        worst = max(worst, float(np.max(sums) ** (1.0 / p)))
    return worst


@dataclass(frozen=True)
class ClusterSpec:
    """Index clusters into the two blocks of a dictionary."""

    lambda1: tuple[int, ...]
    lambda2: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lambda1", tuple(int(i) for i in self.lambda1))
        object.__setattr__(self, "lambda2", tuple(int(i) for i in self.lambda2))

    def validate(self, first_size: int, second_size: int) -> None:
        for name, idx, size in (("lambda1", self.lambda1, first_size),
                                ("lambda2", self.lambda2, second_size)):
            if len(set(idx)) != len(idx):
                raise ValueError(f"{name} contains duplicate indices")
            if idx and (min(idx) < 0 or max(idx) >= size):
                raise ValueError(f"{name} index out of range [0, {size})")

    @classmethod
    def from_json(cls, text: str) -> "ClusterSpec":
        data = json.loads(text)
        return cls(tuple(data.get("lambda1", ())), tuple(data.get("lambda2", ())))


def cluster_coherence(dictionary: ConcatDictionary, spec: ClusterSpec) -> tuple[float, float]:
    """Cluster coherences of a two-frame dictionary.

    Returns ``(c12, c21)`` where ``c12`` is the worst, over atoms of the
    second frame, total correlation with the first frame's cluster, and
    ``c21`` the symmetric quantity for the second frame's cluster. Atoms
    are used as-is; no normalization is assumed.
    """
    spec.validate(dictionary.first.num_atoms, dictionary.second.num_atoms)
    A1 = dictionary.first.dense()
    A2 = dictionary.second.dense()
    cross = np.abs(A1.conj().T @ A2)
    idx1 = np.asarray(spec.lambda1, dtype=int)
    idx2 = np.asarray(spec.lambda2, dtype=int)
    c12 = float(np.max(np.sum(cross[idx1, :], axis=0))) if idx1.size else 0.0
    c21 = float(np.max(np.sum(cross[:, idx2], axis=1))) if idx2.size else 0.0
    return c12, c21


def joint_concentration_bounds(dictionary: ConcatDictionary, spec: ClusterSpec,
                               num_probes: int = 64, seed: int = 0) -> tuple[float, float]:
    """Certified bracket for the joint concentration of two Parseval frames.

    The upper bound is the cluster-coherence maximum; the lower bound is the
    best concentration ratio over a deterministic probe set (every atom of
    both frames plus ``num_probes`` seeded Gaussian signals). The exact
    supremum lies between the two.
    """
    if num_probes < 1:
        raise ValueError("num_probes must be at least 1")
    f1, f2 = dictionary.first, dictionary.second
    for frame in (f1, f2):
        check = is_parseval(frame, num_probes=4, tol=1e-8, seed=seed)
        if not check:
            raise ValueError(f"joint concentration requires Parseval frames "
                             f"(round-trip defect {check.max_defect:.2e})")
    spec.validate(f1.num_atoms, f2.num_atoms)
    c12, c21 = cluster_coherence(dictionary, spec)
    upper = max(c12, c21)

    idx1 = np.asarray(spec.lambda1, dtype=int)
    idx2 = np.asarray(spec.lambda2, dtype=int)
    rng = np.random.default_rng(seed)
    n = dictionary.ambient_dim
    probes = [f1.atom(i) for i in range(f1.num_atoms)]
    probes += [f2.atom(j) for j in range(f2.num_atoms)]
    probes += [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(num_probes)]

    lower = 0.0
    for x in probes:
        a1 = f1.analyze(x)
        a2 = f2.analyze(x)
        denom = float(np.sum(np.abs(a1)) + np.sum(np.abs(a2)))
        if denom < 1e-300:
            continue
        numer = float(np.sum(np.abs(a1[idx1])) + np.sum(np.abs(a2[idx2])))
        lower = max(lower, numer / denom)
    return lower, upper


@dataclass(frozen=True)
class CoherenceReport:
    """Bundle of coherence measures; serializes to JSON field-for-field."""

    mutual: float
    babel: tuple[float, ...]
    cluster_12: float | None = None
    cluster_21: float | None = None
    kappa_lower: float | None = None
    kappa_upper: float | None = None

    def to_json(self) -> str:
        data = asdict(self)
        data["babel"] = list(self.babel)
        return json.dumps(data, indent=2, sort_keys=True)


@dataclass(frozen=True)
class NspCheckResult:
    """Outcome of the order-k nullspace property decision.

    ``worst_ratio`` is the largest cluster fraction max ||1_L d||_1 found
    over the examined clusters (with ||d||_1 = 1); the property holds iff
    it stays strictly below 1/2. On failure ``witness`` is a nullspace
    vector with unit l1 norm and ``witness_set`` the offending cluster.
    """

    satisfied: bool
    worst_ratio: float
    witness_set: tuple[int, ...] | None = None
    witness: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.satisfied


def _half_sign_patterns(k: int):
    # d and -d give the same ratio, so fix the first sign to +1.
    for rest in product((1.0, -1.0), repeat=k - 1):
        yield np.array((1.0,) + rest)


def nsp_check(matrix_frame: Frame, k: int) -> NspCheckResult:
    """Decide the order-k nullspace property of a small real dictionary.

    Exact method: compute a nullspace basis B; for every cluster L of size
    exactly k (smaller clusters are dominated) and every sign pattern s on
    L, maximize s^T d_L over d = Bz, ||d||_1 <= 1 by linear programming.
    The property holds iff every optimum stays strictly below 1/2.

    Restricted to the exhaustive regime: ambient_dim <= 16, num_atoms <= 24.
    """
    if matrix_frame.kind != "matrix":
        raise ValueError("nsp_check requires a matrix frame")
    A = matrix_frame.dense()
    if np.max(np.abs(A.imag)) > 0:
        raise ValueError("nsp_check requires a real-valued frame")
    A = A.real
    n, num_atoms = A.shape
    if n > 16 or num_atoms > 24:
        raise ValueError("frame exceeds the exhaustive regime (n <= 16, atoms <= 24)")
    if not 1 <= k < num_atoms:
        raise ValueError(f"k must lie in [1, {num_atoms - 1}]")

    B = null_space(A)
    if B.shape[1] == 0:
        # Trivial nullspace: the condition is vacuous.
        return NspCheckResult(True, 0.0)
    r = B.shape[1]

    # Shared LP geometry: variables (z, t), constraints  +-Bz <= t, sum t <= 1.
    eye = np.eye(num_atoms)
    a_ub = np.vstack([
        np.hstack([B, -eye]),
        np.hstack([-B, -eye]),
        np.hstack([np.zeros((1, r)), np.ones((1, num_atoms))]),
    ])
    b_ub = np.concatenate([np.zeros(2 * num_atoms), [1.0]])
    bounds = [(None, None)] * r + [(0.0, None)] * num_atoms

    worst = 0.0
    for cluster in combinations(range(num_atoms), k):
        rows = B[list(cluster), :]
        for signs in _half_sign_patterns(k):
            objective = np.concatenate([-(rows.T @ signs), np.zeros(num_atoms)])
            res = linprog(objective, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
            if res.status != 0:
                raise RuntimeError(f"nullspace LP failed with status {res.status}")
            value = float(-res.fun)
            worst = max(worst, value)
            if value >= 0.5 - NSP_BOUNDARY_TOL:
                d = B @ res.x[:r]
                scale = float(np.sum(np.abs(d)))
                if scale > 0:
                    d = d / scale
                return NspCheckResult(False, worst, tuple(cluster), d)
    return NspCheckResult(True, worst)
