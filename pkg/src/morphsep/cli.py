"""Command-line harness: coherence reports, recovery sweeps, uncertainty
tables, file-based separation, and a seeded 2D separation demo.

Subcommands: ``coherence``, ``phase-transition``, ``uncertainty``,
``separate``, ``demo2d``. All outputs land under ``--out DIR``; JSON is
UTF-8, CSV uses comma separators with '.' decimals, images are binary P5
PGM. Identical configuration and seed produce byte-identical outputs.

Exit codes: 0 on success, 2 on invalid input or configuration, 3 when a
solver failed to converge (outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fileio
from .coherence import (ClusterSpec, CoherenceReport, babel_profile,
                        cluster_coherence, joint_concentration_bounds,
                        mutual_coherence)
from .frames import ConcatDictionary, Frame, is_parseval, make_frame
from .separate import MODES, separate, uncertainty_check
from .solvers import SolverCertificate, SolverConfig, bp_synthesis

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NOT_CONVERGED = 3

# A sweep trial counts as an exact recovery below this relative l2 error;
# it absorbs solver tolerance on top of the exact-recovery guarantee.
SUCCESS_REL_TOL = 1e-5

RECOVERY_BOUND_FACTOR = np.sqrt(2.0) - 0.5  # of sqrt(n), for two ONBs


# ---------------------------------------------------------------------------
# dictionary specs


def build_frame(spec: str, n: int | None = None,
                shape: tuple[int, int] | None = None) -> Frame:
    spec = spec.strip()
    if spec.startswith("matrix:"):
        payload = fileio.read_matrix_csv(spec[len("matrix:"):])
        return make_frame("matrix", matrix=payload)
    kind = spec.lower()
    if kind in ("haar2d", "dct2d"):
        if shape is None:
            raise ValueError(f"{kind} requires a 2D input or --shape")
        return make_frame(kind, shape=shape)
    if n is None:
        raise ValueError(f"{kind} requires --n or a 1D input")
    return make_frame(kind, n)


def build_frames(spec: str, n: int | None = None,
                 shape: tuple[int, int] | None = None) -> list[Frame]:
    parts = [p for p in spec.split("+") if p]
    if not 1 <= len(parts) <= 2:
        raise ValueError("dictionary spec must name one or two frames")
    return [build_frame(p, n=n, shape=shape) for p in parts]


def _write_json(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + ("\n" if not text.endswith("\n") else ""), encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for value in row:
            if isinstance(value, bool):
                cells.append("true" if value else "false")
            elif isinstance(value, float):
                cells.append(repr(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# coherence


def run_coherence(dict_spec: str, n: int | None, lambda1, lambda2,
                  probes: int, seed: int) -> CoherenceReport:
    frames = build_frames(dict_spec, n=n)
    if len(frames) == 2:
        system = ConcatDictionary(frames[0], frames[1])
    else:
        system = frames[0]
    mutual = mutual_coherence(system)
    babel = tuple(float(v) for v in babel_profile(system))

    cluster_12 = cluster_21 = kappa_lower = kappa_upper = None
    if len(frames) == 2 and (lambda1 is not None or lambda2 is not None):
        spec = ClusterSpec(tuple(lambda1 or ()), tuple(lambda2 or ()))
        cluster_12, cluster_21 = cluster_coherence(system, spec)
        both_parseval = (is_parseval(frames[0], 4, 1e-8, seed)
                         and is_parseval(frames[1], 4, 1e-8, seed))
        if both_parseval:
            kappa_lower, kappa_upper = joint_concentration_bounds(
                system, spec, num_probes=probes, seed=seed)
    return CoherenceReport(mutual=mutual, babel=babel, cluster_12=cluster_12,
                           cluster_21=cluster_21, kappa_lower=kappa_lower,
                           kappa_upper=kappa_upper)


# ---------------------------------------------------------------------------
# phase transition sweep


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    k_min: int
    k_max: int
    trials: int
    seed: int
    output_path: str

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.k_min <= self.k_max <= 2 * self.n:
            raise ValueError("k range must satisfy 0 <= k_min <= k_max <= total atoms")


@dataclass(frozen=True)
class PhaseTransitionRow:
    k: int
    success_rate: float
    mean_rel_error: float
    below_theorem_bound: bool


def plant_sparse_coefficients(rng: np.random.Generator, num_atoms: int, k: int) -> np.ndarray:
    """Unit-modulus random-phase coefficients on a uniform random support."""
    c = np.zeros(num_atoms, dtype=np.complex128)
    support = rng.choice(num_atoms, size=k, replace=False)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=k)
    c[support] = np.exp(1j * phases)
    return c


def run_phase_transition(config: ExperimentConfig,
                         solver_config: SolverConfig | None = None,
                         on_certificate=None) -> list[PhaseTransitionRow]:
    """Sinusoid-vs-spike recovery sweep over planted sparsity levels.

    Each trial draws its own RNG stream from (seed, k, trial), so results
    do not depend on execution order. ``on_certificate`` is an optional
    hook receiving each solve's certificate (used by the test harness).
    """
    config.validate()
    fourier = make_frame("fourier", config.n)
    dirac = make_frame("dirac", config.n)
    dictionary = ConcatDictionary(fourier, dirac)
    bound = RECOVERY_BOUND_FACTOR * np.sqrt(config.n)

    rows = []
    for k in range(config.k_min, config.k_max + 1):
        errors = []
        successes = 0
        for trial in range(config.trials):
            rng = np.random.default_rng([config.seed, k, trial])
            truth = plant_sparse_coefficients(rng, dictionary.num_atoms, k)
            x = dictionary.synthesize(truth)
            recovered, cert = bp_synthesis(dictionary, x, solver_config)
            if on_certificate is not None:
                on_certificate(cert)
            if k == 0:
                rel = float(np.linalg.norm(recovered.values))
            else:
                rel = float(np.linalg.norm(recovered.values - truth)
                            / np.linalg.norm(truth))
            errors.append(rel)
            successes += rel <= SUCCESS_REL_TOL
        rows.append(PhaseTransitionRow(
            k=k,
            success_rate=successes / config.trials,
            mean_rel_error=float(np.mean(errors)),
            below_theorem_bound=bool(k < bound),
        ))
    return rows


def write_phase_transition_csv(path: Path, rows: list[PhaseTransitionRow]) -> None:
    _write_csv(path, ["k", "success_rate", "mean_rel_error", "below_theorem_bound"],
               [[r.k, r.success_rate, r.mean_rel_error, r.below_theorem_bound] for r in rows])


# ---------------------------------------------------------------------------
# uncertainty table


def dirac_comb(n: int) -> np.ndarray | None:
    """Unit-spike comb with period sqrt(n), when n is a perfect square."""
    root = int(round(np.sqrt(n)))
    if root * root != n:
        return None
    x = np.zeros(n, dtype=np.complex128)
    x[::root] = 1.0
    return x


def run_uncertainty(n: int, trials: int, seed: int) -> list[dict]:
    """Joint time/frequency support counts for random sparse probes.

    Emits one row per probe plus a comb row when n is a perfect square.
    """
    if n < 1:
        raise ValueError("n must be positive")
    dirac = make_frame("dirac", n)
    fourier = make_frame("fourier", n)
    rows = []

    def record(kind: str, x: np.ndarray) -> None:
        check = uncertainty_check(x, dirac, fourier)
        rows.append({
            "kind": kind,
            "count1": check.count1,
            "count2": check.count2,
            "total": check.count1 + check.count2,
            "lower_bound": check.lower_bound,
            "holds": check.holds,
        })

    for trial in range(trials):
        rng = np.random.default_rng([seed, n, trial])
        k = int(rng.integers(1, n + 1))
        x = np.zeros(n, dtype=np.complex128)
        support = rng.choice(n, size=k, replace=False)
        x[support] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        record("random", x)
    comb = dirac_comb(n)
    if comb is not None:
        record("comb", comb)
    return rows


def write_uncertainty_csv(path: Path, rows: list[dict]) -> None:
    header = ["kind", "count1", "count2", "total", "lower_bound", "holds"]
    _write_csv(path, header, [[row[h] for h in header] for row in rows])


# ---------------------------------------------------------------------------
# file-based separation


def _certificate_json(cert: SolverCertificate) -> str:
    return json.dumps({
        "iterations_used": cert.iterations_used,
        "final_residual": cert.final_residual,
        "feasibility_defect": cert.feasibility_defect,
        "converged": cert.converged,
    }, indent=2, sort_keys=True)


def write_separation_outputs(out_dir: Path, result, shape: tuple[int, int] | None,
                             pgm_scale: float = 255.0) -> None:
    """Write components, residual, certificate, and bound report.

    1D results are written as CSV; 2D results as full-precision CSV plus an
    8-bit PGM view scaled by ``pgm_scale``.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    parts = {
        "component1": result.component1,
        "component2": result.component2,
        "residual": result.residual,
    }
    for name, values in parts.items():
        fileio.write_signal_csv(out_dir / f"{name}.csv", values)
        if shape is not None:
            fileio.write_pgm(out_dir / f"{name}.pgm",
                             values.real.reshape(shape) * pgm_scale)
    _write_json(out_dir / "certificate.json", _certificate_json(result.certificate))
    report = result.diagnostics.to_json() if result.diagnostics is not None else "null"
    _write_json(out_dir / "bound_report.json", report)


def run_separation(input_path: str, dict_spec: str, mode: str, lam: float,
                   out_dir: Path, seed: int = 0,
                   cluster_spec: ClusterSpec | None = None,
                   max_iterations: int = 20000) -> int:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    path = Path(input_path)
    if path.suffix.lower() == ".pgm":
        image = fileio.read_pgm(path) / 255.0
        shape = image.shape
        x = image.ravel().astype(np.complex128)
        frames = build_frames(dict_spec, shape=shape)
    else:
        x = fileio.read_signal_csv(path)
        shape = None
        frames = build_frames(dict_spec, n=x.size)
    if len(frames) != 2:
        raise ValueError("separation requires a two-frame dictionary spec")

    config = SolverConfig(max_iterations=max_iterations, lam=lam, seed=seed)
    result = separate(x, frames[0], frames[1], mode, config, cluster_spec=cluster_spec)
    write_separation_outputs(out_dir, result, shape)
    return EXIT_OK if result.certificate.converged else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------------------
# 2D demo scene


DOT_AMPLITUDE = 2.0
LINE_AMPLITUDE = 0.6


def generate_scene(size: int, num_points: int, num_lines: int,
                   noise_sigma: float, rng: np.random.Generator):
    """Random bright dots + axis-aligned line segments + Gaussian noise.

    Returns (scene, dots_layer, lines_layer)."""
    dots = np.zeros((size, size))
    if num_points:
        flat = rng.choice(size * size, size=num_points, replace=False)
        dots[np.unravel_index(flat, dots.shape)] = DOT_AMPLITUDE
    lines = np.zeros((size, size))
    min_len = max(2, size // 4)
    for _ in range(num_lines):
        horizontal = bool(rng.integers(0, 2))
        index = int(rng.integers(0, size))
        length = int(rng.integers(min_len, size + 1))
        start = int(rng.integers(0, size - length + 1))
        if horizontal:
            lines[index, start:start + length] += LINE_AMPLITUDE
        else:
            lines[start:start + length, index] += LINE_AMPLITUDE
    noise = noise_sigma * rng.standard_normal((size, size)) if noise_sigma > 0 else np.zeros((size, size))
    return dots + lines + noise, dots, lines


def demo_lambda(noise_sigma: float) -> float:
    # Threshold analysis coefficients near 2 sigma: the residual then
    # absorbs the noise without over-shrinking the structured content.
    # Falls back to a strong fit when the scene is clean.
    return 1.0 / (4.0 * noise_sigma) if noise_sigma > 0 else 20.0


def run_demo2d(size: int, num_points: int, num_lines: int, noise_sigma: float,
               seed: int, out_dir: Path, lam: float | None = None,
               max_iterations: int = 20000) -> dict:
    """Generate a seeded dot/line scene and separate it with haar2d + dct2d.

    Writes the scene, the planted truth layers, the separation outputs, and
    a metrics.json summary; returns the metrics dict.
    """
    if size < 1 or size & (size - 1):
        raise ValueError("demo2d requires a dyadic size")
    rng = np.random.default_rng(seed)
    scene, dots, lines = generate_scene(size, num_points, num_lines, noise_sigma, rng)
    if lam is None:
        lam = demo_lambda(noise_sigma)

    haar = make_frame("haar2d", shape=(size, size))
    dct2 = make_frame("dct2d", shape=(size, size))
    config = SolverConfig(max_iterations=max_iterations, convergence_tol=1e-8,
                          lam=lam, seed=seed)
    result = separate(scene.ravel().astype(np.complex128), haar, dct2,
                      "analysis_denoise", config)

    out_dir.mkdir(parents=True, exist_ok=True)
    pgm_scale = 255.0 / DOT_AMPLITUDE
    for name, layer in (("scene", scene), ("truth_dots", dots), ("truth_lines", lines)):
        fileio.write_signal_csv(out_dir / f"{name}.csv", layer.ravel())
        fileio.write_pgm(out_dir / f"{name}.pgm", layer * pgm_scale)
    write_separation_outputs(out_dir, result, (size, size), pgm_scale=pgm_scale)

    x = scene.ravel()
    partition_defect = float(np.max(np.abs(
        result.component1 + result.component2 + result.residual - x)))
    dot_vec = dots.ravel()
    dot_norm_sq = float(dot_vec @ dot_vec)
    if dot_norm_sq > 0:
        dot_energy_captured = float(np.real(result.component1 @ dot_vec) / dot_norm_sq)
    else:
        dot_energy_captured = None
    metrics = {
        "size": size,
        "num_points": num_points,
        "num_lines": num_lines,
        "noise_sigma": noise_sigma,
        "seed": seed,
        "lam": lam,
        "partition_defect": partition_defect,
        "dot_energy_captured": dot_energy_captured,
        "residual_l2": float(np.linalg.norm(result.residual)),
        "noise_l2_budget": noise_sigma * size,
        "converged": result.certificate.converged,
        "iterations_used": result.certificate.iterations_used,
    }
    _write_json(out_dir / "metrics.json", json.dumps(metrics, indent=2, sort_keys=True))
    return metrics


# ---------------------------------------------------------------------------
# argument parsing


def _parse_index_list(text: str | None):
    if text is None:
        return None
    value = json.loads(text)
    if not isinstance(value, list):
        raise ValueError("cluster index lists must be JSON arrays")
    return [int(v) for v in value]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morphsep",
                                     description="sparse two-dictionary signal separation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coherence", help="coherence report for a dictionary spec")
    p.add_argument("--dict", required=True, dest="dict_spec")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--lambda1", default=None, help="JSON array of indices into frame 1")
    p.add_argument("--lambda2", default=None, help="JSON array of indices into frame 2")
    p.add_argument("--probes", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("phase-transition", help="planted-sparsity recovery sweep")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("uncertainty", help="joint support-count table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("separate", help="separate a CSV/PGM file")
    p.add_argument("--input", required=True)
    p.add_argument("--dict", required=True, dest="dict_spec")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--lambda", type=float, default=0.0, dest="lam")
    p.add_argument("--lambda1", default=None)
    p.add_argument("--lambda2", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iterations", type=int, default=20000)
    p.add_argument("--out", required=True)

    p = sub.add_parser("demo2d", help="seeded dot/line separation demo")
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--lines", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--lambda", type=float, default=None, dest="lam")
    p.add_argument("--max-iterations", type=int, default=20000)
    p.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "coherence":
            report = run_coherence(args.dict_spec, args.n,
                                   _parse_index_list(args.lambda1),
                                   _parse_index_list(args.lambda2),
                                   args.probes, args.seed)
            text = report.to_json()
            print(text)
            if args.out:
                _write_json(Path(args.out) / "coherence.json", text)
            return EXIT_OK

        if args.command == "phase-transition":
            config = ExperimentConfig(n=args.n, k_min=args.k_min, k_max=args.k_max,
                                      trials=args.trials, seed=args.seed,
                                      output_path=args.out)
            rows = run_phase_transition(config)
            write_phase_transition_csv(Path(args.out) / "phase_transition.csv", rows)
            for row in rows:
                print(f"k={row.k} success_rate={row.success_rate}"
                      f" below_theorem_bound={row.below_theorem_bound}")
            return EXIT_OK

        if args.command == "uncertainty":
            rows = run_uncertainty(args.n, args.trials, args.seed)
            write_uncertainty_csv(Path(args.out) / "uncertainty.csv", rows)
            min_total = min(row["total"] for row in rows)
            all_hold = all(row["holds"] for row in rows)
            print(f"min_total={min_total} bound={2.0 * np.sqrt(args.n)!r} all_hold={all_hold}")
            return EXIT_OK

        if args.command == "separate":
            cluster = None
            l1 = _parse_index_list(args.lambda1)
            l2 = _parse_index_list(args.lambda2)
            if l1 is not None or l2 is not None:
                cluster = ClusterSpec(tuple(l1 or ()), tuple(l2 or ()))
            code = run_separation(args.input, args.dict_spec, args.mode, args.lam,
                                  Path(args.out), seed=args.seed, cluster_spec=cluster,
                                  max_iterations=args.max_iterations)
            if code == EXIT_NOT_CONVERGED:
                print("warning: solver did not converge; outputs written", file=sys.stderr)
            return code

        if args.command == "demo2d":
            metrics = run_demo2d(args.size, args.points, args.lines, args.noise,
                                 args.seed, Path(args.out), lam=args.lam,
                                 max_iterations=args.max_iterations)
            print(json.dumps(metrics, indent=2, sort_keys=True))
            return EXIT_OK
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
