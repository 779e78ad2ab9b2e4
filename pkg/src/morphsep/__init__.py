"""Sparse two-dictionary signal separation toolkit."""

from .frames import (BUILTIN_KINDS, CoefficientVector, ConcatDictionary,
                     Frame, ParsevalCheck, default_zero_threshold,
                     is_parseval, make_frame)
from .coherence import (ClusterSpec, CoherenceReport, NspCheckResult,
                        babel_function, babel_profile, cluster_coherence,
                        joint_concentration_bounds, mutual_coherence,
                        nsp_check, structured_babel)
from .solvers import (SolverCertificate, SolverConfig, bp_analysis,
                      bp_synthesis, bpdn_analysis, bpdn_synthesis, l0_oracle)
from .separate import (BoundReport, SeparationResult, UncertaintyCheck,
                       default_cluster_spec, error_bound, relative_sparsity,
                       separate, uncertainty_check, verify_bound)
from . import fileio

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_KINDS", "CoefficientVector", "ConcatDictionary", "Frame",
    "ParsevalCheck", "default_zero_threshold", "is_parseval", "make_frame",
    "ClusterSpec", "CoherenceReport", "NspCheckResult", "babel_function",
    "babel_profile", "cluster_coherence", "joint_concentration_bounds",
    "mutual_coherence", "nsp_check", "structured_babel",
    "SolverCertificate", "SolverConfig", "bp_analysis", "bp_synthesis",
    "bpdn_analysis", "bpdn_synthesis", "l0_oracle",
    "BoundReport", "SeparationResult", "UncertaintyCheck",
    "default_cluster_spec", "error_bound", "relative_sparsity", "separate",
    "uncertainty_check", "verify_bound",
    "fileio",
]
