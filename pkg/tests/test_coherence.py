import numpy as np
import pytest

import morphsep as ms
from oracles import brute_force_babel, l1_unique_all_patterns, nsp_test_frames

RNG = np.random.default_rng(55)


def fourier_dirac(n):
    return ms.ConcatDictionary(ms.make_frame("fourier", n), ms.make_frame("dirac", n))


# -- mutual coherence --------------------------------------------------------


def test_mutual_fourier_dirac():
    assert np.isclose(ms.mutual_coherence(fourier_dirac(4)), 0.5, atol=1e-13)


def test_mutual_single_onb_is_zero():
    assert ms.mutual_coherence(ms.make_frame("dct", 8)) <= 1e-12


def test_mutual_two_atoms():
    A = np.zeros((4, 2))
    A[0, 0] = 1.0
    A[:2, 1] = 1.0 / np.sqrt(2)
    f = ms.make_frame("matrix", matrix=A)
    assert np.isclose(ms.mutual_coherence(f), 1 / np.sqrt(2), atol=1e-12)


def test_mutual_requires_normalized_atoms():
    A = np.eye(4) * 2.0
    with pytest.raises(ValueError):
        ms.mutual_coherence(ms.make_frame("matrix", matrix=A))


# -- babel -------------------------------------------------------------------


def test_babel_orthonormal_is_zero():
    f = ms.make_frame("haar1d", 8)
    for m in (1, 3, 7):
        assert ms.babel_function(f, m) <= 1e-12


def test_babel_at_one_equals_mutual():
    d = fourier_dirac(8)
    # exhaustive pair scan as the reference
    A = d.dense()
    pair_max = max(abs(np.vdot(A[:, i], A[:, j]))
                   for i in range(16) for j in range(16) if i != j)
    assert np.isclose(ms.babel_function(d, 1), pair_max, atol=1e-13)
    assert np.isclose(ms.babel_function(d, 1), ms.mutual_coherence(d), atol=1e-13)


def test_babel_fourier_dirac_m2():
    assert np.isclose(ms.babel_function(fourier_dirac(4), 2), 1.0, atol=1e-12)


def test_babel_matches_brute_force():
    A = RNG.standard_normal((6, 9))
    A /= np.linalg.norm(A, axis=0)
    f = ms.make_frame("matrix", matrix=A)
    for m in range(1, 9):
        assert np.isclose(ms.babel_function(f, m), brute_force_babel(A, m), atol=1e-11)


def test_babel_nondecreasing_and_profile():
    d = fourier_dirac(8)
    profile = ms.babel_profile(d)
    assert profile.size == 15
    assert np.all(np.diff(profile) >= -1e-12)
    for m in (1, 5, 15):
        assert np.isclose(profile[m - 1], ms.babel_function(d, m), atol=1e-13)


def test_babel_m_out_of_range():
    with pytest.raises(ValueError):
        ms.babel_function(fourier_dirac(4), 0)
    with pytest.raises(ValueError):
        ms.babel_function(fourier_dirac(4), 8)


# -- structured babel ----------------------------------------------------------


def test_structured_babel_singletons_give_mutual():
    d = fourier_dirac(4)
    family = [(i,) for i in range(8)]
    assert np.isclose(ms.structured_babel(d, family, 1), ms.mutual_coherence(d), atol=1e-13)


def test_structured_babel_size_m_gives_babel():
    from itertools import combinations
    A = RNG.standard_normal((5, 8))
    A /= np.linalg.norm(A, axis=0)
    f = ms.make_frame("matrix", matrix=A)
    for m in (2, 3):
        family = list(combinations(range(8), m))
        assert np.isclose(ms.structured_babel(f, family, 1),
                          ms.babel_function(f, m), atol=1e-12)


def test_structured_babel_orthonormal_zero():
    family = [(0, 1), (2,), (3, 4, 5)]
    assert ms.structured_babel(ms.make_frame("dct", 8), family, 2) <= 1e-12


def test_structured_babel_errors():
    d = fourier_dirac(4)
    with pytest.raises(ValueError):
        ms.structured_babel(d, [], 1)
    with pytest.raises(ValueError):
        ms.structured_babel(d, [(0,)], 0.5)
    with pytest.raises(ValueError):
        ms.structured_babel(d, [(99,)], 1)


# -- cluster coherence ---------------------------------------------------------


def test_cluster_coherence_empty_cluster():
    c12, c21 = ms.cluster_coherence(fourier_dirac(8), ms.ClusterSpec((), (1, 2)))
    assert c12 == 0.0
    assert c21 > 0.0


def test_cluster_coherence_full_dirac_cluster():
    n = 16
    d = ms.ConcatDictionary(ms.make_frame("dirac", n), ms.make_frame("fourier", n))
    c12, _ = ms.cluster_coherence(d, ms.ClusterSpec(tuple(range(n)), ()))
    assert np.isclose(c12, np.sqrt(n), atol=1e-10)


def test_cluster_coherence_singleton_below_mutual():
    d = fourier_dirac(8)
    mu = ms.mutual_coherence(d)
    c12, _ = ms.cluster_coherence(d, ms.ClusterSpec((3,), ()))
    assert c12 <= mu + 1e-12


def test_cluster_coherence_monotone_in_cluster():
    d = fourier_dirac(8)
    small, _ = ms.cluster_coherence(d, ms.ClusterSpec((0, 1), ()))
    large, _ = ms.cluster_coherence(d, ms.ClusterSpec((0, 1, 2, 5), ()))
    assert small <= large + 1e-12


def test_cluster_spec_validation():
    with pytest.raises(ValueError):
        ms.cluster_coherence(fourier_dirac(4), ms.ClusterSpec((0, 0), ()))
    with pytest.raises(ValueError):
        ms.cluster_coherence(fourier_dirac(4), ms.ClusterSpec((7,), ()))


def test_cluster_spec_from_json():
    spec = ms.ClusterSpec.from_json('{"lambda1": [2, 0], "lambda2": []}')
    assert spec.lambda1 == (2, 0) and spec.lambda2 == ()


# -- joint concentration ---------------------------------------------------------


def test_joint_concentration_empty_and_full():
    d = fourier_dirac(16)
    lower, upper = ms.joint_concentration_bounds(d, ms.ClusterSpec((), ()), 5, seed=1)
    assert lower == 0.0 and upper == 0.0
    full = ms.ClusterSpec(tuple(range(16)), tuple(range(16)))
    lower, upper = ms.joint_concentration_bounds(d, full, 5, seed=1)
    assert np.isclose(lower, 1.0, atol=1e-12)
    assert lower <= upper + 1e-9


def test_joint_concentration_ordering_random_clusters():
    d = fourier_dirac(16)
    rng = np.random.default_rng(3)
    for _ in range(20):
        k1 = int(rng.integers(0, 5))
        k2 = int(rng.integers(0, 5))
        spec = ms.ClusterSpec(tuple(rng.choice(16, k1, replace=False)),
                              tuple(rng.choice(16, k2, replace=False)))
        lower, upper = ms.joint_concentration_bounds(d, spec, 10, seed=4)
        assert lower <= upper + 1e-9


def test_joint_concentration_rejects_non_parseval():
    bad = ms.make_frame("matrix", matrix=np.eye(4) * 2.0)
    d = ms.ConcatDictionary(bad, ms.make_frame("dirac", 4))
    with pytest.raises(ValueError):
        ms.joint_concentration_bounds(d, ms.ClusterSpec((), ()), 4)


# -- nullspace property ----------------------------------------------------------


def test_nsp_trivial_nullspace_vacuous():
    A = RNG.standard_normal((5, 5))
    f = ms.make_frame("matrix", matrix=A)
    for k in (1, 2, 4):
        assert ms.nsp_check(f, k).satisfied


def test_nsp_identity_pair_witness():
    A = np.hstack([np.eye(4), np.eye(4)])
    result = ms.nsp_check(ms.make_frame("matrix", matrix=A), 1)
    assert not result.satisfied
    assert np.isclose(result.worst_ratio, 0.5, atol=1e-9)
    d = result.witness
    assert np.isclose(np.abs(d).sum(), 1.0, atol=1e-9)
    mass = np.abs(d[list(result.witness_set)]).sum()
    assert mass >= 0.5 - 1e-9
    # witness actually lies in the nullspace
    assert np.linalg.norm(A @ d) <= 1e-9


def test_nsp_agrees_with_exhaustive_uniqueness():
    rng = np.random.default_rng(17)
    for _ in range(4):
        for A in nsp_test_frames(rng):
            f = ms.make_frame("matrix", matrix=A)
            for k in (1, 2):
                assert ms.nsp_check(f, k).satisfied == l1_unique_all_patterns(A, k)


def test_nsp_rejects_bad_inputs():
    f = ms.make_frame("matrix", matrix=np.eye(4))
    with pytest.raises(ValueError):
        ms.nsp_check(f, 0)
    with pytest.raises(ValueError):
        ms.nsp_check(f, 4)
    complex_frame = ms.make_frame("matrix", matrix=np.eye(4) * (1 + 1j) / np.sqrt(2))
    with pytest.raises(ValueError):
        ms.nsp_check(complex_frame, 1)
    big = ms.make_frame("matrix", matrix=RNG.standard_normal((17, 20)))
    with pytest.raises(ValueError):
        ms.nsp_check(big, 1)


# -- report ----------------------------------------------------------------------


def test_coherence_report_json_fields():
    import json
    report = ms.CoherenceReport(mutual=0.5, babel=(0.5, 1.0), cluster_12=0.0,
                                cluster_21=None, kappa_lower=0.1, kappa_upper=0.4)
    data = json.loads(report.to_json())
    assert set(data) == {"mutual", "babel", "cluster_12", "cluster_21",
                         "kappa_lower", "kappa_upper"}
    assert data["babel"] == [0.5, 1.0] and data["cluster_21"] is None
