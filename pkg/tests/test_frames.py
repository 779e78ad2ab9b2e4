import numpy as np
import pytest

import morphsep as ms
from oracles import dense_matvec

RNG = np.random.default_rng(101)

ONE_D_KINDS = ["dirac", "fourier", "dct", "haar1d"]


def builtin_frames(n=16, shape=(4, 8)):
    frames = [ms.make_frame(kind, n) for kind in ONE_D_KINDS]
    frames.append(ms.make_frame("haar2d", shape=shape))
    frames.append(ms.make_frame("dct2d", shape=shape))
    return frames


def test_dirac_is_identity():
    f = ms.make_frame("dirac", 4)
    x = np.array([1.0, -2.0, 3.0j, 0.5])
    assert np.allclose(f.analyze(x), x)
    assert np.allclose(f.synthesize([1, 0, 0, 0]), [1, 0, 0, 0])


def test_fourier_atom_formula():
    f = ms.make_frame("fourier", 4)
    assert np.allclose(f.atom(0), [0.5, 0.5, 0.5, 0.5], atol=1e-14)
    # atom at frequency 1 is (1/2) e^{2 pi i t / 4}
    expected = 0.5 * np.exp(2j * np.pi * np.arange(4) / 4)
    assert np.allclose(f.atom(1), expected, atol=1e-14)


def test_fourier_synthesize_analyze_pair():
    f = ms.make_frame("fourier", 4)
    assert np.allclose(f.synthesize([2, 0, 0, 0]), np.ones(4), atol=1e-13)
    assert np.allclose(f.analyze(np.ones(4)), [2, 0, 0, 0], atol=1e-13)


def test_fourier_spike_is_flat():
    f = ms.make_frame("fourier", 16)
    spike = np.zeros(16)
    spike[0] = 1.0
    coeffs = f.analyze(spike)
    assert np.allclose(np.abs(coeffs), 0.25, atol=1e-13)


def test_haar_requires_dyadic():
    with pytest.raises(ValueError):
        ms.make_frame("haar1d", 3)
    with pytest.raises(ValueError):
        ms.make_frame("haar2d", shape=(3, 4))


def test_zero_dimension_rejected():
    with pytest.raises(ValueError):
        ms.make_frame("fourier", 0)
    with pytest.raises(ValueError):
        ms.make_frame("nosuch", 4)


def test_matrix_frame_matches_loop_product():
    A = RNG.standard_normal((6, 9)) + 1j * RNG.standard_normal((6, 9))
    f = ms.make_frame("matrix", matrix=A)
    c = RNG.standard_normal(9) + 1j * RNG.standard_normal(9)
    assert np.allclose(f.synthesize(c), dense_matvec(A, c), atol=1e-12)
    x = RNG.standard_normal(6) + 1j * RNG.standard_normal(6)
    assert np.allclose(f.analyze(x), dense_matvec(A.conj().T, x), atol=1e-12)


@pytest.mark.parametrize("frame", builtin_frames(), ids=lambda f: f.kind)
def test_adjoint_identity(frame):
    # <Ac, x> == <c, A*x> on random probes
    for _ in range(100):
        c = RNG.standard_normal(frame.num_atoms) + 1j * RNG.standard_normal(frame.num_atoms)
        x = RNG.standard_normal(frame.ambient_dim) + 1j * RNG.standard_normal(frame.ambient_dim)
        lhs = np.vdot(x, frame.synthesize(c))
        rhs = np.vdot(frame.analyze(x), c)
        scale = np.linalg.norm(c) * np.linalg.norm(x)
        assert abs(lhs - rhs) <= 1e-10 * scale


@pytest.mark.parametrize("frame", builtin_frames(), ids=lambda f: f.kind)
def test_orthonormal_roundtrip_and_parseval_equality(frame):
    for _ in range(20):
        x = RNG.standard_normal(frame.ambient_dim) + 1j * RNG.standard_normal(frame.ambient_dim)
        coeffs = frame.analyze(x)
        assert np.allclose(frame.synthesize(coeffs), x, rtol=0, atol=1e-10 * np.linalg.norm(x))
        assert abs(np.linalg.norm(coeffs) - np.linalg.norm(x)) <= 1e-10 * np.linalg.norm(x)


@pytest.mark.parametrize("frame", builtin_frames(), ids=lambda f: f.kind)
def test_structured_matches_dense(frame):
    A = frame.dense()
    c = RNG.standard_normal(frame.num_atoms) + 1j * RNG.standard_normal(frame.num_atoms)
    x = RNG.standard_normal(frame.ambient_dim) + 1j * RNG.standard_normal(frame.ambient_dim)
    assert np.allclose(frame.synthesize(c), A @ c, rtol=1e-12, atol=1e-12)
    assert np.allclose(frame.analyze(x), A.conj().T @ x, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("frame", builtin_frames(), ids=lambda f: f.kind)
def test_builtin_atoms_unit_norm(frame):
    norms = np.linalg.norm(frame.dense(), axis=0)
    assert np.max(np.abs(norms - 1.0)) <= 1e-12


def test_length_mismatch_errors():
    f = ms.make_frame("fourier", 8)
    with pytest.raises(ValueError):
        f.synthesize(np.ones(5))
    with pytest.raises(ValueError):
        f.analyze(np.ones(5))


def test_is_parseval_fourier():
    check = ms.is_parseval(ms.make_frame("fourier", 8))
    assert check.ok and check.max_defect < 1e-12


def test_is_parseval_union_of_bases():
    # two orthonormal bases scaled by 1/sqrt(2) form a Parseval frame
    q1, _ = np.linalg.qr(RNG.standard_normal((8, 8)))
    q2, _ = np.linalg.qr(RNG.standard_normal((8, 8)))
    A = np.hstack([q1, q2]) / np.sqrt(2)
    assert np.allclose(A @ A.conj().T, np.eye(8), atol=1e-12)
    assert ms.is_parseval(ms.make_frame("matrix", matrix=A))


def test_is_parseval_detects_defect():
    q, _ = np.linalg.qr(RNG.standard_normal((8, 8)))
    q = q.copy()
    q[:, 3] = 0.0
    assert not ms.is_parseval(ms.make_frame("matrix", matrix=q))


def test_is_parseval_rejects_bad_probe_count():
    with pytest.raises(ValueError):
        ms.is_parseval(ms.make_frame("dirac", 4), num_probes=0)


def test_concat_dictionary_shapes_and_split():
    d = ms.ConcatDictionary(ms.make_frame("fourier", 8), ms.make_frame("dirac", 8))
    assert d.num_atoms == 16 and d.block_split == 8
    c = RNG.standard_normal(16) + 1j * RNG.standard_normal(16)
    c1, c2 = d.split_coeffs(c)
    assert np.allclose(d.synthesize(c), d.first.synthesize(c1) + d.second.synthesize(c2))
    x = RNG.standard_normal(8) + 1j * RNG.standard_normal(8)
    stacked = d.analyze(x)
    assert np.allclose(stacked[:8], d.first.analyze(x))
    assert np.allclose(stacked[8:], d.second.analyze(x))


def test_concat_dictionary_dimension_mismatch():
    with pytest.raises(ValueError):
        ms.ConcatDictionary(ms.make_frame("dirac", 8), ms.make_frame("dirac", 4))


def test_coefficient_vector_support_and_norms():
    values = np.array([1.0, 0.0, 1e-12, -2.0j, 3e-9])
    cv = ms.CoefficientVector(values, block_split=2)
    assert list(cv.support()) == [0, 3]
    assert cv.l0_count() == 2
    assert np.isclose(cv.l1_norm, np.abs(values).sum())
    assert list(cv.support(zero_threshold=1e-13)) == [0, 2, 3, 4]
    assert cv.block1.size == 2 and cv.block2.size == 3


def test_coefficient_vector_blocks_require_split():
    cv = ms.CoefficientVector(np.ones(3))
    with pytest.raises(ValueError):
        _ = cv.block1


def test_default_zero_threshold_scales_with_peak():
    assert np.isclose(ms.default_zero_threshold(np.array([0.5])), 1e-8)
    assert np.isclose(ms.default_zero_threshold(np.array([100.0])), 1e-6)
