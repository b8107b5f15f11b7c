import numpy as np
import pytest

from rtns.errors import DegenerateSampleError, InvalidParameterError
from rtns.expander import (
    Channel,
    expander_report,
    fixed_point,
    iterate_channel,
    normalize_channel,
    sigma,
    two_two_distance,
    vec_to_matrix,
)
from rtns.sampling import MpsTensor, SeedSpec, sample_mps_tensor, sample_peps_tensor
from rtns.spectral import eigs_by_modulus
from rtns.transfer import mps_transfer, peps_transfer


def depolarizing_channel(D):
    # Kraus set {|i><j| / sqrt(D)}: X -> Tr(X) Id / D, exactly TP
    kraus = np.zeros((D * D, D, D), dtype=np.complex128)
    for i in range(D):
        for j in range(D):
            kraus[i * D + j, i, j] = 1.0 / np.sqrt(D)
    return Channel(D=D, kraus=kraus, tp_residual=0.0, kraus_rank=D * D, variant="tp")


def test_sigma_entry_oracle():
    t = sample_mps_tensor(SeedSpec(51, 0, "sg"), 3, 2)
    T = mps_transfer(t)
    chi = t.entries
    expected = sum(chi[x].conj().T @ chi[x] for x in range(3))
    S = sigma(T)
    assert np.allclose(S, expected, atol=1e-13)
    assert np.allclose(S, S.conj().T)
    assert np.linalg.eigvalsh(S)[0] > 0


def test_tp_variant_is_trace_preserving():
    t = sample_mps_tensor(SeedSpec(51, 1, "tp"), 5, 3)
    ch = normalize_channel(mps_transfer(t), variant="tp")
    assert ch.tp_residual < 1e-12
    rng = np.random.default_rng(0)
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.trace(ch.apply(X)) == pytest.approx(np.trace(X), abs=1e-12)
    assert ch.kraus_rank == 5


def test_variants_are_isospectral():
    t = sample_mps_tensor(SeedSpec(51, 2, "iso"), 4, 3)
    T = mps_transfer(t)
    a = eigs_by_modulus(normalize_channel(T, "tp").matrix())
    b = eigs_by_modulus(normalize_channel(T, "literal").matrix())
    dist = np.abs(a[:, None] - b[None, :])
    assert np.max(np.min(dist, axis=1)) < 1e-10


def test_normalize_channel_validation():
    t = sample_mps_tensor(SeedSpec(51, 3, "vl"), 3, 2)
    T = mps_transfer(t)
    with pytest.raises(InvalidParameterError):
        normalize_channel(T, variant="middle")
    Tp = peps_transfer(sample_peps_tensor(SeedSpec(51, 4, "vl"), 2, 2), 2)
    with pytest.raises(InvalidParameterError):
        normalize_channel(Tp)


def test_singular_sigma_rejected():
    # single Kraus slice of rank 1 makes Sigma singular
    entries = np.zeros((1, 2, 2), dtype=np.complex128)
    entries[0, 0, 0] = 1.0
    T = mps_transfer(MpsTensor(d=1, D=2, entries=entries))
    with pytest.raises(DegenerateSampleError):
        normalize_channel(T)


def test_vec_to_matrix_row_major():
    phi = np.arange(4, dtype=np.complex128)
    M = vec_to_matrix(phi)
    assert np.array_equal(M, [[0, 1], [2, 3]])
    assert np.linalg.norm(vec_to_matrix(np.ones(9) / 3.0), "fro") == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        vec_to_matrix(np.ones(5))


def test_fixed_point_of_depolarizing_channel():
    ch = depolarizing_channel(3)
    fp = fixed_point(ch)
    assert np.allclose(fp.rho, np.eye(3) / 3.0, atol=1e-12)
    assert fp.purity == pytest.approx(1.0 / 3.0)
    assert fp.entropy_lower_bound == pytest.approx(np.log(3.0))
    assert fp.residual <= 1e-12


def test_fixed_point_matches_dominant_eigenvector():
    t = sample_mps_tensor(SeedSpec(52, 0, "fp"), 40, 3)
    ch = normalize_channel(mps_transfer(t), "tp")
    fp = fixed_point(ch)
    assert np.allclose(fp.rho, fp.rho.conj().T)
    assert np.trace(fp.rho).real == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.eigvalsh(fp.rho)[0] > -1e-12
    M = ch.matrix()
    vals, vecs = np.linalg.eig(M)
    top = vecs[:, np.argmax(np.abs(vals))]
    rho_eig = vec_to_matrix(top)
    rho_eig /= np.trace(rho_eig)
    assert np.allclose(fp.rho, rho_eig, atol=1e-8)


def test_expander_report_depolarizing():
    ch = depolarizing_channel(4)
    fp = fixed_point(ch)
    m_lower, k, eps = expander_report(ch, fp)
    assert m_lower == pytest.approx(4.0)
    assert k == 16
    assert eps == pytest.approx(0.0, abs=1e-12)


def test_expander_report_random_instance():
    t = sample_mps_tensor(SeedSpec(52, 1, "rp"), 30, 3)
    ch = normalize_channel(mps_transfer(t), "tp")
    fp = fixed_point(ch)
    m_lower, k, eps = expander_report(ch, fp)
    assert k == 30
    assert 0.0 < eps < 1.0
    assert 1.0 <= m_lower <= 9.0  # 1/purity lies in [1, D^2]


def test_iterate_channel_converges_to_fixed_point():
    t = sample_mps_tensor(SeedSpec(52, 2, "it"), 40, 3)
    ch = normalize_channel(mps_transfer(t), "tp")
    fp = fixed_point(ch)
    rho0 = np.zeros((3, 3), dtype=np.complex128)
    rho0[0, 0] = 1.0
    traj, dists = iterate_channel(ch, rho0, 30, fp)
    assert len(traj) == 31 and len(dists) == 31
    assert dists[-1] < 1e-6
    assert dists[-1] <= dists[0]
    with pytest.raises(InvalidParameterError):
        iterate_channel(ch, np.eye(2), 3, fp)


def test_two_two_distance_small_for_large_d():
    t = sample_mps_tensor(SeedSpec(52, 3, "tt"), 200, 2)
    T = mps_transfer(t)
    ch = normalize_channel(T, "tp")
    dist = two_two_distance(T, ch)
    assert dist < 0.5  # O(1/sqrt(d)) at d = 200
