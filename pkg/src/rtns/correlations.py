"""Connected two-point correlation functions of random tensor network states.

Two independent computation paths are provided: direct contraction of the
explicit state vector, and bond-space trace formulas through the transfer
operator. They must agree; the acceptance suite checks this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from .errors import (
    DegenerateSampleError,
    InvalidParameterError,
    NumericalFailureError,
)
from .sampling import SeedSpec, sample_complex_gaussian_matrix
from .spectral import operator_norm
from .states import StateVector
from .transfer import TransferOperator

__all__ = [
    "CorrelationProfile",
    "CorollaryBound",
    "correlation_direct",
    "boundary_operator",
    "correlation_transfer",
    "correlation_profile",
    "correlation_length_fit",
    "corollary_bound",
    "observable_family",
]

GAMMA_FLOOR_FACTOR = 1e-12
DENSE_OBSERVABLE_LIMIT = 512
RANDOM_BLOCK_SIZE = 16


@dataclass(frozen=True)
class CorrelationProfile:
    separations: tuple[int, ...]
    values: tuple[float, ...]
    fit_rate: float
    fit_length: float
    fit_window: tuple[int, int]
    residual: float


@dataclass(frozen=True)
class CorollaryBound:
    value: float
    applicable: bool


def _apply_on_sites(amps: np.ndarray, d: int, sites: int, op: np.ndarray, support) -> np.ndarray:
    support = tuple(support)
    m = len(support)
    if op.shape != (d**m, d**m):
        raise InvalidParameterError(f"operator shape {op.shape} does not match support {support}")
    tensor = amps.reshape((d,) * sites)
    moved = np.moveaxis(tensor, support, range(m)).reshape(d**m, -1)
    moved = op @ moved
    return np.moveaxis(moved.reshape((d,) * sites), range(m), support).reshape(-1)


def correlation_direct(state: StateVector, A: np.ndarray, Ap: np.ndarray, R, Rp) -> float:
    """|<A A'>/<1> - <A><A'>/<1>^2| on the (unnormalized) explicit state."""
    R, Rp = tuple(R), tuple(Rp)
    if set(R) & set(Rp):
        raise InvalidParameterError(f"supports overlap: {R} and {Rp}")
    sites = state.N if state.kind == "mps" else state.N * state.N
    amps = state.amplitudes
    norm2 = np.vdot(amps, amps)
    if abs(norm2) < 1e-30:
        raise DegenerateSampleError("state has (numerically) zero norm")
    vA = _apply_on_sites(amps, state.d, sites, A, R)
    vAp = _apply_on_sites(amps, state.d, sites, Ap, Rp)
    vAAp = _apply_on_sites(vA, state.d, sites, Ap, Rp)
    joint = np.vdot(amps, vAAp) / norm2
    single = (np.vdot(amps, vA) / norm2) * (np.vdot(amps, vAp) / norm2)
    return float(abs(joint - single))


def boundary_operator(T: TransferOperator, A) -> np.ndarray:
    """Bond-space representative of a one-column observable.

    A~ = prefactor * sum_{x,y} A[y,x] K_x (x) conj(K_y), which satisfies the
    trace identity <chi^N| A (x) Id |chi^N> = Tr(A~ T^{N-1}) and reduces to
    the transfer matrix itself when A = Id. Sparse A is supported (used for
    shift/clock and block observables at large physical dimension).
    """
    n = T.bond_dim
    K = T.kraus
    count = K.shape[0]
    if A.shape != (count, count):
        raise InvalidParameterError(f"A has shape {A.shape}, expected ({count}, {count})")
    flat = K.reshape(count, n * n)
    C = (A @ flat).reshape(count, n, n) if not sps.issparse(A) else np.asarray(
        A.dot(flat)
    ).reshape(count, n, n)
    out = np.einsum("yij,ykl->ikjl", C, K.conj(), optimize=True).reshape(n * n, n * n)
    return T.prefactor * out


def correlation_transfer(
    T: TransferOperator, Atilde: np.ndarray, Atilde_p: np.ndarray, k: int, N: int
) -> float:
    """Connected correlation at k intermediate bond steps on a length-N ring."""
    if not 0 <= k <= N - 2:
        raise InvalidParameterError(f"need 0 <= k <= N-2, got k={k}, N={N}")
    M = T.matrix()
    Mk = np.linalg.matrix_power(M, k)
    Mrest = np.linalg.matrix_power(M, N - k - 2)
    MN1 = np.linalg.matrix_power(M, N - 1)
    trN = np.trace(M @ MN1)
    if abs(trN) < 1e-30:
        raise DegenerateSampleError(f"Tr(T^{N}) is numerically zero: {trN}")
    joint = np.trace(Atilde @ Mk @ Atilde_p @ Mrest) / trN
    single = np.trace(Atilde @ MN1) * np.trace(Atilde_p @ MN1) / trN**2
    return float(abs(joint - single))


def correlation_length_fit(
    separations, values, floor: float | None = None
) -> tuple[float, float, float, tuple[int, int]]:
    """Least-squares decay rate of log gamma(k) vs k.

    Returns (tau_decay, xi, residual, window). The window runs from k=1 to
    the largest k with gamma(k) above the relative floor.
    """
    separations = np.asarray(list(separations))
    values = np.asarray(list(values), dtype=float)
    if separations.shape != values.shape or separations.size == 0:
        raise InvalidParameterError("separations and values must be equal-length and nonempty")
    gamma0 = values[separations == separations.min()][0]
    if floor is None:
        floor = GAMMA_FLOOR_FACTOR * max(gamma0, 1e-300)
    mask = (separations >= 1) & (values > floor)
    if np.count_nonzero(mask) < 3:
        raise NumericalFailureError("fewer than 3 usable points for the correlation fit")
    ks = separations[mask].astype(float)
    logs = np.log(values[mask])
    coeffs, res, *_ = np.polyfit(ks, logs, 1, full=True)
    slope = float(coeffs[0])
    tau = -slope
    xi = 1.0 / tau if tau > 0 else np.inf
    residual = float(np.sqrt(res[0] / ks.size)) if len(res) else 0.0
    window = (int(separations[mask].min()), int(separations[mask].max()))
    return tau, xi, residual, window


def correlation_profile(
    T: TransferOperator, Atilde: np.ndarray, Atilde_p: np.ndarray, N: int
) -> CorrelationProfile:
    """gamma(k) for k = 0..N-2 plus the fitted decay rate."""
    ks = tuple(range(N - 1))
    values = tuple(correlation_transfer(T, Atilde, Atilde_p, k, N) for k in ks)
    try:
        tau, xi, residual, window = correlation_length_fit(ks, values)
    except NumericalFailureError:
        tau, xi, residual, window = 0.0, np.inf, np.inf, (0, 0)
    return CorrelationProfile(
        separations=ks,
        values=values,
        fit_rate=tau,
        fit_length=xi,
        fit_window=window,
        residual=residual,
    )


def corollary_bound(
    lambda_modulus: float,
    eps: float,
    k: int,
    k_prime: int,
    normA: float,
    normAp: float,
    n: int,
) -> CorollaryBound:
    """Correlation upper bound 10 eps^k ||A|| ||A'|| / (lambda^2 (1 - eps^k)^2).

    Applicability requires k <= k' and log(n)/log(1/eps) - 2 <= k'.
    """
    if not 0.0 < eps < 1.0:
        raise InvalidParameterError(f"eps must lie in (0,1), got {eps}")
    if lambda_modulus <= 0:
        raise InvalidParameterError(f"lambda modulus must be positive, got {lambda_modulus}")
    value = (
        10.0 / (lambda_modulus**2 * (1.0 - eps**k) ** 2) * eps**k * normA * normAp
        if k >= 1
        else np.inf
    )
    applicable = k <= k_prime and (np.log(n) / np.log(1.0 / eps) - 2.0) <= k_prime
    return CorollaryBound(value=float(value), applicable=bool(applicable))


def _unit_norm(A: np.ndarray) -> np.ndarray:
    nrm = operator_norm(A)
    return A / nrm if nrm > 0 else A


def observable_family(d: int, seed: SeedSpec, random_count: int = 10):
    """Probe observables: Hermitian parts of the shift and clock matrices plus
    unit-norm random Hermitians.

    Above DENSE_OBSERVABLE_LIMIT the shift/clock parts are returned sparse and
    the random Hermitians act on a random coordinate block, keeping the
    boundary-operator contraction linear in d.
    """
    out = []
    if d <= DENSE_OBSERVABLE_LIMIT:
        shift = np.roll(np.eye(d), 1, axis=0)
        clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
        out.append(("shift_h", _unit_norm(0.5 * (shift + shift.conj().T))))
        out.append(("clock_h", _unit_norm(0.5 * (clock + clock.conj().T))))
        for i in range(random_count):
            G = sample_complex_gaussian_matrix(seed.child(f"obs/{i}"), d, d, 1.0)
            out.append((f"random_{i}", _unit_norm(0.5 * (G + G.conj().T))))
        return out
    shift = sps.eye(d, k=1, format="csr") + sps.eye(d, k=-1, format="csr")
    shift = shift + sps.csr_matrix(([1.0, 1.0], ([0, d - 1], [d - 1, 0])), shape=(d, d))
    out.append(("shift_h", 0.5 * shift))  # circulant, eigenvalues cos(2 pi j / d), norm 1
    out.append(("clock_h", sps.diags(np.cos(2 * np.pi * np.arange(d) / d), format="csr")))
    m = RANDOM_BLOCK_SIZE
    for i in range(random_count):
        child = seed.child(f"obs/{i}")
        rng = child.generator()
        support = np.sort(rng.choice(d, size=m, replace=False))
        G = sample_complex_gaussian_matrix(child.child("entries"), m, m, 1.0)
        H = _unit_norm(0.5 * (G + G.conj().T))
        rows = np.repeat(support, m)
        cols = np.tile(support, m)
        out.append((f"random_{i}", sps.csr_matrix((H.reshape(-1), (rows, cols)), shape=(d, d))))
    return out
