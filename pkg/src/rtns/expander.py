"""Quantum expanders from trace-normalized random MPS transfer operators.

The raw transfer CP map is not trace preserving; dividing out Sigma =
(1/d) sum_x G_x* G_x fixes that. Two placements of Sigma^{-1/2} are provided:

* "tp": K^_x = G_x Sigma^{-1/2} / sqrt(d), exactly trace preserving;
* "literal": K^_x = Sigma^{-1/2} G_x / sqrt(d), i.e. X -> Sigma^{-1/2}
  T(X) Sigma^{-1/2}.

The two maps are S o T and T o S for S(X) = Sigma^{-1/2} X Sigma^{-1/2} and
hence have the same spectrum; only "tp" has tp_residual ~ 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import DegenerateSampleError, InvalidParameterError, NumericalFailureError
from .spectral import _power_iteration, hermitize, operator_norm, realign, upper_gap
from .transfer import TransferOperator

__all__ = [
    "Channel",
    "FixedPoint",
    "sigma",
    "normalize_channel",
    "vec_to_matrix",
    "fixed_point",
    "expander_report",
    "iterate_channel",
    "two_two_distance",
]

SIGMA_FLOOR = 1e-12
KRAUS_ZERO_TOL = 1e-14


@dataclass(frozen=True)
class Channel:
    D: int
    kraus: np.ndarray  # (count, D, D)
    tp_residual: float
    kraus_rank: int
    variant: str  # "tp" or "literal"

    def apply(self, X: np.ndarray) -> np.ndarray:
        if X.shape != (self.D, self.D):
            raise InvalidParameterError(f"X has shape {X.shape}, expected ({self.D}, {self.D})")
        D = self.D
        K = self.kraus
        W = (K.reshape(-1, D) @ X).reshape(-1, D, D)  # K_x X, stacked
        # sum_x (K_x X) K_x*: one gemm over the combined (x, column) index
        left = W.transpose(1, 0, 2).reshape(D, -1)
        right = K.conj().transpose(0, 2, 1).reshape(-1, D)
        return left @ right

    def matrix(self) -> np.ndarray:
        n = self.D
        F = self.kraus.reshape(-1, n * n)
        return realign(F.T @ F.conj(), n, n)


@dataclass(frozen=True)
class FixedPoint:
    rho: np.ndarray
    purity: float
    entropy_lower_bound: float
    iterations: int
    residual: float


def sigma(T: TransferOperator) -> np.ndarray:
    """Sigma = prefactor * sum_x K_x* K_x = (1/d) sum_x G_x* G_x for MPS."""
    K = T.kraus
    S = T.prefactor * np.einsum("xji,xjk->ik", K.conj(), K, optimize=True)
    return hermitize(S)


def normalize_channel(T: TransferOperator, variant: str = "tp") -> Channel:
    """Trace-normalized channel from an MPS transfer operator."""
    if T.kind != "mps":
        raise InvalidParameterError("channel normalization is defined for MPS transfer operators")
    if variant not in ("tp", "literal"):
        raise InvalidParameterError(f"unknown variant {variant!r}")
    S = sigma(T)
    vals, vecs = sla.eigh(S)
    if vals[0] <= SIGMA_FLOOR * vals[-1]:
        raise DegenerateSampleError(
            f"Sigma is numerically singular: lambda_min/lambda_max = {vals[0] / vals[-1]:.3e}"
        )
    inv_half = (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T
    # stored Kraus are G_x = sqrt(d) * slices
    d = T.kraus.shape[0]
    G_over_sqrt_d = T.kraus / np.sqrt(d)
    if variant == "tp":
        khat = G_over_sqrt_d @ inv_half
    else:
        khat = np.einsum("ij,xjk->xik", inv_half, G_over_sqrt_d)
    gram = np.einsum("xji,xjk->ik", khat.conj(), khat, optimize=True)
    tp_residual = operator_norm(gram - np.eye(T.D))
    norms = np.sqrt(np.einsum("xij,xij->x", khat, khat.conj()).real)
    rank = int(np.sum(norms > KRAUS_ZERO_TOL * max(norms.max(), 1e-300)))
    return Channel(D=T.D, kraus=khat, tp_residual=float(tp_residual), kraus_rank=rank, variant=variant)


def vec_to_matrix(phi: np.ndarray) -> np.ndarray:
    """Row-major unvectorization; unit vectors map to unit Hilbert-Schmidt norm."""
    phi = np.asarray(phi).ravel()
    D = int(round(np.sqrt(phi.size)))
    if D * D != phi.size:
        raise InvalidParameterError(f"vector length {phi.size} is not a perfect square")
    return phi.reshape(D, D)


def fixed_point(channel: Channel, tol: float = 1e-12, max_iter: int = 10_000) -> FixedPoint:
    """Fixed state by iterating the channel from Id/D with per-step
    Hermitization and trace renormalization."""
    D = channel.D
    rho = np.eye(D, dtype=np.complex128) / D
    residual = np.inf
    for it in range(1, max_iter + 1):
        new = channel.apply(rho)
        new = 0.5 * (new + new.conj().T)
        new /= np.trace(new).real
        residual = float(np.linalg.norm(channel.apply(new) - new))
        rho = new
        if residual <= tol:
            purity = float(np.real(np.trace(rho @ rho)))
            return FixedPoint(
                rho=rho,
                purity=purity,
                entropy_lower_bound=float(-np.log(purity)),
                iterations=it,
                residual=residual,
            )
    raise NumericalFailureError(
        f"fixed point iteration did not converge in {max_iter} steps", residual=residual
    )


def expander_report(channel: Channel, fp: FixedPoint) -> tuple[float, int, float]:
    """(m_lower, k, eps): entropy proxy 1/purity, Kraus rank, |lambda_2|."""
    M = channel.matrix()
    # the dense eigensolver gets slow well before the dense cutoff; the
    # channel spectrum is cleanly separated so the deflated power/Krylov
    # route is reliable here
    method = "iterative" if M.shape[0] > 256 else "auto"
    summary = upper_gap(M, method=method)
    return 1.0 / fp.purity, channel.kraus_rank, float(summary.lambda2_modulus)


def iterate_channel(channel: Channel, rho0: np.ndarray, t: int, fp: FixedPoint):
    """Trajectory [rho0, T^(rho0), ..., T^t(rho0)] with HS distances to the
    fixed point; the trace must stay 1 along the way."""
    rho = np.asarray(rho0, dtype=np.complex128)
    if rho.shape != (channel.D, channel.D):
        raise InvalidParameterError(f"rho0 has shape {rho.shape}, expected ({channel.D}, {channel.D})")
    trajectory = [rho]
    distances = [float(np.linalg.norm(rho - fp.rho))]
    for _ in range(t):
        rho = channel.apply(rho)
        tr = np.trace(rho)
        if abs(tr - 1.0) > 1e-10:
            raise NumericalFailureError(
                f"trace drifted to {tr} during channel iteration", residual=abs(tr - 1.0)
            )
        trajectory.append(rho)
        distances.append(float(np.linalg.norm(rho - fp.rho)))
    return trajectory, distances


def two_two_distance(T: TransferOperator, channel: Channel) -> float:
    """||T^ - T/lambda_1||_{2->2} through the matrix forms."""
    M = T.matrix()
    n = M.shape[0]
    if n <= 512:
        lam1 = upper_gap(M).lambda1
        return operator_norm(channel.matrix() - M / lam1)
    # only lambda_1 and one extreme singular value are needed
    lam1, _, _ = _power_iteration(M, 1e-12)
    diff = channel.matrix() - M / lam1
    try:
        sv = spla.svds(diff, k=1, return_singular_vectors=False)
        return float(sv[0])
    except spla.ArpackError:
        return operator_norm(diff)
