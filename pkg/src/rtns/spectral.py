"""Spectral primitives used across the library.

Conventions fixed here once and for all:

* eigenvalues are ordered by decreasing modulus, ties broken by decreasing
  real part, then decreasing imaginary part;
* the upper spectral gap of a square matrix is ``|lambda_1| - |lambda_2|``
  (for 1x1 matrices ``lambda_2 := 0``, so the gap is ``|lambda_1|``);
* near-Hermitian matrices are symmetrized as ``(A + A*)/2`` but rejected when
  the anti-Hermitian part exceeds ``1e-8 * ||A||``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import InvalidParameterError, NumericalFailureError

__all__ = [
    "SpectralSummary",
    "GapCertificate",
    "eigs_by_modulus",
    "upper_gap",
    "singular_values",
    "operator_norm",
    "realign",
    "max_entangled",
    "lowest_eigs_hermitian",
    "gap_certificate",
    "hermitize",
]

DENSE_DIM_LIMIT = 4096  # dense eigendecomposition below, iterative above
DEFAULT_DENSE_TOL = 1e-10
DEFAULT_ITERATIVE_TOL = 1e-8
HERMITICITY_RTOL = 1e-8


@dataclass(frozen=True)
class SpectralSummary:
    lambda1: complex
    lambda2_modulus: float
    gap: float
    s1: float
    s2: float
    method: str  # "dense" or "iterative"
    residual: float

    def __post_init__(self):
        if abs(self.gap - (abs(self.lambda1) - self.lambda2_modulus)) > 1e-12 * max(1.0, abs(self.lambda1)):
            raise InvalidParameterError("gap must equal |lambda1| - |lambda2|")


@dataclass(frozen=True)
class GapCertificate:
    delta: float
    epsilon: float
    eta: float
    bound: float
    applicable: bool


def eigs_by_modulus(M: np.ndarray) -> np.ndarray:
    """All eigenvalues, sorted by (modulus desc, real desc, imag desc)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M.view(np.float64) if M.dtype == np.complex128 else M)):
        raise InvalidParameterError("matrix entries must be finite")
    vals = np.linalg.eigvals(M)
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    return vals[order]


def singular_values(M: np.ndarray) -> np.ndarray:
    """Descending singular values."""
    M = np.asarray(M)
    try:
        return sla.svdvals(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise NumericalFailureError(f"SVD did not converge: {exc}") from exc


def operator_norm(M: np.ndarray) -> float:
    """Largest singular value (the infinity->infinity Schatten-infinity norm)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(singular_values(M)[0])


def realign(M: np.ndarray, n: int, m: int) -> np.ndarray:
    """Index reshuffle R(M)_{ij,kl} = M_{ik,jl} mapping nm x nm to n^2 x m^2."""
    M = np.asarray(M)
    if M.shape != (n * m, n * m):
        raise InvalidParameterError(f"expected shape {(n * m, n * m)}, got {M.shape}")
    return M.reshape(n, m, n, m).transpose(0, 2, 1, 3).reshape(n * n, m * m)


def max_entangled(D: int) -> np.ndarray:
    """(1/sqrt(D)) sum_a |aa>, as a vector of length D^2."""
    if D < 1:
        raise InvalidParameterError(f"D must be positive, got {D}")
    psi = np.zeros(D * D, dtype=np.complex128)
    psi[:: D + 1] = 1.0 / np.sqrt(D)
    return psi


def hermitize(A: np.ndarray, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    """(A + A*)/2, rejecting matrices that are not numerically Hermitian."""
    A = np.asarray(A)
    scale = operator_norm(A)
    skew = operator_norm(A - A.conj().T)
    if scale > 0 and skew > rtol * scale:
        raise NumericalFailureError(
            f"matrix is not numerically Hermitian: ||A - A*|| = {skew:.3e} > {rtol:.1e} * ||A||",
            residual=skew,
        )
    return 0.5 * (A + A.conj().T)


def _power_iteration(M: np.ndarray, tol: float, max_iter: int = 20000) -> tuple[complex, np.ndarray, float]:
    n = M.shape[0]
    rng = np.random.default_rng(171717)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0 + 0.0j
    for _ in range(max_iter):
        w = M @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0, v, 0.0
        w /= norm_w
        lam_new = np.vdot(w, M @ w)
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            v = w
            lam = lam_new
            break
        v, lam = w, lam_new
    residual = float(np.linalg.norm(M @ v - lam * v))
    return complex(lam), v, residual


def upper_gap(M: np.ndarray, method: str = "auto", tol: float | None = None) -> SpectralSummary:
    """Spectral summary with the upper gap |lambda_1| - |lambda_2|."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if method == "auto":
        method = "dense" if n <= DENSE_DIM_LIMIT else "iterative"
    if method not in ("dense", "iterative"):
        raise InvalidParameterError(f"unknown method {method!r}")

    if n == 1:
        lam1 = complex(M[0, 0])
        return SpectralSummary(lam1, 0.0, abs(lam1), float(abs(lam1)), 0.0, "dense", 0.0)

    if method == "dense" or n <= 512:
        sv = singular_values(M)
        s1, s2 = float(sv[0]), float(sv[1])
    else:
        # a full SVD is what the iterative mode is trying to avoid
        try:
            sv = np.sort(spla.svds(M, k=2, return_singular_vectors=False))[::-1]
            s1, s2 = float(sv[0]), float(sv[1])
        except spla.ArpackError:
            sv = singular_values(M)
            s1, s2 = float(sv[0]), float(sv[1])

    if method == "dense":
        vals = eigs_by_modulus(M)
        lam1 = complex(vals[0])
        lam2_mod = float(abs(vals[1]))
        return SpectralSummary(lam1, lam2_mod, abs(lam1) - lam2_mod, s1, s2, "dense", 0.0)

    tol = DEFAULT_ITERATIVE_TOL if tol is None else tol
    lam1, v1, residual = _power_iteration(M, tol)
    if abs(lam1) == 0.0:
        return SpectralSummary(0.0, 0.0, 0.0, s1, s2, "iterative", residual)
    # Deflate the computed dominant right eigenvector and take the dominant
    # eigenvalue of M (Id - v1 v1*) via restarted Krylov iteration.
    proj_v = v1

    def deflated_mv(x):
        return M @ (x - proj_v * np.vdot(proj_v, x))

    op = spla.LinearOperator((n, n), matvec=deflated_mv, dtype=np.complex128)
    try:
        vals = spla.eigs(op, k=1, which="LM", return_eigenvectors=False, tol=tol, maxiter=5000)
        lam2_mod = float(abs(vals[0]))
    except spla.ArpackNoConvergence as exc:
        raise NumericalFailureError("deflated Krylov iteration did not converge", residual=residual) from exc
    return SpectralSummary(complex(lam1), lam2_mod, abs(lam1) - lam2_mod, s1, s2, "iterative", residual)


def _dense_from_apply(apply, dim: int) -> np.ndarray:
    cols = np.empty((dim, dim), dtype=np.complex128)
    basis = np.eye(dim, dtype=np.complex128)
    for j in range(dim):
        cols[:, j] = apply(basis[:, j])
    return cols


def lowest_eigs_hermitian(
    apply,
    dim: int,
    count: int,
    tol: float = DEFAULT_ITERATIVE_TOL,
    max_basis: int | None = None,
    max_restarts: int = 60,
    value_tol: float | None = None,
) -> np.ndarray:
    """The `count` smallest eigenvalues of a Hermitian operator given matrix-free.

    Thick-restart Lanczos (Rayleigh-Ritz on an explicitly re-orthogonalized
    basis). By default each returned eigenvalue carries an explicitly verified
    residual ``||H v - lambda v|| <= tol * max(1, |lambda|)``. With
    ``value_tol`` set, convergence is instead declared when the Ritz values
    plateau; this is the right mode for clustered spectra, where eigenvectors
    (and hence residuals) are not resolvable but the extreme values are.
    """
    if count < 1 or count > dim:
        raise InvalidParameterError(f"count must be in [1, dim], got count={count}, dim={dim}")
    if dim <= max(64, count + 2):
        H = hermitize(_dense_from_apply(apply, dim))
        return np.sort(sla.eigvalsh(H))[:count]

    if max_basis is None:
        max_basis = min(dim, 320 if value_tol is not None else max(48, 8 * count + 24))
    keep = max(count + 3, min(10, max_basis - 8))
    rng = np.random.default_rng(24601)
    Q = np.empty((dim, max_basis), dtype=np.complex128)
    S = np.zeros((max_basis, max_basis), dtype=np.complex128)  # projected Q* H Q
    m = 0

    def orthonormalize(v):
        for _ in range(2):
            if m:
                v = v - Q[:, :m] @ (Q[:, :m].conj().T @ v)
        norm = np.linalg.norm(v)
        return v / norm if norm > 1e-10 else None

    def random_start():
        for _ in range(5):
            v = orthonormalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
            if v is not None:
                return v
        raise NumericalFailureError("could not generate a new orthogonal start vector")

    def add_vector(v):
        nonlocal m
        Q[:, m] = v
        w = apply(v)
        col = Q[:, : m + 1].conj().T @ w
        S[: m + 1, m] = col
        S[m, : m + 1] = col.conj()
        S[m, m] = col[m].real
        m += 1
        return w

    w = add_vector(random_start())
    best_residual = np.inf
    prev_vals = None
    stable = 0
    for _restart in range(max_restarts):
        while m < max_basis:
            v = orthonormalize(w)
            if v is None:
                v = random_start()
            w = add_vector(v)
            if value_tol is not None and m >= count + 2:
                cur = np.sort(sla.eigvalsh(0.5 * (S[:m, :m] + S[:m, :m].conj().T)))[:count]
                if prev_vals is not None and np.max(np.abs(cur - prev_vals)) <= value_tol:
                    stable += 1
                    if stable >= 3:
                        return np.asarray(cur, dtype=float)
                else:
                    stable = 0
                prev_vals = cur
        theta, C = sla.eigh(0.5 * (S[:m, :m] + S[:m, :m].conj().T))
        if value_tol is None:
            ritz = Q[:, :m] @ C[:, :count]
            residuals = []
            pending = None
            for i in range(count):
                hy = apply(ritz[:, i])
                res = float(np.linalg.norm(hy - theta[i] * ritz[:, i]))
                residuals.append(res)
                if pending is None and res > tol * max(1.0, abs(theta[i])):
                    pending = hy - theta[i] * ritz[:, i]
            best_residual = min(best_residual, max(residuals))
            if pending is None:
                return np.asarray(theta[:count], dtype=float)
        else:
            pending = w  # continue the Krylov recurrence through the restart
        if value_tol is not None:
            pending = orthonormalize(pending)
        # Thick restart: compress to the lowest Ritz vectors.
        kk = min(keep, m - 1)
        compressed = Q[:, :m] @ C[:, :kk]
        Q[:, :kk] = compressed
        S[:, :] = 0.0
        S[:kk, :kk] = np.diag(theta[:kk])
        m = kk
        if value_tol is None:
            pending = orthonormalize(pending) if pending is not None else None
        if pending is None:
            pending = random_start()
        w = add_vector(pending)
    raise NumericalFailureError(
        f"Lanczos did not converge within {max_restarts} restarts", residual=best_residual
    )


def gap_certificate(M: np.ndarray, cp_identity_image: np.ndarray, phi: np.ndarray) -> GapCertificate:
    """Certified lower bound on the upper spectral gap.

    delta measures how far the CP map's image of the identity is from the
    identity, epsilon the excess of |<phi|M|phi>| over 1, eta the two deflated
    norms; when all three are below 1/5 the bound 1 - 2 delta - epsilon - 2 eta
    is a valid lower bound on Delta(M).
    """
    M = np.asarray(M, dtype=np.complex128)
    phi = np.asarray(phi, dtype=np.complex128).ravel()
    n = M.shape[0]
    if M.shape != (n, n) or phi.shape != (n,) or cp_identity_image.shape[0] ** 2 != n:
        raise InvalidParameterError(
            f"dimension mismatch: M {M.shape}, cp_identity_image {cp_identity_image.shape}, phi {phi.shape}"
        )
    herm = hermitize(np.asarray(cp_identity_image, dtype=np.complex128))
    lam_min = float(sla.eigvalsh(herm)[0])
    delta = max(0.0, 1.0 - lam_min)
    epsilon = max(0.0, abs(complex(np.vdot(phi, M @ phi))) - 1.0)
    deflator = np.eye(n, dtype=np.complex128) - np.outer(phi, phi.conj())
    eta = max(operator_norm(M @ deflator), operator_norm(deflator @ M))
    bound = 1.0 - 2.0 * delta - epsilon - 2.0 * eta
    applicable = all(0.0 <= v < 0.2 for v in (delta, epsilon, eta))
    return GapCertificate(delta=delta, epsilon=epsilon, eta=eta, bound=bound, applicable=applicable)
