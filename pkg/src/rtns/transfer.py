"""Transfer operators of random MPS and PEPS, in Kraus and matrix form.

Kraus scaling convention: stored Kraus operators absorb sqrt(d) per physical
index (and sqrt(D) per summed vertical bond pair for the PEPS column), so the
matrix form is always prefactor * sum_x K_x (x) conj(K_x) with prefactor 1/d
for MPS and d^{-N} for the PEPS column. This makes the matrix form equal to
the plain double sum over raw tensor slices.

PEPS column matrix form uses grouped bond ordering: all N ket bonds first,
then all N bra bonds. Spectra, traces and the overlap with the maximally
entangled reference are unaffected by this fixed permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NumericalFailureError, ResourceLimitError
from .sampling import MpsTensor, PepsTensor
from .spectral import (
    GapCertificate,
    SpectralSummary,
    gap_certificate,
    hermitize,
    max_entangled,
    operator_norm,
    realign,
    upper_gap,
)

__all__ = [
    "TransferOperator",
    "column_to_mps",
    "mps_transfer",
    "peps_transfer",
    "peps_transfer_independent",
    "apply_cp",
    "overlap_psi",
    "trace",
    "trace_power",
    "deflated_norms",
    "transfer_gap",
]

MATRIX_DIM_LIMIT = 4096  # largest D^N for which the D^{2N} matrix is built


@dataclass
class TransferOperator:
    kind: str  # "mps", "peps_column", or "peps_column_independent"
    d: int
    D: int
    N: int
    kraus: np.ndarray  # (count, D^N, D^N)
    prefactor: float
    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("mps", "peps_column", "peps_column_independent"):
            raise InvalidParameterError(f"unknown transfer kind {self.kind!r}")
        bond = self.D**self.N
        if self.kraus.ndim != 3 or self.kraus.shape[1:] != (bond, bond):
            raise InvalidParameterError(
                f"Kraus stack has shape {self.kraus.shape}, expected (*, {bond}, {bond})"
            )

    @property
    def bond_dim(self) -> int:
        return self.D**self.N

    def matrix(self) -> np.ndarray:
        """prefactor * sum_x K_x (x) conj(K_x), cached."""
        if self._matrix is None:
            n = self.bond_dim
            if n > MATRIX_DIM_LIMIT:
                raise ResourceLimitError(
                    f"matrix form would be {n * n} x {n * n}, limit is {MATRIX_DIM_LIMIT}^2"
                )
            # sum_x K_x (x) conj(K_x) as one gemm over the Kraus index,
            # then the (i,j),(k,l) -> (i,k),(j,l) reshuffle
            F = self.kraus.reshape(-1, n * n)
            self._matrix = self.prefactor * realign(F.T @ F.conj(), n, n)
        return self._matrix


def column_to_mps(tensor: PepsTensor) -> MpsTensor:
    """Reshape a PEPS tensor into the MPS tensor whose transfer operator
    reproduces the column overlap: <psi^{(x)N}|T_N|psi^{(x)N}> = Tr(T~^N).

    The (x, l, r) indices merge into one physical index of size d D^2, the
    vertical bonds become the MPS bonds, and the 1/sqrt(D) rescaling keeps
    the entry variance at 1/(d~ D~).
    """
    d, D = tensor.d, tensor.D
    entries = tensor.entries.reshape(d * D * D, D, D) / np.sqrt(D)
    return MpsTensor(d=d * D * D, D=D, entries=np.ascontiguousarray(entries))


def mps_transfer(tensor: MpsTensor) -> TransferOperator:
    """T = (1/d) sum_x G_x (x) conj(G_x) with G_x = sqrt(d) * slice_x."""
    kraus = np.sqrt(tensor.d) * tensor.entries
    return TransferOperator(
        kind="mps", d=tensor.d, D=tensor.D, N=1, kraus=kraus, prefactor=1.0 / tensor.d
    )


def _column_kraus(tensors: list[PepsTensor], N: int) -> np.ndarray:
    """Kraus stack A_x of the column transfer operator, x over d^N strings.

    A_x = d^{N/2} * sum_{a_1..a_N, cyclic} (x)_i slice(x_i, a_i, a_{i+1}),
    each slice taken in the (left, right) bond plane. Built as a chain over
    the vertical bond index.
    """
    d, D = tensors[0].d, tensors[0].D
    if D**N > MATRIX_DIM_LIMIT:
        raise ResourceLimitError(f"column Kraus dimension D^N = {D**N} exceeds {MATRIX_DIM_LIMIT}")
    # Per-site slices rearranged to (top, bottom, phys, left, right).
    sites = [t.entries.transpose(3, 4, 0, 1, 2) for t in tensors]
    # Chain state: (a_1, a_cur, x_1..x_k, bonds...) with open first/current
    # vertical indices; kron over (left, right) bond planes.
    M = sites[0][:, :, :, :, :]  # (a1, a2, x1, l, r)
    for k in range(1, N):
        M = np.einsum("abxij,bcykl->acxyikjl", M, sites[k]).reshape(
            D, D, M.shape[2] * d, M.shape[3] * D, M.shape[4] * D
        )
    A = np.einsum("aaxij->xij", M)
    return d ** (N / 2.0) * np.ascontiguousarray(A)


def peps_transfer(tensor: PepsTensor, N: int) -> TransferOperator:
    """Column transfer operator T_N of a translation-invariant PEPS on N rows."""
    if N < 1:
        raise InvalidParameterError(f"N must be positive, got {N}")
    kraus = _column_kraus([tensor] * N, N)
    return TransferOperator(
        kind="peps_column",
        d=tensor.d,
        D=tensor.D,
        N=N,
        kraus=kraus,
        prefactor=float(tensor.d) ** (-N),
    )


def peps_transfer_independent(tensors) -> TransferOperator:
    """Column transfer operator with one independent tensor per row."""
    tensors = list(tensors)
    if not tensors:
        raise InvalidParameterError("need at least one tensor")
    d, D = tensors[0].d, tensors[0].D
    if any(t.d != d or t.D != D for t in tensors):
        raise InvalidParameterError("all row tensors must share d and D")
    N = len(tensors)
    kraus = _column_kraus(tensors, N)
    return TransferOperator(
        kind="peps_column_independent",
        d=d,
        D=D,
        N=N,
        kraus=kraus,
        prefactor=float(d) ** (-N),
    )


def apply_cp(T: TransferOperator, X: np.ndarray) -> np.ndarray:
    """prefactor * sum_x K_x X K_x*, symmetrized for Hermitian input."""
    n = T.bond_dim
    X = np.asarray(X, dtype=np.complex128)
    if X.shape != (n, n):
        raise InvalidParameterError(f"X has shape {X.shape}, expected ({n}, {n})")
    out = T.prefactor * np.einsum("xij,jk,xlk->il", T.kraus, X, T.kraus.conj(), optimize=True)
    if operator_norm(X - X.conj().T) <= 1e-12 * max(1.0, operator_norm(X)):
        out = hermitize(out)
    return out


def overlap_psi(T: TransferOperator) -> float:
    """<psi|T|psi> for psi the maximally entangled vector on the bond pair.

    With psi = vec(Id)/sqrt(D^N) this is prefactor * sum_x ||K_x||_F^2 / D^N;
    the imaginary part of the assembled value must vanish and is checked.
    """
    n = T.bond_dim
    value = T.prefactor * np.einsum("xij,xij->", T.kraus, T.kraus.conj()) / n
    if abs(value.imag) > 1e-10 * (1.0 + abs(value)):
        raise NumericalFailureError(
            f"overlap has nonvanishing imaginary part {value.imag:.3e}", residual=abs(value.imag)
        )
    return float(value.real)


def trace(T: TransferOperator) -> complex:
    """Tr(T) = prefactor * sum_x |Tr K_x|^2, without building the matrix."""
    traces = np.trace(T.kraus, axis1=1, axis2=2)
    return complex(T.prefactor * np.vdot(traces, traces))


def trace_power(T: TransferOperator, n: int) -> complex:
    """Tr(T^n) via the matrix form."""
    if n < 1:
        raise InvalidParameterError(f"power must be positive, got {n}")
    if n == 1:
        return trace(T)
    return complex(np.trace(np.linalg.matrix_power(T.matrix(), n)))


def deflated_norms(T: TransferOperator) -> tuple[float, float]:
    """(||T (Id - psi psi*)||, ||(Id - psi psi*) T||) on the bond-pair space."""
    n = T.bond_dim
    M = T.matrix()
    psi = max_entangled(n)
    defl = np.eye(n * n, dtype=np.complex128) - np.outer(psi, psi.conj())
    return operator_norm(M @ defl), operator_norm(defl @ M)


def transfer_gap(T: TransferOperator, method: str = "auto") -> tuple[SpectralSummary, GapCertificate]:
    """Spectral summary of the matrix form plus the certified gap bound."""
    n = T.bond_dim
    M = T.matrix()
    summary = upper_gap(M, method=method)
    cert = gap_certificate(M, apply_cp(T, np.eye(n, dtype=np.complex128)), max_entangled(n))
    return summary, cert
