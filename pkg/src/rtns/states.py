"""Explicit state vectors for translation-invariant tensor network states.

Everything here is exact contraction of the raw sampled tensors, intended for
small instances (oracles, cross-checks). Amplitude counts above
``MAX_AMPLITUDES`` are refused up front.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ResourceLimitError
from .sampling import MpsTensor, PepsTensor

__all__ = [
    "StateVector",
    "MAX_AMPLITUDES",
    "mps_state",
    "peps_state",
    "block_mps",
    "mps_injectivity_map",
    "peps_injectivity_map",
]

MAX_AMPLITUDES = 200_000_000


@dataclass(frozen=True)
class StateVector:
    kind: str  # "mps" or "peps"
    d: int
    N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.kind not in ("mps", "peps"):
            raise InvalidParameterError(f"unknown state kind {self.kind!r}")
        sites = self.N if self.kind == "mps" else self.N * self.N
        if self.amplitudes.shape != (self.d**sites,):
            raise InvalidParameterError(
                f"amplitude vector has shape {self.amplitudes.shape}, expected ({self.d**sites},)"
            )

    def norm_squared(self) -> float:
        return float(np.real(np.vdot(self.amplitudes, self.amplitudes)))

    def overlap(self, other: "StateVector") -> complex:
        if self.amplitudes.shape != other.amplitudes.shape:
            raise InvalidParameterError("overlap requires equal-length amplitude vectors")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_csv(self, path) -> None:
        amps = self.amplitudes
        with open(path, "w") as fh:
            fh.write("index,real,imag\n")
            for i in range(amps.shape[0]):
                fh.write(f"{i},{repr(float(amps[i].real))},{repr(float(amps[i].imag))}\n")


def _check_budget(amplitude_count: int) -> None:
    if amplitude_count > MAX_AMPLITUDES:
        raise ResourceLimitError(
            f"state would hold {amplitude_count} amplitudes, limit is {MAX_AMPLITUDES}"
        )


def mps_state(tensor: MpsTensor, N: int) -> StateVector:
    """Length-N ring state: amplitude(x_1..x_N) = Tr(B_{x_1} ... B_{x_N})."""
    if N < 1:
        raise InvalidParameterError(f"N must be positive, got {N}")
    d, D = tensor.d, tensor.D
    _check_budget(d**N)
    B = tensor.entries
    M = B  # (phys, left, right)
    for _ in range(N - 1):
        M = np.einsum("aij,xjk->axik", M, B).reshape(-1, D, D)
    amps = np.einsum("aii->a", M)
    return StateVector(kind="mps", d=d, N=N, amplitudes=np.ascontiguousarray(amps))


def block_mps(tensor: MpsTensor, m: int) -> MpsTensor:
    """Group m consecutive sites into one site with physical dimension d^m."""
    if m < 1:
        raise InvalidParameterError(f"block size must be positive, got {m}")
    d, D = tensor.d, tensor.D
    _check_budget(d**m * D * D)
    M = tensor.entries
    for _ in range(m - 1):
        M = np.einsum("aij,xjk->axik", M, tensor.entries).reshape(-1, D, D)
    return MpsTensor(d=d**m, D=D, entries=np.ascontiguousarray(M))


def _peps_column(tensor: PepsTensor, N: int) -> np.ndarray:
    """One column of N sites, vertical bonds traced cyclically.

    Returns C[x_1..x_N, (l_1..l_N), (r_1..r_N)] of shape (d^N, D^N, D^N).
    """
    d, D = tensor.d, tensor.D
    chi = tensor.entries
    if N == 1:
        return np.ascontiguousarray(np.einsum("xlraa->xlr", chi))
    M = chi  # (X, L, R, top, bottom)
    for _ in range(N - 1):
        M = np.einsum("XLRab,xlrbc->XxLlRrac", M, chi).reshape(
            -1, M.shape[1] * D, M.shape[2] * D, D, D
        )
    return np.ascontiguousarray(np.einsum("XLRaa->XLR", M))


def peps_state(tensor: PepsTensor, N: int) -> StateVector:
    """N x N torus state by exact contraction of the raw sampled tensor.

    Physical indices are ordered column-major: the flattened index runs over
    columns, each column holding its N sites top to bottom.
    """
    if N < 1:
        raise InvalidParameterError(f"N must be positive, got {N}")
    d = tensor.d
    _check_budget(d ** (N * N))
    C = _peps_column(tensor, N)
    if N == 1:
        amps = np.einsum("xll->x", C)
        return StateVector(kind="peps", d=d, N=N, amplitudes=np.ascontiguousarray(amps))
    M = C
    for _ in range(N - 2):
        M = np.einsum("Xij,Yjk->XYik", M, C).reshape(-1, C.shape[1], C.shape[2])
    amps = np.einsum("Xij,Yji->XY", M, C).reshape(-1)
    return StateVector(kind="peps", d=d, N=N, amplitudes=np.ascontiguousarray(amps))


def mps_injectivity_map(tensor: MpsTensor, m: int = 2) -> np.ndarray:
    """Map from virtual boundary C^{D^2} to m physical sites.

    Column (l, r) holds the vector x_1..x_m -> (B_{x_1} ... B_{x_m})[l, r].
    """
    if m < 1:
        raise InvalidParameterError(f"m must be positive, got {m}")
    d, D = tensor.d, tensor.D
    _check_budget(d**m * D * D)
    M = tensor.entries
    for _ in range(m - 1):
        M = np.einsum("aij,xjk->axik", M, tensor.entries).reshape(-1, D, D)
    return np.ascontiguousarray(M.reshape(d**m, D * D))


def peps_injectivity_map(tensor: PepsTensor, rows: int, cols: int) -> np.ndarray:
    """Map from the open boundary of a rows x cols patch to its physical sites.

    Interior bonds are contracted. The physical (row) index runs over patch
    sites in row-major order; the boundary (column) index is ordered as all
    left bonds (top row first), all right bonds, all top bonds (leftmost
    column first), all bottom bonds.
    """
    if rows < 1 or cols < 1:
        raise InvalidParameterError(f"patch shape must be positive, got {rows}x{cols}")
    d, D = tensor.d, tensor.D
    _check_budget(d ** (rows * cols) * D ** (2 * rows + 2 * cols))
    chi = tensor.entries
    # Single row with open bonds: (X, l, r, (a_1..a_cols), (b_1..b_cols)).
    row = chi
    for _ in range(cols - 1):
        row = np.einsum("XlrAB,yrsab->XylsAaBb", row, chi).reshape(
            -1, D, D, row.shape[3] * D, row.shape[4] * D
        )
    # Stack rows, contracting bottoms with the next row's tops:
    # (X, (l_1..l_k), (r_1..r_k), A, B).
    patch = row.reshape(row.shape[0], D, D, row.shape[3], row.shape[4])
    for _ in range(rows - 1):
        patch = np.einsum("XLRAB,YlrBC->XYLlRrAC", patch, row).reshape(
            -1, patch.shape[1] * D, patch.shape[2] * D, row.shape[3], row.shape[4]
        )
    return np.ascontiguousarray(patch.reshape(d ** (rows * cols), -1))
