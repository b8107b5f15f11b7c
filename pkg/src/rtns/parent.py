"""Parent Hamiltonians of injective random MPS/PEPS and their spectral gaps.

The Hamiltonian is a sum over lattice edges of projectors onto the
orthocomplement of the two-site ground space (the range of the two-site
injectivity map). It is never materialized: `hamiltonian_matvec` applies each
edge term by reshaping the global vector. Three gap backends:

* dense diagonalization for small total dimension;
* thick-restart Lanczos (module spectral) matrix-free;
* for a length-3 ring, an exact reduction: the nonzero spectrum of the sum of
  edge projectors equals the spectrum of the Gram matrix of the concatenated
  edge-range bases, whose dimension is only 3 * rank * d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import InvalidParameterError, ResourceLimitError
from .sampling import MpsTensor, PepsTensor
from .spectral import lowest_eigs_hermitian, operator_norm, singular_values
from .states import peps_injectivity_map

__all__ = [
    "GroundProjector",
    "ParentHamiltonian",
    "two_site_map",
    "w_operator",
    "ground_projector",
    "p_tilde_distance",
    "commutator_norm",
    "projector_commutator_norm",
    "peps_two_site_map",
    "mps_parent",
    "peps_parent",
    "hamiltonian_matvec",
    "hamiltonian_gap",
]

DENSE_GAP_LIMIT = 2048
DENSE_COMMUTATOR_LIMIT = 2048  # on rank * d, the overlap-matrix dimension
KRYLOV_DIM_LIMIT = 2_000_000


@dataclass(frozen=True)
class GroundProjector:
    d: int  # single-site physical dimension
    rank: int
    basis: np.ndarray  # d^2 x rank, orthonormal columns
    orientation: str  # "mps", "peps_horizontal", or "peps_vertical"
    q: np.ndarray  # the injectivity map whose range the projector spans
    scale: float  # P~ = scale * q q*
    rank_deficient: bool

    def __post_init__(self):
        if self.orientation not in ("mps", "peps_horizontal", "peps_vertical"):
            raise InvalidParameterError(f"unknown orientation {self.orientation!r}")
        if self.basis.shape != (self.d * self.d, self.rank):
            raise InvalidParameterError(
                f"basis has shape {self.basis.shape}, expected ({self.d * self.d}, {self.rank})"
            )

    def matrix(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def p_tilde(self) -> np.ndarray:
        return self.scale * (self.q @ self.q.conj().T)


@dataclass(frozen=True)
class ParentHamiltonian:
    geometry: str  # "ring" or "torus"
    N: int
    d: int
    projectors: tuple[GroundProjector, ...]  # (ring,) or (vertical, horizontal)

    def __post_init__(self):
        if self.geometry not in ("ring", "torus"):
            raise InvalidParameterError(f"unknown geometry {self.geometry!r}")
        expected = 1 if self.geometry == "ring" else 2
        if len(self.projectors) != expected:
            raise InvalidParameterError(
                f"{self.geometry} geometry takes {expected} local projector(s)"
            )
        if self.geometry == "ring" and self.N < 3:
            raise InvalidParameterError("ring parent Hamiltonian needs N >= 3")

    @property
    def num_sites(self) -> int:
        return self.N if self.geometry == "ring" else self.N * self.N

    @property
    def dim(self) -> int:
        return self.d**self.num_sites

    def edges(self) -> list[tuple[int, int, GroundProjector]]:
        """Ordered edge terms as (first site axis, second site axis, projector).

        Ring: (i, i+1) around the cycle. Torus with column-major site axes
        (site (row, col) at axis col*N + row): all vertical terms
        ((i,j),(i+1,j)) then all horizontal terms ((i,j),(i,j+1)), both pair
        orders present when N=2 because the wrap-around duplicates each edge.
        """
        if self.geometry == "ring":
            proj = self.projectors[0]
            return [(i, (i + 1) % self.N, proj) for i in range(self.N)]
        vert, hor = self.projectors
        N = self.N
        out = []
        for j in range(N):
            for i in range(N):
                out.append((j * N + i, j * N + (i + 1) % N, vert))
        for j in range(N):
            for i in range(N):
                out.append((j * N + i, ((j + 1) % N) * N + i, hor))
        return out


def two_site_map(tensor: MpsTensor) -> np.ndarray:
    """Q: boundary (l, r) -> two physical sites, (Q v)(x1, x2) = (B_{x1} B_{x2})[l, r]."""
    d, D = tensor.d, tensor.D
    B = tensor.entries
    Q = np.einsum("xla,yar->xylr", B, B)
    return np.ascontiguousarray(Q.reshape(d * d, D * D))


def w_operator(tensor: MpsTensor) -> np.ndarray:
    """W[(l,r),(l',r')] = sum_x chi[x,l,r] conj(chi[x,l',r']); E(W) = Id/D."""
    d, D = tensor.d, tensor.D
    flat = tensor.entries.reshape(d, D * D)
    return np.ascontiguousarray(flat.T @ flat.conj())


def ground_projector(
    Q: np.ndarray,
    scale: float,
    orientation: str = "mps",
    tol: float | None = None,
) -> GroundProjector:
    """Orthonormal basis of range(Q) by SVD with the numerical-rank rule."""
    Q = np.asarray(Q, dtype=np.complex128)
    rows, cols = Q.shape
    d = int(round(np.sqrt(rows)))
    if d * d != rows:
        raise InvalidParameterError(f"Q must map into a two-site space, got {rows} rows")
    U, s, _ = sla.svd(Q, full_matrices=False, lapack_driver="gesvd")
    if tol is None:
        tol = max(rows, cols) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return GroundProjector(
        d=d,
        rank=rank,
        basis=np.ascontiguousarray(U[:, :rank]),
        orientation=orientation,
        q=Q,
        scale=scale,
        rank_deficient=rank < min(rows, cols),
    )


def p_tilde_distance(proj: GroundProjector) -> float:
    """||P~ - Pi||_op, computed on the shared range of P~ and Pi.

    Both operators vanish on the orthocomplement of range(q), so the norm is
    that of scale * (U* q)(U* q)* - Id_rank.
    """
    R = proj.basis.conj().T @ proj.q
    M = proj.scale * (R @ R.conj().T) - np.eye(proj.rank)
    return operator_norm(M)


def _overlap_commutator_norm(F: np.ndarray, iterative_apply=None, dim: int = 0) -> float:
    """||[P, Q]|| = max_i sigma_i sqrt(1 - sigma_i^2) from principal-angle cosines."""
    if iterative_apply is None:
        s = np.clip(singular_values(F), 0.0, 1.0)
        if s.size == 0:
            return 0.0
        return float(np.max(s * np.sqrt(1.0 - s * s)))
    # sigma^2 (1 - sigma^2) values cluster near the top; converge on the value
    vals = lowest_eigs_hermitian(
        lambda v: -iterative_apply(v), dim, count=1, value_tol=1e-11
    )
    return float(np.sqrt(max(0.0, -vals[0])))


def projector_commutator_norm(
    projA: GroundProjector, projB: GroundProjector | None = None, arrangement: str = "chain"
) -> float:
    """Commutator norm of two two-site projectors on three sites.

    arrangement "chain": A on sites (1,2), B on sites (2,3). arrangement
    "wedge": A on (1,2), B on (1,3), the shared site being the first slot of
    both. The norm is computed from the principal angles between the two
    embedded ranges, never touching the d^3-dimensional space.
    """
    if projB is None:
        projB = projA
    d = projA.d
    if projB.d != d:
        raise InvalidParameterError("projectors act on different site dimensions")
    QA = projA.basis.T.reshape(projA.rank, d, d)
    QB = projB.basis.T.reshape(projB.rank, d, d)
    if arrangement == "wedge":
        # F[(i,c),(b,j)] = <q^A_i (x) e_c, basis of B on (1,3) with e_b on 2>
        F = np.einsum("imb,jmc->icbj", QA.conj(), QB, optimize=True)
        return _overlap_commutator_norm(F.reshape(projA.rank * d, d * projB.rank))
    if arrangement != "chain":
        raise InvalidParameterError(f"unknown arrangement {arrangement!r}")
    # F[(i,k),(k',j)] = (conj(Q^A_i) Q^B_j)[k',k], assembled blockwise by one
    # large matrix product over the shared middle index.
    rA, rB = projA.rank, projB.rank
    left = QA.conj().reshape(rA * d, d)  # rows (i, k')
    right = QB.transpose(1, 0, 2).reshape(d, rB * d)  # cols (j, k)
    C = (left @ right).reshape(rA, d, rB, d)  # (i, k', j, k)
    F = np.ascontiguousarray(C.transpose(0, 3, 1, 2).reshape(rA * d, d * rB))
    if rA * d <= DENSE_COMMUTATOR_LIMIT and rB * d <= DENSE_COMMUTATOR_LIMIT:
        return _overlap_commutator_norm(F)
    # Too large for a full SVD: the largest value of sigma^2 (1 - sigma^2) is
    # the top eigenvalue of F*F - (F*F)^2, found by Lanczos with gemv applies.
    Fh = F.conj().T

    def apply_G(v):
        w = Fh @ (F @ v)
        return w - Fh @ (F @ w)

    return _overlap_commutator_norm(None, iterative_apply=apply_G, dim=d * rB)


def commutator_norm(proj: GroundProjector) -> float:
    """||[Pi_{12} (x) Id, Id (x) Pi_{23}]|| for one local projector on a chain."""
    return projector_commutator_norm(proj, proj, arrangement="chain")


def peps_two_site_map(tensor: PepsTensor, orientation: str) -> np.ndarray:
    """Two-site injectivity map of a PEPS pair, with 6 open boundary legs.

    Horizontal pairs contract the right bond of the first site with the left
    bond of the second; vertical pairs contract bottom with top. Boundary
    ordering follows `peps_injectivity_map`.
    """
    if orientation == "horizontal":
        return peps_injectivity_map(tensor, 1, 2)
    if orientation == "vertical":
        return peps_injectivity_map(tensor, 2, 1)
    raise InvalidParameterError(f"unknown orientation {orientation!r}")


def mps_parent(tensor: MpsTensor, N: int) -> ParentHamiltonian:
    Q = two_site_map(tensor)
    proj = ground_projector(Q, scale=float(tensor.D), orientation="mps")
    return ParentHamiltonian(geometry="ring", N=N, d=tensor.d, projectors=(proj,))


def peps_parent(tensor: PepsTensor, N: int) -> ParentHamiltonian:
    scale = float(tensor.D) ** 3
    vert = ground_projector(
        peps_two_site_map(tensor, "vertical"), scale=scale, orientation="peps_vertical"
    )
    hor = ground_projector(
        peps_two_site_map(tensor, "horizontal"), scale=scale, orientation="peps_horizontal"
    )
    return ParentHamiltonian(geometry="torus", N=N, d=tensor.d, projectors=(vert, hor))


def hamiltonian_matvec(H: ParentHamiltonian, v: np.ndarray) -> np.ndarray:
    """Apply H = sum_edges (Id - Pi_edge) without materializing H."""
    d, sites = H.d, H.num_sites
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (H.dim,):
        raise InvalidParameterError(f"vector has shape {v.shape}, expected ({H.dim},)")
    edges = H.edges()
    tensor = v.reshape((d,) * sites)
    out = len(edges) * v.copy()
    for p, q, proj in edges:
        moved = np.moveaxis(tensor, (p, q), (0, 1)).reshape(d * d, -1)
        image = proj.basis @ (proj.basis.conj().T @ moved)
        rest = tuple(d for k in range(sites) if k not in (p, q))
        out -= np.moveaxis(image.reshape((d, d) + rest), (0, 1), (p, q)).reshape(-1)
    return out


def _ring3_subspace_gap(H: ParentHamiltonian) -> tuple[float, float]:
    """Exact two lowest eigenvalues of a 3-site ring parent Hamiltonian.

    H = 3 Id - A with A the sum of the three edge projectors; the nonzero
    spectrum of A equals that of the Gram matrix of the concatenated
    orthonormal edge bases (blocks are small matrix products of the reshaped
    basis columns).
    """
    proj = H.projectors[0]
    d, r = H.d, proj.rank
    Q = proj.basis.T.reshape(r, d, d)
    Qc = Q.conj()
    F12 = np.einsum("amt,btk->akmb", Qc, Q, optimize=True).reshape(r * d, d * r)
    F13 = np.einsum("ckt,atm->akcm", Q, Qc, optimize=True).reshape(r * d, r * d)
    F23 = np.einsum("bmt,ctk->kbcm", Qc, Q, optimize=True).reshape(d * r, r * d)
    n1, n2, n3 = r * d, d * r, r * d
    gram = np.empty((n1 + n2 + n3, n1 + n2 + n3), dtype=np.complex128)
    gram[:n1, :n1] = np.eye(n1)
    gram[n1 : n1 + n2, n1 : n1 + n2] = np.eye(n2)
    gram[n1 + n2 :, n1 + n2 :] = np.eye(n3)
    gram[:n1, n1 : n1 + n2] = F12
    gram[n1 : n1 + n2, :n1] = F12.conj().T
    gram[:n1, n1 + n2 :] = F13
    gram[n1 + n2 :, :n1] = F13.conj().T
    gram[n1 : n1 + n2, n1 + n2 :] = F23
    gram[n1 + n2 :, n1 : n1 + n2] = F23.conj().T
    n = gram.shape[0]
    if n <= 512:
        mu = sla.eigvalsh(gram)[::-1]
    else:
        try:
            mu = np.sort(spla.eigsh(gram, k=2, which="LA", return_eigenvectors=False))[::-1]
        except spla.ArpackNoConvergence:
            mu = sla.eigvalsh(gram)[::-1]
    ground = 3.0 - float(mu[0])
    second = 3.0 - float(mu[1])
    return ground, second


def hamiltonian_gap(H: ParentHamiltonian, method: str = "auto") -> tuple[float, float]:
    """(ground energy, second-lowest eigenvalue) of the parent Hamiltonian."""
    dim = H.dim
    if method == "auto":
        if H.geometry == "ring" and H.N == 3:
            method = "subspace"
        elif dim <= DENSE_GAP_LIMIT:
            method = "dense"
        else:
            method = "krylov"
    if method == "subspace":
        if H.geometry != "ring" or H.N != 3:
            raise InvalidParameterError("subspace method only applies to a 3-site ring")
        return _ring3_subspace_gap(H)
    if method == "dense":
        if dim > 2 * DENSE_GAP_LIMIT:
            raise ResourceLimitError(f"dense diagonalization refused at dimension {dim}")
        basis = np.eye(dim, dtype=np.complex128)
        Hmat = np.column_stack([hamiltonian_matvec(H, basis[:, j]) for j in range(dim)])
        vals = np.sort(sla.eigvalsh(0.5 * (Hmat + Hmat.conj().T)))
        return float(vals[0]), float(vals[1])
    if method == "krylov":
        if dim > KRYLOV_DIM_LIMIT:
            raise ResourceLimitError(f"dimension {dim} exceeds the Krylov budget {KRYLOV_DIM_LIMIT}")
        vals = lowest_eigs_hermitian(lambda v: hamiltonian_matvec(H, v), dim, count=2, tol=1e-8)
        return float(vals[0]), float(vals[1])
    raise InvalidParameterError(f"unknown method {method!r}")
