"""Deterministic sampling of complex Gaussian tensors.

All randomness in the library flows through :class:`SeedSpec`, which derives a
per-stream seed as a pure function of ``(master_seed, trial_index, stream_label)``
via SHA-256. Gaussians are produced by an explicit complex Box-Muller transform
applied to PCG64 uniforms, so tail probabilities are exact.

Variance convention: ``E|g|^2 = variance``, i.e. real and imaginary parts are
independent real Gaussians with variance ``variance / 2`` each.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "SeedSpec",
    "MpsTensor",
    "PepsTensor",
    "sample_complex_gaussian_matrix",
    "sample_mps_tensor",
    "sample_peps_tensor",
]


@dataclass(frozen=True)
class SeedSpec:
    """Splittable seed: distinct (trial_index, stream_label) give independent streams."""

    master_seed: int
    trial_index: int = 0
    stream_label: str = ""

    def derived_entropy(self) -> int:
        payload = f"{self.master_seed}:{self.trial_index}:{self.stream_label}"
        digest = hashlib.sha256(payload.encode("utf-8")).digest()
        return int.from_bytes(digest, "big")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.derived_entropy())))

    def child(self, stream_label: str) -> "SeedSpec":
        """Sub-stream with the same master seed and trial index."""
        sep = "/" if self.stream_label else ""
        return SeedSpec(self.master_seed, self.trial_index, self.stream_label + sep + stream_label)


def _complex_gaussian(rng: np.random.Generator, shape: tuple[int, ...], variance: float) -> np.ndarray:
    # Box-Muller in polar form: sqrt(-var*ln U1) * exp(2*pi*i*U2) has E|g|^2 = var.
    # 1 - random() keeps U1 in (0, 1] so the log never sees zero.
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    radius = np.sqrt(-variance * np.log(u1))
    return radius * np.exp(2j * np.pi * u2)


def sample_complex_gaussian_matrix(seed: SeedSpec, rows: int, cols: int, variance: float) -> np.ndarray:
    """i.i.d. complex Gaussian matrix, mean 0, entrywise E|g|^2 = variance."""
    if rows < 1 or cols < 1:
        raise InvalidParameterError(f"matrix shape must be positive, got {rows}x{cols}")
    if variance < 0:
        raise InvalidParameterError(f"variance must be nonnegative, got {variance}")
    if variance == 0:
        return np.zeros((rows, cols), dtype=np.complex128)
    return _complex_gaussian(seed.generator(), (rows, cols), variance)


@dataclass(frozen=True)
class MpsTensor:
    """One-site tensor chi of a translation-invariant MPS, indexed (x, l, r).

    Entries are i.i.d. complex Gaussians of variance 1/(d*D); this variance is
    exactly what makes the induced N-site ring state have squared norm ~ 1.
    """

    d: int
    D: int
    entries: np.ndarray

    def __post_init__(self):
        if self.entries.shape != (self.d, self.D, self.D):
            raise InvalidParameterError(
                f"MpsTensor entries must have shape {(self.d, self.D, self.D)}, got {self.entries.shape}"
            )
        if not np.all(np.isfinite(self.entries.view(np.float64))):
            raise InvalidParameterError("MpsTensor entries must be finite")

    @property
    def variance(self) -> float:
        return 1.0 / (self.d * self.D)

    def slices(self) -> np.ndarray:
        """The d raw D x D slices x -> chi[x, :, :]."""
        return self.entries


@dataclass(frozen=True)
class PepsTensor:
    """One-site PEPS tensor chi, indexed (x, l, r, a, b).

    l/r are the horizontal (row) bonds, a/b the vertical (column) bonds; the
    column contraction identifies b of site i with a of site i+1. Entries are
    i.i.d. complex Gaussians of variance 1/(d*D^2).
    """

    d: int
    D: int
    entries: np.ndarray

    def __post_init__(self):
        D = self.D
        if self.entries.shape != (self.d, D, D, D, D):
            raise InvalidParameterError(
                f"PepsTensor entries must have shape {(self.d, D, D, D, D)}, got {self.entries.shape}"
            )
        if not np.all(np.isfinite(self.entries.view(np.float64))):
            raise InvalidParameterError("PepsTensor entries must be finite")

    @property
    def variance(self) -> float:
        return 1.0 / (self.d * self.D**2)


def sample_mps_tensor(seed: SeedSpec, d: int, D: int) -> MpsTensor:
    if d < 1 or D < 1:
        raise InvalidParameterError(f"d and D must be positive, got d={d}, D={D}")
    entries = _complex_gaussian(seed.generator(), (d, D, D), 1.0 / (d * D))
    return MpsTensor(d=d, D=D, entries=entries)


def sample_peps_tensor(seed: SeedSpec, d: int, D: int) -> PepsTensor:
    if d < 1 or D < 1:
        raise InvalidParameterError(f"d and D must be positive, got d={d}, D={D}")
    entries = _complex_gaussian(seed.generator(), (d, D, D, D, D), 1.0 / (d * D**2))
    return PepsTensor(d=d, D=D, entries=entries)
