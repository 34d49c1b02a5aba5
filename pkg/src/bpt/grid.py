"""Uniform frequency/time lattices and the spectral-to-temporal transform.

All frequencies are angular (rad/s) and measured as offsets from the beam's
carrier, so a grid centred on 0 holds the detunings directly.

Fourier convention used throughout the package::

    phi_t(t) = 1/sqrt(2 pi) * integral dw phi(w) exp(-i w t)

evaluated as a quadrature sum over the frequency samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

#: Sign of the exponent in the frequency -> time transform.
FOURIER_SIGN = -1


class GridError(ValueError):
    """Invalid grid construction or mismatched sample vectors."""


@dataclass(frozen=True)
class FrequencyGrid:
    center: float
    spacing: float
    count: int

    def __post_init__(self):
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise GridError(f"spacing must be positive and finite, got {self.spacing}")
        if int(self.count) != self.count or self.count < 2:
            raise GridError(f"count must be an integer >= 2, got {self.count}")
        if not math.isfinite(self.center):
            raise GridError("center must be finite")

    @property
    def offsets(self) -> NDArray[np.float64]:
        """Detunings from ``center``, symmetric about zero."""
        n = self.count
        return (np.arange(n) - (n - 1) / 2.0) * self.spacing

    @property
    def samples(self) -> NDArray[np.float64]:
        return self.center + self.offsets

    @property
    def span(self) -> float:
        return (self.count - 1) * self.spacing


@dataclass(frozen=True)
class TimeGrid:
    spacing: float
    count: int
    origin: float

    def __post_init__(self):
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise GridError(f"spacing must be positive and finite, got {self.spacing}")
        if int(self.count) != self.count or self.count < 2:
            raise GridError(f"count must be an integer >= 2, got {self.count}")

    @property
    def samples(self) -> NDArray[np.float64]:
        return self.origin + np.arange(self.count) * self.spacing

    @property
    def period(self) -> float:
        return self.count * self.spacing

    def is_dual_to(self, fgrid: FrequencyGrid, rtol: float = 1e-12) -> bool:
        if self.count != fgrid.count:
            return False
        expected = 2 * math.pi / (fgrid.count * fgrid.spacing)
        return abs(self.spacing - expected) <= rtol * expected

    def lags(self) -> NDArray[np.float64]:
        """Delay values ``m * spacing`` for ``m = -N//2 .. N - N//2 - 1``.

        Index ``N // 2`` is the zero delay.
        """
        n = self.count
        return (np.arange(n) - n // 2) * self.spacing


def make_frequency_grid(center: float, span: float, n: int) -> FrequencyGrid:
    """Grid of ``n`` points covering ``[center - span/2, center + span/2]``."""
    if not span > 0:
        raise GridError(f"span must be positive, got {span}")
    if n < 2:
        raise GridError(f"need at least 2 samples, got {n}")
    return FrequencyGrid(center=float(center), spacing=span / (n - 1), count=int(n))


def dual_time_grid(fgrid: FrequencyGrid) -> TimeGrid:
    """Time lattice paired with ``fgrid`` by the DFT: ``dt = 2 pi / (N dw)``.

    The grid is symmetric about t = 0, so for even N no sample sits exactly
    at zero.
    """
    dt = 2 * math.pi / (fgrid.count * fgrid.spacing)
    return TimeGrid(spacing=dt, count=fgrid.count, origin=-(fgrid.count - 1) / 2.0 * dt)


def _check_pair(fgrid: FrequencyGrid, tgrid: TimeGrid) -> None:
    if not tgrid.is_dual_to(fgrid):
        raise GridError("time grid is not dual to the frequency grid")


def transform_matrix(fgrid: FrequencyGrid, tgrid: TimeGrid) -> NDArray[np.complex128]:
    """Quadrature kernel ``F[j, i] = dw / sqrt(2 pi) * exp(-i w_i t_j)``."""
    phase = np.outer(tgrid.samples, fgrid.offsets)
    return fgrid.spacing / math.sqrt(2 * math.pi) * np.exp(1j * FOURIER_SIGN * phase)


def _fft_phases(fgrid: FrequencyGrid, tgrid: TimeGrid):
    # w_i t_j = (i - c)(j dt + t0) dw  with c = (N-1)/2
    #         = 2 pi i j / N + i dw t0 - c dw (j dt + t0)
    n = fgrid.count
    i = np.arange(n)
    pre = np.exp(1j * FOURIER_SIGN * i * fgrid.spacing * tgrid.origin)
    post = np.exp(-1j * FOURIER_SIGN * (n - 1) / 2.0 * fgrid.spacing * tgrid.samples)
    return pre, post


def mode_to_time(samples, fgrid: FrequencyGrid, tgrid: TimeGrid, method: str = "quadrature"):
    """Map spectral mode functions onto the dual time grid.

    Parameters
    ----------
    samples : array_like
        Vector of length ``fgrid.count``, or a matrix whose columns are
        modes sampled on ``fgrid``.
    fgrid, tgrid : FrequencyGrid, TimeGrid
        ``tgrid`` must be ``dual_time_grid(fgrid)`` (or share its spacing
        and count).
    method : {"quadrature", "fft"}
        The quadrature sum is the reference; the FFT path reproduces it to
        rounding error.

    Returns
    -------
    ndarray
        Temporal samples with the same shape as ``samples``.
    """
    x = np.asarray(samples, dtype=complex)
    if x.shape[0] != fgrid.count:
        raise GridError(f"expected {fgrid.count} frequency samples, got {x.shape[0]}")
    _check_pair(fgrid, tgrid)
    if method == "quadrature":
        return transform_matrix(fgrid, tgrid) @ x
    if method == "fft":
        pre, post = _fft_phases(fgrid, tgrid)
        shape = (-1,) + (1,) * (x.ndim - 1)
        y = np.fft.fft(x * pre.reshape(shape), axis=0) if FOURIER_SIGN < 0 else \
            np.fft.ifft(x * pre.reshape(shape), axis=0) * fgrid.count
        return fgrid.spacing / math.sqrt(2 * math.pi) * post.reshape(shape) * y
    raise ValueError(f"unknown method {method!r}")


def time_to_mode(samples, fgrid: FrequencyGrid, tgrid: TimeGrid):
    """Inverse of :func:`mode_to_time` (exact on dual grids)."""
    x = np.asarray(samples, dtype=complex)
    if x.shape[0] != tgrid.count:
        raise GridError(f"expected {tgrid.count} time samples, got {x.shape[0]}")
    _check_pair(fgrid, tgrid)
    F = transform_matrix(fgrid, tgrid)
    # F^H F = (dw^2 N / 2 pi) I = (dw / dt) I on dual grids
    return F.conj().T @ x * (tgrid.spacing / fgrid.spacing)
