"""Spectral and temporal correlation functions of one pseudothermal beam.

Everything is built from the Schmidt data: the spectral correlation
``S(w, w') = sum_k n_k phi_k*(w) phi_k(w')``, the two-time field correlation
``G1(t1, t2) = sum_k n_k phi_k*(t1) phi_k(t2)`` and the Gaussian-moment
factorisation ``G2 = G1(t1,t1) G1(t2,t2) + |G1(t1,t2)|^2``.

The CW limit is diagonal in frequency. On a grid the delta function becomes
``1/dw``, which is equivalent to treating every frequency bin as its own
Schmidt mode with squeezing ``r(w_i)``; :func:`cw_decomposition` builds
exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy import constants

from .grid import FrequencyGrid, GridError, TimeGrid, dual_time_grid, mode_to_time
from .jsa import format_complex
from .photonstats import n_bar_values
from .schmidt import SchmidtDecomposition, _order

KINDS = ("spectral-S", "temporal-G1", "temporal-G2", "normalized-g1", "normalized-g2")
HERMITIAN_KINDS = ("spectral-S", "temporal-G1", "normalized-g1")

# normalised values are undefined where the intensity drops below this
# fraction of its peak
MASK_FLOOR = 1e-300


class NumericalError(RuntimeError):
    """Two independent evaluation routes disagreed."""


@dataclass(frozen=True)
class CorrelationMatrix:
    axis: FrequencyGrid | TimeGrid
    values: NDArray
    kind: str
    mask: NDArray[np.bool_] | None = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown correlation kind {self.kind!r}")
        if self.values.shape != (self.axis.count, self.axis.count):
            raise GridError("matrix shape does not match its axis")

    @property
    def diagonal(self) -> NDArray:
        return np.diagonal(self.values).copy()


@dataclass(frozen=True)
class CwBeam:
    grid: FrequencyGrid
    n_bar: NDArray[np.float64]

    def __post_init__(self):
        n = np.asarray(self.n_bar, dtype=float)
        if n.shape != (self.grid.count,):
            raise GridError("n_bar length does not match grid")
        if not (np.all(np.isfinite(n)) and np.all(n >= 0)):
            raise ValueError("n_bar entries must be finite and >= 0")
        object.__setattr__(self, "n_bar", n)


def _hermitize(m):
    return 0.5 * (m + m.conj().T)


def spectral_correlation(d: SchmidtDecomposition) -> CorrelationMatrix:
    """``S(w, w')`` on ``d.grid_a``; its diagonal is the spectral density."""
    nk = n_bar_values(d.coefficients)
    phi = d.modes_a
    s = (phi.conj() * nk) @ phi.T
    return CorrelationMatrix(d.grid_a, _hermitize(s), "spectral-S")


def temporal_modes(d: SchmidtDecomposition, tgrid: TimeGrid | None = None) -> NDArray[np.complex128]:
    if tgrid is None:
        tgrid = dual_time_grid(d.grid_a)
    return mode_to_time(d.modes_a, d.grid_a, tgrid)


def g1_matrix(d: SchmidtDecomposition, tgrid: TimeGrid | None = None) -> CorrelationMatrix:
    """Two-time field correlation from the temporal Schmidt modes."""
    if tgrid is None:
        tgrid = dual_time_grid(d.grid_a)
    phit = temporal_modes(d, tgrid)
    nk = n_bar_values(d.coefficients)
    g = (phit.conj() * nk) @ phit.T
    return CorrelationMatrix(tgrid, _hermitize(g), "temporal-G1")


def _intensity_mask(diag):
    peak = diag.max() if diag.size else 0.0
    return ~(diag > MASK_FLOOR * peak) if peak > 0 else np.ones(diag.shape, dtype=bool)


def g1_normalized(G1: CorrelationMatrix) -> CorrelationMatrix:
    """``g1 = G1(t1,t2) / sqrt(G1(t1,t1) G1(t2,t2))``.

    Rows and columns whose intensity underflows are masked (``mask`` True,
    value NaN) instead of raising.
    """
    diag = np.real(G1.diagonal)
    bad = _intensity_mask(diag)
    safe = np.where(bad, 1.0, diag)
    inv = 1 / np.sqrt(safe)
    g = G1.values * inv[:, None] * inv[None, :]
    np.fill_diagonal(g, 1.0)
    mask = bad[:, None] | bad[None, :]
    g = np.where(mask, np.nan, g)
    return CorrelationMatrix(G1.axis, g, "normalized-g1", mask)


def g2_matrix(G1: CorrelationMatrix) -> CorrelationMatrix:
    if G1.kind != "temporal-G1":
        raise ValueError(f"expected a temporal-G1 matrix, got {G1.kind}")
    diag = np.real(G1.diagonal)
    g2 = np.outer(diag, diag) + np.abs(G1.values) ** 2
    return CorrelationMatrix(G1.axis, 0.5 * (g2 + g2.T), "temporal-G2")


def g2_normalized(G1: CorrelationMatrix) -> CorrelationMatrix:
    """``g2 = G2 / (G1(t1,t1) G1(t2,t2))``, masked like :func:`g1_normalized`."""
    diag = np.real(G1.diagonal)
    bad = _intensity_mask(diag)
    safe = np.where(bad, 1.0, diag)
    g2 = g2_matrix(G1).values / np.outer(safe, safe)
    mask = bad[:, None] | bad[None, :]
    return CorrelationMatrix(G1.axis, np.where(mask, np.nan, g2), "normalized-g2", mask)


def g2_integrated_closed(d: SchmidtDecomposition) -> float:
    nk = n_bar_values(d.coefficients)
    total = nk.sum()
    if not total > 0:
        raise ValueError("time-integrated g2 needs a nonzero photon number")
    return float(1 + np.sum((nk / total) ** 2))


def g2_integrated_quadrature(G1: CorrelationMatrix) -> float:
    diag = np.real(G1.diagonal)
    if not diag.sum() > 0:
        raise ValueError("time-integrated g2 needs a nonzero photon number")
    # dt factors cancel between numerator and denominator
    return float(g2_matrix(G1).values.sum() / diag.sum() ** 2)


def g2_time_integrated(d: SchmidtDecomposition, tgrid: TimeGrid | None = None,
                       rtol: float = 1e-6) -> float:
    """``1 + sum n_k^2 / (sum n_k)^2``, cross-checked by quadrature of G2.

    The integration window is the full dual time grid (one period of the
    DFT), so for CW beams the value depends on the grid resolution.

    Raises
    ------
    NumericalError
        If the closed form and the quadrature disagree by more than ``rtol``.
    """
    closed = g2_integrated_closed(d)
    quad = g2_integrated_quadrature(g1_matrix(d, tgrid))
    if abs(closed - quad) > rtol * closed:
        raise NumericalError(f"g2 integral mismatch: closed {closed!r}, quadrature {quad!r}")
    return closed


# -- CW limit ----------------------------------------------------------------

def cw_beam(profile, grid: FrequencyGrid) -> CwBeam:
    r = np.asarray(profile, dtype=float)
    if r.shape != (grid.count,):
        raise GridError("profile length does not match grid")
    if np.any(r < 0):
        raise ValueError("squeezing profile must be nonnegative")
    return CwBeam(grid, np.sinh(r) ** 2)


def cw_spectral_matrix(beam: CwBeam) -> CorrelationMatrix:
    """Discrete ``n(w) delta(w - w')``: diagonal ``n(w_i) / dw``, zero elsewhere."""
    return CorrelationMatrix(beam.grid, np.diag(beam.n_bar / beam.grid.spacing).astype(complex),
                             "spectral-S")


def cw_decomposition(beam: CwBeam) -> SchmidtDecomposition:
    """Frequency-bin Schmidt data of a CW beam.

    Mode ``i`` is the bin indicator ``1/sqrt(dw)`` at ``w_i`` (beam b at
    ``-w_i``) with coefficient ``asinh(sqrt(n(w_i)))``. Empty bins are dropped.
    """
    grid = beam.grid
    r = np.arcsinh(np.sqrt(beam.n_bar))
    idx = np.flatnonzero(r > 0)
    n = grid.count
    modes_a = np.zeros((n, idx.size), dtype=complex)
    modes_b = np.zeros((n, idx.size), dtype=complex)
    cols = np.arange(idx.size)
    modes_a[idx, cols] = 1 / math.sqrt(grid.spacing)
    modes_b[n - 1 - idx, cols] = 1 / math.sqrt(grid.spacing)
    coeffs = r[idx]
    order = _order(coeffs, modes_a)
    return SchmidtDecomposition(coeffs[order], modes_a[:, order], modes_b[:, order], grid, grid)


def _check_cw(beam: CwBeam, tgrid: TimeGrid):
    if not tgrid.is_dual_to(beam.grid):
        raise GridError("time grid is not dual to the beam's frequency grid")


def cw_g1(beam: CwBeam, tgrid: TimeGrid) -> NDArray[np.complex128]:
    """``G1(tau) = 1/(2 pi) sum_i exp(i w_i tau) n(w_i) dw`` at ``tgrid.lags()``."""
    _check_cw(beam, tgrid)
    w = beam.grid.offsets
    kernel = np.exp(1j * np.outer(tgrid.lags(), w))
    return kernel @ beam.n_bar * beam.grid.spacing / (2 * math.pi)


def cw_g2(beam: CwBeam, tgrid: TimeGrid, normalized: bool = False) -> NDArray[np.float64]:
    """``G2(tau) = G1(0)^2 + |G1(tau)|^2``; normalised form ``1 + |g1(tau)|^2``."""
    g1 = cw_g1(beam, tgrid)
    g0 = g1[tgrid.count // 2].real
    if normalized:
        if not g0 > 0:
            raise ValueError("normalised g2 undefined for a dark beam")
        return 1 + np.abs(g1 / g0) ** 2
    return g0 ** 2 + np.abs(g1) ** 2


def cw_g1_matrix(beam: CwBeam, tgrid: TimeGrid | None = None) -> CorrelationMatrix:
    if tgrid is None:
        tgrid = dual_time_grid(beam.grid)
    _check_cw(beam, tgrid)
    return g1_matrix(cw_decomposition(beam), tgrid)


def thermal_alpha(temperature: float, omega) -> NDArray[np.float64]:
    """Gibbs parameter ``hbar w / (k_B T)`` for absolute angular frequencies."""
    w = np.asarray(omega, dtype=float)
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    if np.any(~(w > 0)):
        raise ValueError("thermal mapping needs strictly positive absolute frequencies")
    return constants.hbar * w / (constants.k * temperature)


def thermal_r_profile(temperature: float, omega) -> NDArray[np.float64]:
    """Squeezing profile whose occupancies follow the Bose-Einstein law at ``T``.

    ``tanh(r)^2 = exp(-hbar w / k_B T)``.
    """
    alpha = thermal_alpha(temperature, omega)
    one_minus = -np.expm1(-alpha / 2)
    return 0.5 * np.log((2 - one_minus) / one_minus)


# -- derived figures of merit ------------------------------------------------

def normalized_peak(x) -> NDArray[np.float64]:
    x = np.real(np.asarray(x))
    peak = np.max(x)
    return x / peak if peak > 0 else x


def max_toeplitz_deviation(m) -> float:
    """Largest spread along any diagonal, relative to ``max |m|``."""
    m = np.asarray(m)
    scale = np.nanmax(np.abs(m))
    if not scale > 0:
        return 0.0
    n = m.shape[0]
    worst = 0.0
    for k in range(-(n - 1), n):
        d = np.diagonal(m, k)
        d = d[~np.isnan(np.abs(d))]
        if d.size > 1:
            worst = max(worst, float(np.max(np.abs(d - d[0]))))
    return worst / scale


def is_stationary(G1: CorrelationMatrix, tol: float = 1e-8) -> bool:
    return bool(max_toeplitz_deviation(G1.values) <= tol)


def coherence_fwhm(G1: CorrelationMatrix, row: int | None = None,
                   intensity_floor: float = 1e-10) -> float:
    """Full width at half maximum of ``|g1(t0, .)|`` about ``t0``.

    ``t0`` defaults to the sample nearest t = 0. The scan stops at samples
    whose intensity falls below ``intensity_floor`` times the peak; if
    ``|g1|`` is still above 1/2 there (or at the grid edge) the width is
    unbounded and ``inf`` is returned.
    """
    tgrid = G1.axis
    diag = np.real(G1.diagonal)
    if row is None:
        row = int(np.argmin(np.abs(tgrid.samples)))
    g = np.abs(g1_normalized(G1).values[row])
    valid = diag > intensity_floor * diag.max()

    def crossing(step):
        prev = row
        j = row + step
        while 0 <= j < len(g) and valid[j]:
            if g[j] < 0.5:
                frac = (g[prev] - 0.5) / (g[prev] - g[j])
                return abs((j - row) - step * (1 - frac)) * tgrid.spacing
            prev, j = j, j + step
        return math.inf

    return crossing(1) + crossing(-1)


def save_correlation(cm: CorrelationMatrix, path, magnitude: bool = False) -> None:
    """Write ``cm`` in the ``# corr v1`` CSV format.

    Hermitian kinds are written as complex ``re+imj`` entries unless
    ``magnitude`` is set; masked entries are written as ``nan``.
    """
    axis = cm.axis
    center = axis.center if isinstance(axis, FrequencyGrid) else axis.origin + (axis.count - 1) / 2 * axis.spacing
    lines = [f"# corr v1 kind={cm.kind} n={axis.count} d={axis.spacing!r} c={float(center)!r}"]
    complex_out = cm.kind in HERMITIAN_KINDS and not magnitude
    vals = np.abs(cm.values) if magnitude else cm.values
    for row in vals:
        if complex_out:
            lines.append(",".join("nan" if np.isnan(abs(z)) else format_complex(z) for z in row))
        else:
            lines.append(",".join(repr(float(np.real(x))) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_correlation(path) -> CorrelationMatrix:
    from .jsa import JsaFormatError, _require, parse_header

    text = Path(path).read_text().splitlines()
    h = parse_header(text[0] if text else "", "corr")
    kind = h.get("kind")
    if kind not in KINDS:
        raise JsaFormatError(f"line 1: unknown kind {kind!r}")
    n, d, c = _require(h, "n", int), _require(h, "d", float), _require(h, "c", float)
    body = [t for t in text[1:] if t.strip()]
    if len(body) != n:
        raise JsaFormatError(f"dimension mismatch: header says n={n}, found {len(body)} rows")
    vals = np.array([[complex(x) for x in t.split(",")] for t in body])
    if kind == "spectral-S":
        axis = FrequencyGrid(c, d, n)
    else:
        axis = TimeGrid(d, n, c - (n - 1) / 2 * d)
    if kind in ("temporal-G2", "normalized-g2"):
        vals = vals.real
    mask = np.isnan(np.abs(vals))
    return CorrelationMatrix(axis, vals, kind, mask if mask.any() else None)
