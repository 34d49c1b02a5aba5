"""Schmidt decomposition of tabulated joint spectral amplitudes.

The numerical route is a quadrature-weighted SVD; the analytic route uses
Mehler's formula for the double-Gaussian kernel and is kept as an
independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .grid import FrequencyGrid
from .jsa import FREQUENCY_UNIT, GaussianJsaParams, TabulatedJsa

DEFAULT_REL_TOL = 1e-6

# relative closeness used to detect tied peaks and degenerate coefficients
_TIE_RTOL = 1e-8


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Schmidt data ``J(wa, wb) = sum_k r_k phi_k(wa) psi_k(wb)``.

    ``modes_a[:, k]`` and ``modes_b[:, k]`` are orthonormal under the
    ``dw * sum`` quadrature of their grids. Coefficients are dimensionless
    (see :data:`bpt.jsa.FREQUENCY_UNIT`).
    """

    coefficients: NDArray[np.float64]
    modes_a: NDArray[np.complex128]
    modes_b: NDArray[np.complex128]
    grid_a: FrequencyGrid
    grid_b: FrequencyGrid

    @property
    def n_modes(self) -> int:
        return len(self.coefficients)


def _peak_index(col) -> int:
    mag = np.abs(col)
    top = mag.max()
    return int(np.flatnonzero(mag >= top * (1 - _TIE_RTOL))[0])


def _fix_phases(modes_a, modes_b):
    """Make the largest entry of each beam-a mode real and positive.

    The beam-b mode takes the conjugate phase so the product is unchanged;
    for tied peaks (odd modes on symmetric grids) the lowest index wins.
    """
    for k in range(modes_a.shape[1]):
        i = _peak_index(modes_a[:, k])
        ph = modes_a[i, k] / abs(modes_a[i, k])
        modes_a[:, k] /= ph
        modes_b[:, k] *= ph
        modes_a[i, k] = modes_a[i, k].real
    return modes_a, modes_b


def _order(coeffs, modes_a):
    # descending by value; near-equal values ordered by peak grid index
    peaks = np.array([_peak_index(modes_a[:, k]) for k in range(len(coeffs))], dtype=int)
    order = list(np.argsort(-coeffs, kind="stable"))
    if not order:
        return np.array(order, dtype=int)
    scale = coeffs[order[0]]
    groups, cur = [], [order[0]]
    for k in order[1:]:
        if abs(coeffs[cur[-1]] - coeffs[k]) <= _TIE_RTOL * scale:
            cur.append(k)
        else:
            groups.append(cur)
            cur = [k]
    groups.append(cur)
    return np.array([k for g in groups for k in sorted(g, key=lambda j: peaks[j])], dtype=int)


def schmidt_decompose(jsa: TabulatedJsa, rel_tol: float = DEFAULT_REL_TOL) -> SchmidtDecomposition:
    """Numerical Schmidt decomposition of a tabulated kernel.

    Parameters
    ----------
    jsa : TabulatedJsa
    rel_tol : float
        Modes with ``r_k < rel_tol * r_0`` are dropped; exact zeros are
        always dropped.

    Notes
    -----
    With matrix singular values ``s_k`` the continuous-kernel coefficients
    are ``s_k sqrt(dwa dwb) / FREQUENCY_UNIT`` and the singular vectors are
    divided by ``sqrt(dw)``. Degenerate subspaces are only defined up to a
    unitary rotation; every correlation function built from the result is
    invariant under that rotation.
    """
    if not 0 <= rel_tol < 1:
        raise ValueError(f"rel_tol must lie in [0, 1), got {rel_tol}")
    m = np.asarray(jsa.values, dtype=complex)
    if m.size == 0:
        raise ValueError("empty JSA")
    if not np.all(np.isfinite(m)):
        raise ValueError("JSA contains non-finite entries")
    ga, gb = jsa.grid_a, jsa.grid_b
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    r = s * math.sqrt(ga.spacing * gb.spacing) / FREQUENCY_UNIT
    keep = (r > 0) & (r >= rel_tol * (r[0] if len(r) else 0.0))
    r = r[keep]
    modes_a = u[:, keep] / math.sqrt(ga.spacing)
    modes_b = vh.T[:, keep] / math.sqrt(gb.spacing)
    modes_a, modes_b = _fix_phases(modes_a, modes_b)
    order = _order(r, modes_a)
    return SchmidtDecomposition(r[order], modes_a[:, order], modes_b[:, order], ga, gb)


def hermite_functions(k_max: int, x) -> NDArray[np.float64]:
    """Orthonormal Hermite functions ``h_0 .. h_{k_max-1}`` at ``x`` (columns)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((x.size, k_max))
    out[:, 0] = math.pi ** -0.25 * np.exp(-x ** 2 / 2)
    if k_max > 1:
        out[:, 1] = math.sqrt(2.0) * x * out[:, 0]
    for k in range(1, k_max - 1):
        out[:, k + 1] = (math.sqrt(2.0 / (k + 1)) * x * out[:, k]
                         - math.sqrt(k / (k + 1)) * out[:, k - 1])
    return out


def mehler_ratio(sigma_p: float, sigma_c: float) -> float:
    """Signed ratio ``mu = (sp - sc)/(sp + sc)``; ``r_k`` scales as ``|mu|^k``."""
    return (sigma_p - sigma_c) / (sigma_p + sigma_c)


def analytic_gaussian_schmidt(params: GaussianJsaParams, k_max: int,
                              grid_a: FrequencyGrid, grid_b: FrequencyGrid) -> SchmidtDecomposition:
    """Closed-form Schmidt data of the double-Gaussian kernel.

    Mehler's formula gives Hermite-function modes ``sqrt(b) h_k(b W)`` with
    ``b = sqrt(2 / (sp sc))`` and coefficients
    ``r_k = A sqrt(pi (1 - mu^2)) / b * |mu|^k``; beam-b modes carry the
    extra sign ``sign(mu)^k``.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    mu = mehler_ratio(params.sigma_p, params.sigma_c)
    beta = math.sqrt(2.0 / (params.sigma_p * params.sigma_c))
    if mu == 0:
        k_max = 1
    k = np.arange(k_max)
    r0 = params.amplitude * math.sqrt(math.pi * (1 - mu ** 2)) / beta / FREQUENCY_UNIT
    coeffs = r0 * np.abs(mu) ** k
    modes_a = math.sqrt(beta) * hermite_functions(k_max, beta * grid_a.offsets).astype(complex)
    signs = np.sign(mu) ** k if mu != 0 else np.ones(k_max)
    modes_b = math.sqrt(beta) * hermite_functions(k_max, beta * grid_b.offsets) * signs
    modes_a, modes_b = _fix_phases(modes_a, modes_b.astype(complex))
    keep = coeffs > 0
    return SchmidtDecomposition(coeffs[keep], modes_a[:, keep], modes_b[:, keep], grid_a, grid_b)


def reconstruct_jsa(d: SchmidtDecomposition) -> TabulatedJsa:
    values = (d.modes_a * d.coefficients) @ d.modes_b.T * FREQUENCY_UNIT
    return TabulatedJsa(d.grid_a, d.grid_b, values)


def schmidt_number(d: SchmidtDecomposition) -> float:
    """Effective mode count ``(sum r^2)^2 / sum r^4``."""
    lam = np.asarray(d.coefficients, dtype=float) ** 2
    if lam.size == 0 or not np.any(lam > 0):
        raise ValueError("Schmidt number undefined for an all-zero decomposition")
    lam = lam / lam.max()
    return float(lam.sum() ** 2 / np.sum(lam ** 2))


def save_schmidt(d: SchmidtDecomposition, path) -> None:
    """One row per mode: ``r_k``, then re/im pairs of phi_k, then of psi_k."""
    lines = [f"# schmidt v1 k={d.n_modes}"]
    for k in range(d.n_modes):
        cells = [repr(float(d.coefficients[k]))]
        for col in (d.modes_a[:, k], d.modes_b[:, k]):
            for z in col:
                cells += [repr(float(z.real)), repr(float(z.imag))]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def load_schmidt(path, grid_a: FrequencyGrid, grid_b: FrequencyGrid) -> SchmidtDecomposition:
    from .jsa import JsaFormatError, _require, parse_header

    text = Path(path).read_text().splitlines()
    h = parse_header(text[0] if text else "", "schmidt")
    k = _require(h, "k", int)
    body = [t for t in text[1:] if t.strip()]
    if len(body) != k:
        raise JsaFormatError(f"dimension mismatch: header says k={k}, found {len(body)} rows")
    width = 1 + 2 * (grid_a.count + grid_b.count)
    coeffs = np.empty(k)
    ma = np.empty((grid_a.count, k), dtype=complex)
    mb = np.empty((grid_b.count, k), dtype=complex)
    for i, line in enumerate(body):
        cells = line.split(",")
        if len(cells) != width:
            raise JsaFormatError(f"line {i + 2} (mode {i}): expected {width} entries, found {len(cells)}")
        vals = np.array([float(c) for c in cells])
        coeffs[i] = vals[0]
        pairs = vals[1:].reshape(-1, 2)
        z = pairs[:, 0] + 1j * pairs[:, 1]
        ma[:, i], mb[:, i] = z[:grid_a.count], z[grid_a.count:]
    return SchmidtDecomposition(coeffs, ma, mb, grid_a, grid_b)

