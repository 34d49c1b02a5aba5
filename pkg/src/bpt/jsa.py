"""Joint spectral amplitudes: Gaussian pulsed model, CW squeezing profile,
and tabulated kernels with a plain-text CSV format.

Kernel values are dimensionless numbers tabulated against frequencies
measured in units of :data:`FREQUENCY_UNIT`. The physical kernel (units of
time) is ``values / FREQUENCY_UNIT``, which keeps the Schmidt coefficients
dimensionless and of order ``amplitude`` for THz-scale bandwidths.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .grid import FrequencyGrid, GridError

#: Reference angular frequency (rad/s) that JSA values are tabulated against.
FREQUENCY_UNIT = 1e12


class JsaFormatError(ValueError):
    """Malformed JSA or profile file."""


@dataclass(frozen=True)
class GaussianJsaParams:
    amplitude: float
    sigma_p: float
    sigma_c: float

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if not self.sigma_p > 0:
            raise ValueError(f"sigma_p must be > 0, got {self.sigma_p}")
        if not self.sigma_c > 0:
            raise ValueError(f"sigma_c must be > 0, got {self.sigma_c}")


@dataclass(frozen=True)
class CwProfileParams:
    amplitude: float
    sigma_c: float

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if not self.sigma_c > 0:
            raise ValueError(f"sigma_c must be > 0, got {self.sigma_c}")


@dataclass(frozen=True)
class TabulatedJsa:
    grid_a: FrequencyGrid
    grid_b: FrequencyGrid
    values: NDArray[np.complex128]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid_a.count, self.grid_b.count):
            raise ValueError(
                f"values shape {v.shape} does not match grids "
                f"({self.grid_a.count}, {self.grid_b.count})")
        if not np.all(np.isfinite(v)):
            raise ValueError("JSA entries must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def build_gaussian_jsa(params: GaussianJsaParams, grid_a: FrequencyGrid,
                       grid_b: FrequencyGrid) -> TabulatedJsa:
    """Tabulate ``A exp(-(Wa+Wb)^2 / 2 sp^2) exp(-(Wa-Wb)^2 / 2 sc^2)``."""
    wa = grid_a.offsets[:, None]
    wb = grid_b.offsets[None, :]
    pump = np.exp(-(wa + wb) ** 2 / (2 * params.sigma_p ** 2))
    phase_matching = np.exp(-(wa - wb) ** 2 / (2 * params.sigma_c ** 2))
    return TabulatedJsa(grid_a, grid_b, (params.amplitude * pump * phase_matching).astype(complex))


def build_cw_profile(params: CwProfileParams, grid: FrequencyGrid) -> NDArray[np.float64]:
    """Squeezing profile ``r(W) = A exp(-(2W)^2 / 2 sc^2)``."""
    w = grid.offsets
    return params.amplitude * np.exp(-(2 * w) ** 2 / (2 * params.sigma_c ** 2))


def build_cw_jsa(profile, grid: FrequencyGrid) -> TabulatedJsa:
    """Discretised CW kernel ``r(Wa) delta(Wa + Wb)`` on a symmetric grid.

    The delta function becomes ``1/dw`` on the anti-diagonal, so the
    quadrature-scaled singular values of the result are exactly ``profile``.
    """
    r = np.asarray(profile, dtype=float)
    if r.shape != (grid.count,):
        raise ValueError("profile length does not match grid")
    values = np.zeros((grid.count, grid.count), dtype=complex)
    idx = np.arange(grid.count)
    values[idx, idx[::-1]] = r * FREQUENCY_UNIT / grid.spacing
    return TabulatedJsa(grid, grid, values)


# -- CSV ---------------------------------------------------------------------

def format_complex(z: complex) -> str:
    """Lossless ``re+imj`` text form of a complex number."""
    re_, im = repr(float(z.real)), repr(float(z.imag))
    sign = "" if im.startswith("-") else "+"
    return f"{re_}{sign}{im}j"


def parse_header(line: str, kind: str, lineno: int = 1) -> dict[str, str]:
    parts = line.strip().split()
    if len(parts) < 3 or parts[0] != "#" or parts[1] != kind or parts[2] != "v1":
        raise JsaFormatError(f"line {lineno}: expected '# {kind} v1 ...' header, got {line.strip()!r}")
    fields = {}
    for token in parts[3:]:
        m = re.fullmatch(r"(\w+)=(\S+)", token)
        if not m:
            raise JsaFormatError(f"line {lineno}: malformed header field {token!r}")
        fields[m.group(1)] = m.group(2)
    return fields


def _require(fields: dict, key: str, conv, lineno: int = 1):
    try:
        return conv(fields[key])
    except KeyError:
        raise JsaFormatError(f"line {lineno}: header missing {key}=") from None
    except ValueError:
        raise JsaFormatError(f"line {lineno}: bad value for {key}: {fields[key]!r}") from None


def save_jsa(jsa: TabulatedJsa, path) -> None:
    ga, gb = jsa.grid_a, jsa.grid_b
    lines = [f"# jsa v1 na={ga.count} nb={gb.count} dwa={ga.spacing!r} dwb={gb.spacing!r} "
             f"ca={ga.center!r} cb={gb.center!r}"]
    for row in jsa.values:
        lines.append(",".join(format_complex(z) for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_jsa(path) -> TabulatedJsa:
    text = Path(path).read_text().splitlines()
    if not text:
        raise JsaFormatError("line 1: empty file")
    h = parse_header(text[0], "jsa")
    na, nb = _require(h, "na", int), _require(h, "nb", int)
    try:
        grid_a = FrequencyGrid(_require(h, "ca", float), _require(h, "dwa", float), na)
        grid_b = FrequencyGrid(_require(h, "cb", float), _require(h, "dwb", float), nb)
    except GridError as exc:
        raise JsaFormatError(f"line 1: {exc}") from None
    rows = [line for line in text[1:]]
    while rows and not rows[-1].strip():
        rows.pop()
    if len(rows) != na:
        raise JsaFormatError(f"dimension mismatch: header says na={na}, found {len(rows)} rows")
    values = np.empty((na, nb), dtype=complex)
    for i, line in enumerate(rows):
        lineno = i + 2
        cells = line.split(",")
        if len(cells) != nb:
            raise JsaFormatError(f"line {lineno} (row {i}): expected {nb} entries, found {len(cells)}")
        try:
            values[i] = [complex(c.strip()) for c in cells]
        except ValueError as exc:
            raise JsaFormatError(f"line {lineno} (row {i}): {exc}") from None
    return TabulatedJsa(grid_a, grid_b, values)


def save_profile(profile, grid: FrequencyGrid, path) -> None:
    r = np.asarray(profile, dtype=float)
    lines = [f"# cwprofile v1 n={grid.count} dw={grid.spacing!r} c={grid.center!r}"]
    lines += [repr(float(x)) for x in r]
    Path(path).write_text("\n".join(lines) + "\n")


def load_profile(path) -> tuple[NDArray[np.float64], FrequencyGrid]:
    text = [line for line in Path(path).read_text().splitlines()]
    if not text:
        raise JsaFormatError("line 1: empty file")
    h = parse_header(text[0], "cwprofile")
    n = _require(h, "n", int)
    try:
        grid = FrequencyGrid(_require(h, "c", float), _require(h, "dw", float), n)
    except GridError as exc:
        raise JsaFormatError(f"line 1: {exc}") from None
    body = [t for t in text[1:] if t.strip()]
    if len(body) != n:
        raise JsaFormatError(f"dimension mismatch: header says n={n}, found {len(body)} values")
    out = np.empty(n)
    for i, t in enumerate(body):
        try:
            out[i] = float(t)
        except ValueError:
            raise JsaFormatError(f"line {i + 2}: not a number: {t.strip()!r}") from None
    return out, grid
