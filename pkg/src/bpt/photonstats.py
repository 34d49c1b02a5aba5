"""Per-mode thermal statistics of the reduced twin-beam state.

Each Schmidt mode of one beam is diagonal in its Fock basis with geometric
photon-number distribution, i.e. a Gibbs state ``exp(-alpha n) / Z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ModeStatistics:
    """Squeezing ``r``, occupation ``n_bar``, Gibbs parameter and partition function.

    ``alpha`` is ``None`` for the vacuum (``r == 0``), where the Gibbs
    parameter diverges.
    """

    r: float
    n_bar: float
    alpha: float | None
    z: float

    @property
    def is_vacuum(self) -> bool:
        return self.alpha is None

    @property
    def ratio(self) -> float:
        """``exp(-alpha) = tanh(r)^2 = n_bar / (1 + n_bar)``."""
        return 0.0 if self.alpha is None else math.exp(-self.alpha)

    def to_dict(self) -> dict:
        return {"r": self.r, "n_bar": self.n_bar,
                "alpha": "vacuum" if self.alpha is None else self.alpha, "z": self.z}


def _check_r(r: float) -> float:
    r = float(r)
    if not math.isfinite(r) or r < 0:
        raise ValueError(f"squeezing parameter must be finite and >= 0, got {r}")
    return r


def mode_statistics(r: float) -> ModeStatistics:
    r = _check_r(r)
    n_bar = math.sinh(r) ** 2
    if r == 0:
        return ModeStatistics(0.0, 0.0, None, 1.0)
    # alpha = -2 ln tanh r = 2 ln coth r, written to stay accurate for large r
    alpha = 2 * math.log1p(2 / math.expm1(2 * r))
    return ModeStatistics(r, n_bar, alpha, 1 + n_bar)


def r_from_alpha(alpha: float) -> float:
    """Inverse of the Gibbs map: ``tanh(r)^2 = exp(-alpha)``."""
    if alpha is None or alpha == math.inf:
        return 0.0
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    one_minus = -math.expm1(-alpha / 2)  # 1 - tanh r
    return 0.5 * math.log((2 - one_minus) / one_minus)


def statistics_from_alpha(alpha: float) -> ModeStatistics:
    return mode_statistics(r_from_alpha(alpha))


def n_bar_values(coefficients) -> np.ndarray:
    return np.sinh(np.asarray(coefficients, dtype=float)) ** 2


def photon_pmf(n_bar: float, n_max: int | None = None) -> np.ndarray:
    """Geometric distribution ``P_n = q^n / (1 + n_bar)``, ``q = n_bar / (1 + n_bar)``.

    ``n_max`` defaults to the smallest cutoff holding all but 1e-12 of the
    probability mass.
    """
    if not n_bar >= 0:
        raise ValueError(f"n_bar must be >= 0, got {n_bar}")
    q = n_bar / (1 + n_bar)
    if n_max is None:
        n_max = 0 if q == 0 else max(0, math.ceil(math.log(1e-12) / math.log(q)) - 1)
    n = np.arange(n_max + 1)
    with np.errstate(under="ignore"):
        return q ** n / (1 + n_bar)


def sample_photon_numbers(stats: Sequence[ModeStatistics], seed: int, shots: int) -> np.ndarray:
    """Draw independent geometric photon counts for each mode.

    Each mode ``k`` gets its own Philox stream keyed by ``(seed, k)``, and
    counts come from the inverse CDF ``floor(ln U / ln q)`` with
    ``U`` uniform on (0, 1]. Column ``k`` therefore does not depend on how
    many other modes are sampled.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    out = np.zeros((shots, len(stats)), dtype=np.int64)
    for k, st in enumerate(stats):
        if st.n_bar == 0:
            continue
        gen = np.random.Generator(np.random.Philox(key=np.array([seed, k], dtype=np.uint64)))
        u = 1.0 - gen.random(shots)
        log_q = math.log(st.n_bar) - math.log1p(st.n_bar)
        out[:, k] = np.floor(np.log(u) / log_q).astype(np.int64)
    return out


def save_samples(samples: np.ndarray, seed: int, path) -> None:
    samples = np.asarray(samples)
    lines = [f"# samples v1 seed={seed} shots={samples.shape[0]}"]
    lines += [",".join(str(int(v)) for v in row) for row in samples]
    Path(path).write_text("\n".join(lines) + "\n")


def load_samples(path) -> tuple[np.ndarray, int]:
    from .jsa import JsaFormatError, _require, parse_header

    text = Path(path).read_text().splitlines()
    h = parse_header(text[0] if text else "", "samples")
    seed, shots = _require(h, "seed", int), _require(h, "shots", int)
    body = [t for t in text[1:] if t.strip()]
    if len(body) != shots:
        raise JsaFormatError(f"dimension mismatch: header says shots={shots}, found {len(body)} rows")
    return np.array([[int(c) for c in t.split(",")] for t in body], dtype=np.int64), seed
