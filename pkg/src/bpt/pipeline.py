"""Scenario configuration and the end-to-end simulation pipeline."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import correlations as corr
from .grid import FrequencyGrid, TimeGrid, dual_time_grid, make_frequency_grid
from .jsa import (CwProfileParams, GaussianJsaParams, TabulatedJsa, build_cw_jsa,
                  build_cw_profile, build_gaussian_jsa, save_jsa, save_profile)
from .photonstats import mode_statistics, n_bar_values, sample_photon_numbers, save_samples
from .render import render_comparison_figure, render_heatmap
from .schmidt import SchmidtDecomposition, save_schmidt, schmidt_decompose, schmidt_number

log = logging.getLogger(__name__)

OUTPUTS = ("jsa", "schmidt", "spectrum", "g1", "g2", "samples", "summary")
DEFAULT_N = 256
DEFAULT_AMPLITUDE = 0.1

TABLE1 = {
    "shorter": {"pump": "pulsed", "sigma_p": 2e12, "sigma_c": 2e12},
    "longer": {"pump": "pulsed", "sigma_p": 1.5e12, "sigma_c": 2.4e12},
    "cw": {"pump": "cw", "sigma_c": 3e12},
}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class GridSpec:
    center: float
    span: float
    n: int


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    pump: str
    sigma_c: float
    grid: GridSpec
    sigma_p: float | None = None
    amplitude: float = DEFAULT_AMPLITUDE
    outputs: tuple[str, ...] = OUTPUTS
    seed: int = 0
    shots: int = 1000

    def to_dict(self) -> dict:
        d = {"version": 1, "name": self.name, "pump": self.pump, "sigma_c": self.sigma_c,
             "amplitude": self.amplitude,
             "grid": {"center": self.grid.center, "span": self.grid.span, "n": self.grid.n},
             "outputs": list(self.outputs), "seed": self.seed, "shots": self.shots}
        if self.sigma_p is not None:
            d["sigma_p"] = self.sigma_p
        return d


_TOP_KEYS = {"version", "name", "pump", "sigma_p", "sigma_c", "amplitude", "grid",
             "outputs", "seed", "shots"}


def _number(raw, key, positive=False, nonneg=False):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)) or not math.isfinite(raw):
        raise ConfigError(key, f"expected a finite number, got {raw!r}")
    if positive and not raw > 0:
        raise ConfigError(key, f"must be > 0, got {raw!r}")
    if nonneg and not raw >= 0:
        raise ConfigError(key, f"must be >= 0, got {raw!r}")
    return float(raw)


def _integer(raw, key, minimum):
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(key, f"expected an integer, got {raw!r}")
    if raw < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {raw}")
    return raw


def parse_config(raw: dict) -> ScenarioConfig:
    """Validate a version-1 scenario dictionary; unknown keys are errors."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown field")
    if raw.get("version") != 1:
        raise ConfigError("version", f"expected 1, got {raw.get('version')!r}")
    name = raw.get("name")
    if not isinstance(name, str) or not name or "/" in name or name in (".", ".."):
        raise ConfigError("name", "expected a non-empty string usable as a directory name")
    pump = raw.get("pump")
    if pump not in ("pulsed", "cw"):
        raise ConfigError("pump", f"expected 'pulsed' or 'cw', got {pump!r}")
    if "sigma_c" not in raw:
        raise ConfigError("sigma_c", "required")
    sigma_c = _number(raw["sigma_c"], "sigma_c", positive=True)
    sigma_p = None
    if pump == "pulsed":
        if "sigma_p" not in raw:
            raise ConfigError("sigma_p", "required for a pulsed pump")
        sigma_p = _number(raw["sigma_p"], "sigma_p", positive=True)
    elif "sigma_p" in raw:
        raise ConfigError("sigma_p", "not allowed for a cw pump")
    amplitude = _number(raw.get("amplitude", DEFAULT_AMPLITUDE), "amplitude", nonneg=True)

    g = raw.get("grid", {})
    if not isinstance(g, dict):
        raise ConfigError("grid", "expected an object")
    for key in g:
        if key not in ("center", "span", "n"):
            raise ConfigError(f"grid.{key}", "unknown field")
    width = max(sigma_c, sigma_p or 0.0)
    center = _number(g.get("center", 0.0), "grid.center")
    span = _number(g.get("span", 12 * width), "grid.span", positive=True)
    n = _integer(g.get("n", DEFAULT_N), "grid.n", 32)
    if n > 4096 or n & (n - 1):
        raise ConfigError("grid.n", f"must be a power of two between 32 and 4096, got {n}")

    outputs = raw.get("outputs", list(OUTPUTS))
    if not isinstance(outputs, list) or not all(isinstance(o, str) for o in outputs):
        raise ConfigError("outputs", "expected a list of strings")
    for o in outputs:
        if o not in OUTPUTS:
            raise ConfigError("outputs", f"unknown output {o!r}; choose from {', '.join(OUTPUTS)}")
    outputs = tuple(o for o in OUTPUTS if o in outputs)
    seed = _integer(raw.get("seed", 0), "seed", 0)
    shots = _integer(raw.get("shots", 1000), "shots", 1)
    return ScenarioConfig(name=name, pump=pump, sigma_c=sigma_c, sigma_p=sigma_p,
                          amplitude=amplitude, grid=GridSpec(center, span, n),
                          outputs=outputs, seed=seed, shots=shots)


def load_config(path) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_config(raw)


def table1_config(name: str, amplitude: float = DEFAULT_AMPLITUDE, n: int = DEFAULT_N,
                  **overrides) -> ScenarioConfig:
    raw = {"version": 1, "name": name, "amplitude": amplitude, "grid": {"n": n},
           **TABLE1[name], **overrides}
    return parse_config(raw)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    freq_grid: FrequencyGrid
    time_grid: TimeGrid
    jsa: TabulatedJsa
    decomposition: SchmidtDecomposition
    S: corr.CorrelationMatrix
    G1: corr.CorrelationMatrix
    g1: corr.CorrelationMatrix
    g2n: corr.CorrelationMatrix
    profile: np.ndarray | None = None
    summary: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.config.name

    @property
    def spectrum(self) -> np.ndarray:
        return corr.normalized_peak(self.S.diagonal)

    @property
    def intensity(self) -> np.ndarray:
        return corr.normalized_peak(self.G1.diagonal)

    @property
    def g1_abs(self) -> np.ndarray:
        return np.abs(self.g1.values)

    @property
    def g2(self) -> np.ndarray:
        return np.real(self.g2n.values)


def simulate(config: ScenarioConfig) -> ScenarioResult:
    """Run the numerical pipeline for one scenario (no file output)."""
    spec = config.grid
    fgrid = make_frequency_grid(spec.center, spec.span, spec.n)
    tgrid = dual_time_grid(fgrid)
    profile = None
    if config.pump == "pulsed":
        params = GaussianJsaParams(config.amplitude, config.sigma_p, config.sigma_c)
        jsa = build_gaussian_jsa(params, fgrid, fgrid)
        d = schmidt_decompose(jsa)
        S = corr.spectral_correlation(d)
    else:
        profile = build_cw_profile(CwProfileParams(config.amplitude, config.sigma_c), fgrid)
        jsa = build_cw_jsa(profile, fgrid)
        beam = corr.cw_beam(profile, fgrid)
        d = corr.cw_decomposition(beam)
        S = corr.cw_spectral_matrix(beam)
    if d.n_modes == 0:
        raise corr.NumericalError("decomposition has no modes; amplitude must be > 0")
    G1 = corr.g1_matrix(d, tgrid)
    g1 = corr.g1_normalized(G1)
    g2n = corr.g2_normalized(G1)
    fwhm = corr.coherence_fwhm(G1)
    nk = n_bar_values(d.coefficients)
    summary = {
        "name": config.name,
        "K": schmidt_number(d),
        "g2_time_integrated": corr.g2_time_integrated(d, tgrid),
        "total_n_bar": float(nk.sum()),
        "coherence_fwhm_s": fwhm if math.isfinite(fwhm) else None,
        "stationary": corr.is_stationary(G1),
        "schmidt_coefficients": [float(r) for r in d.coefficients],
    }
    return ScenarioResult(config, fgrid, tgrid, jsa, d, S, G1, g1, g2n, profile, summary)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_table(path: Path, header: str, columns) -> None:
    rows = zip(*columns)
    lines = [header] + [",".join(repr(float(x)) for x in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def write_outputs(res: ScenarioResult, out_dir) -> dict:
    """Write the requested outputs of ``res`` into ``out_dir``; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, list[Path]] = {}
    cfg = res.config
    w = res.freq_grid.offsets
    t = res.time_grid.samples

    if "jsa" in cfg.outputs:
        p = [out / "jsa.csv", out / "jsa_abs.ppm"]
        save_jsa(res.jsa, p[0])
        render_heatmap(np.abs(res.jsa.values), p[1])
        if res.profile is not None:
            p.append(out / "cw_profile.csv")
            save_profile(res.profile, res.freq_grid, p[-1])
        files["jsa"] = p
    if "schmidt" in cfg.outputs:
        p = [out / "schmidt.csv", out / "schmidt_spectrum.csv"]
        save_schmidt(res.decomposition, p[0])
        r = res.decomposition.coefficients
        _write_table(p[1], "# k,r_k,n_bar_k", [np.arange(len(r)), r, n_bar_values(r)])
        files["schmidt"] = p
    if "spectrum" in cfg.outputs:
        p = [out / "spectrum.csv"]
        _write_table(p[0], "# omega_offset_rad_s,spectral_density_normalized", [w, res.spectrum])
        files["spectrum"] = p
    if "g1" in cfg.outputs:
        p = [out / "intensity.csv", out / "g1_abs.csv", out / "g1_abs.ppm"]
        _write_table(p[0], "# t_s,intensity_normalized", [t, res.intensity])
        corr.save_correlation(res.g1, p[1], magnitude=True)
        render_heatmap(np.nan_to_num(res.g1_abs), p[2])
        files["g1"] = p
    if "g2" in cfg.outputs:
        p = [out / "g2.csv", out / "g2.ppm"]
        corr.save_correlation(res.g2n, p[0])
        render_heatmap(np.nan_to_num(res.g2, nan=1.0), p[1])
        files["g2"] = p
    if "samples" in cfg.outputs:
        p = [out / "samples.csv"]
        stats = [mode_statistics(r) for r in res.decomposition.coefficients]
        save_samples(sample_photon_numbers(stats, cfg.seed, cfg.shots), cfg.seed, p[0])
        files["samples"] = p
    if "summary" in cfg.outputs:
        p = [out / "summary.json"]
        p[0].write_text(json.dumps(res.summary, indent=2) + "\n")
        files["summary"] = p

    manifest = {
        "scenario": cfg.name,
        "config": cfg.to_dict(),
        "outputs": {k: [{"path": f.name, "sha256": _sha256(f)} for f in v]
                    for k, v in files.items()},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def run_scenario(config: ScenarioConfig, out_dir) -> dict:
    log.info("running scenario %s", config.name)
    return write_outputs(simulate(config), out_dir)


def spectra_rms(a: ScenarioResult, b: ScenarioResult, points: int = 1001) -> float:
    """RMS difference of peak-normalised spectral densities on a common axis.

    The comparison window is where either spectrum exceeds 1e-3 of its peak.
    """
    lo = min(a.freq_grid.offsets[0], b.freq_grid.offsets[0])
    hi = max(a.freq_grid.offsets[-1], b.freq_grid.offsets[-1])
    x = np.linspace(lo, hi, points)
    sa = np.interp(x, a.freq_grid.offsets, a.spectrum, left=0.0, right=0.0)
    sb = np.interp(x, b.freq_grid.offsets, b.spectrum, left=0.0, right=0.0)
    keep = np.maximum(sa, sb) >= 1e-3
    return float(np.sqrt(np.mean((sa[keep] - sb[keep]) ** 2)))


def compare(results: list[ScenarioResult]) -> dict:
    names = [r.name for r in results]
    fwhm = {r.name: r.summary["coherence_fwhm_s"] for r in results}
    as_num = [math.inf if fwhm[n] is None else fwhm[n] for n in names]
    ks = [r.summary["K"] for r in results]
    return {
        "order": names,
        "K": {r.name: r.summary["K"] for r in results},
        "coherence_fwhm_s": fwhm,
        "g2_time_integrated": {r.name: r.summary["g2_time_integrated"] for r in results},
        "K_increasing": all(x < y for x, y in zip(ks, ks[1:])),
        "coherence_decreasing": all(x > y for x, y in zip(as_num, as_num[1:])),
        "spectra_rms": {f"{a.name}/{b.name}": spectra_rms(a, b)
                        for i, a in enumerate(results) for b in results[i + 1:]},
    }


def run_table1(out_dir, threads: int = 1, amplitude: float = DEFAULT_AMPLITUDE,
               n: int = DEFAULT_N, figure: bool = True) -> dict:
    """Run the shorter, longer and CW scenarios plus a comparison report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    configs = [table1_config(name, amplitude=amplitude, n=n) for name in TABLE1]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(simulate, configs))
        manifests = list(pool.map(lambda r: write_outputs(r, out / r.name), results))
    comparison = compare(results)
    (out / "comparison.json").write_text(json.dumps(comparison, indent=2) + "\n")
    files = [out / "comparison.json"]
    if figure:
        render_comparison_figure(results, out / "figure1.png")
        files.append(out / "figure1.png")
    return {
        "scenarios": {m["scenario"]: m for m in manifests},
        "outputs": {"comparison": [{"path": f.name, "sha256": _sha256(f)} for f in files]},
    }
