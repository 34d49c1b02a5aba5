"""Image output: grayscale PPM heatmaps and the five-panel comparison figure."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def heatmap_bytes(matrix) -> bytes:
    """Binary PPM (P6): min -> black, max -> white, row 0 at the top.

    A constant matrix maps to mid-gray (128).
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise ValueError("heatmap needs a 2-D matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("heatmap entries must be finite")
    lo, hi = m.min(), m.max()
    if hi > lo:
        gray = np.rint((m - lo) / (hi - lo) * 255).astype(np.uint8)
    else:
        gray = np.full(m.shape, 128, dtype=np.uint8)
    h, w = gray.shape
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def render_heatmap(matrix, path) -> None:
    Path(path).write_bytes(heatmap_bytes(matrix))


def read_ppm(path) -> np.ndarray:
    """Gray levels of a P6 file written by :func:`render_heatmap`."""
    data = Path(path).read_bytes()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P6" or maxval != b"255":
        raise ValueError("not an 8-bit P6 image")
    w, h = map(int, dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(h, w, 3)[:, :, 0]


def _window(axis, keep):
    idx = np.flatnonzero(keep)
    return slice(idx[0], idx[-1] + 1) if idx.size else slice(None)


def render_comparison_figure(results, path, freq_window=4e12, time_window=5e-12) -> None:
    """Five rows (JSA, spectrum, intensity, |g1|, g2) by one column per scenario.

    Heatmaps use a grayscale map; axes are cropped to ``freq_window`` (rad/s)
    and ``time_window`` (s) about the origin.
    """
    from matplotlib.figure import Figure

    ncol = len(results)
    fig = Figure(figsize=(3.2 * ncol, 14))
    axes = fig.subplots(5, ncol, squeeze=False)
    for c, res in enumerate(results):
        w = res.freq_grid.offsets
        t = res.time_grid.samples
        fs = _window(w, np.abs(w) <= freq_window)
        ts = _window(t, np.abs(t) <= time_window)
        wext = [w[fs][0] / 1e12, w[fs][-1] / 1e12] * 2
        text = [t[ts][0] * 1e12, t[ts][-1] * 1e12] * 2

        ax = axes[0, c]
        ax.imshow(np.abs(res.jsa.values)[fs, fs], origin="lower", cmap="gray",
                  extent=wext, aspect="auto")
        ax.set_title(res.name)
        ax.set_xlabel(r"$\Omega_b$ (10$^{12}$ rad/s)")
        ax.set_ylabel(r"$\Omega_a$ (10$^{12}$ rad/s)")

        ax = axes[1, c]
        ax.plot(w[fs] / 1e12, res.spectrum[fs], color="k")
        ax.set_xlabel(r"$\Omega$ (10$^{12}$ rad/s)")
        ax.set_ylabel("spectral density (norm.)")

        ax = axes[2, c]
        ax.plot(t[ts] * 1e12, res.intensity[ts], color="k")
        ax.set_ylim(0, 1.05)
        ax.set_xlabel("t (ps)")
        ax.set_ylabel("intensity (norm.)")

        ax = axes[3, c]
        ax.imshow(np.nan_to_num(res.g1_abs[ts, ts]), origin="lower", cmap="gray",
                  vmin=0, vmax=1, extent=text, aspect="auto")
        ax.set_xlabel("$t_2$ (ps)")
        ax.set_ylabel("$t_1$ (ps)")

        ax = axes[4, c]
        ax.imshow(np.nan_to_num(res.g2[ts, ts], nan=1.0), origin="lower", cmap="gray",
                  vmin=1, vmax=2, extent=text, aspect="auto")
        ax.set_xlabel("$t_2$ (ps)")
        ax.set_ylabel("$t_1$ (ps)")
    fig.tight_layout()
    fig.savefig(path, format="png", dpi=80, metadata={"Software": None})
