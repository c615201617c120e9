"""Cross-Wigner distributions on phase-space grids.

    W_{f,g}(x, xi) = int exp(-2 pi i <xi, y>) f(x + y/2) conj(g(x - y/2)) dy

is evaluated at every sample ``x`` of the function grid and on the centered
reciprocal grid in ``xi``.  The half-step values ``f(x +- y/2)`` are read from
a copy of ``f`` on the doubled-resolution lattice.  Functions are zero outside
their sampling window.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import GridError
from .grid import GridSpec, SampledFunction, check_same_grid, spline_interpolate

HALF_SAMPLE_METHODS = ("fourier", "linear")


@dataclass(frozen=True, eq=False)
class WignerField:
    """Phase-space samples: axes are the d space axes followed by d frequency axes."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if self.grid.dim % 2:
            raise GridError("phase-space grids have an even number of axes")
        values = np.asarray(self.values)
        if values.shape != self.grid.shape:
            raise GridError("values do not match the phase-space grid")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.grid.dim // 2

    @property
    def space_grid(self) -> GridSpec:
        d = self.d
        return GridSpec(self.grid.lo[:d], self.grid.hi[:d], self.grid.n[:d])

    @property
    def freq_grid(self) -> GridSpec:
        d = self.d
        return GridSpec(self.grid.lo[d:], self.grid.hi[d:], self.grid.n[d:])

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def max_imag(self) -> float:
        return float(np.max(np.abs(np.imag(self.values))))

    def total_integral(self) -> complex:
        return complex(np.sum(self.values) * self.grid.cell_volume)

    def evaluate(self, points: np.ndarray, order: int = 3) -> np.ndarray:
        """Spline interpolation at phase-space points (..., 2d); zero off-window."""
        return spline_interpolate(self.values, self.grid, points, order)

    def slice_csv(self, path: str | Path | None = None, *, freq_index: int | None = None,
                  space_index: int | None = None) -> str:
        """CSV of a 1-d slice (d = 1 only) at a fixed frequency or space index.

        Header ``axis0,re,im``; without an index the central frequency row is
        written.
        """
        if self.d != 1:
            raise GridError("slices are exported for d = 1 fields")
        if freq_index is not None and space_index is not None:
            raise ValueError("fix either a frequency or a space index, not both")
        if space_index is not None:
            grid, vals = self.freq_grid, self.values[space_index, :]
        else:
            k = self.grid.n[1] // 2 if freq_index is None else freq_index
            grid, vals = self.space_grid, self.values[:, k]
        return SampledFunction(grid, vals).to_csv(path)

    def to_csv(self, path: str | Path | None = None) -> str:
        """Full field, header ``axis0,...,axis{2d-1},re,im``."""
        coords = self.grid.mesh().reshape(-1, self.grid.dim)
        vals = self.values.reshape(-1)
        header = ",".join([f"axis{i}" for i in range(self.grid.dim)] + ["re", "im"])
        lines = [header]
        lines += [",".join(repr(float(c)) for c in row) + f",{float(v.real)!r},{float(v.imag)!r}"
                  for row, v in zip(coords, vals)]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def half_sample(f: SampledFunction, method: str = "fourier") -> np.ndarray:
    """Samples of ``f`` on the lattice of step h/2 (2n points per axis).

    Even indices reproduce the original samples.  ``fourier`` zero-pads the
    spectrum (spectrally exact for band-limited data); ``linear`` averages
    neighbours, which is the right value at a jump sitting on a cell face.
    """
    if method not in HALF_SAMPLE_METHODS:
        raise ValueError(f"half-sample method must be one of {HALF_SAMPLE_METHODS}")
    vals = np.asarray(f.values)
    for ax in range(vals.ndim):
        n = vals.shape[ax]
        if method == "fourier":
            vals = signal.resample(vals, 2 * n, axis=ax)
        else:
            nxt = np.concatenate([np.take(vals, np.arange(1, n), axis=ax),
                                  np.zeros_like(np.take(vals, [0], axis=ax))], axis=ax)
            mids = 0.5 * (vals + nxt)
            fine = np.stack([vals, mids], axis=ax + 1)
            vals = fine.reshape(vals.shape[:ax] + (2 * n,) + vals.shape[ax + 1:])
    return vals


def _profile_indices(n: int, rows: np.ndarray):
    # fine indices 2j + m and 2j - m for lags m = -n .. n-1
    m = np.arange(-n, n)
    a = 2 * rows[:, None] + m[None, :]
    b = 2 * rows[:, None] - m[None, :]
    ok = (a >= 0) & (a < 2 * n) & (b >= 0) & (b < 2 * n)
    return np.clip(a, 0, 2 * n - 1), np.clip(b, 0, 2 * n - 1), ok


def _fold(p: np.ndarray, n: int, axis: int) -> np.ndarray:
    # lag m and m + n hit the same frequency samples (n even), so sum them
    lo = np.take(p, np.arange(0, n), axis=axis)
    hi = np.take(p, np.arange(n, 2 * n), axis=axis)
    return lo + hi


def cross_wigner(f: SampledFunction, g: SampledFunction | None = None, *,
                 half_sample_method: str = "fourier", chunk_rows: int = 256) -> WignerField:
    """Cross-Wigner distribution W_{f,g} on (space grid) x (reciprocal grid).

    ``g`` defaults to ``f``.  Rows of the output are independent and are
    processed in chunks of ``chunk_rows`` space samples to bound memory.
    """
    if g is None:
        g = f
    check_same_grid(f.grid, g.grid)
    grid = f.grid
    ff = half_sample(f, half_sample_method)
    gg = np.conj(half_sample(g, half_sample_method))
    freq = grid.reciprocal()
    out_grid = GridSpec(grid.lo + freq.lo, grid.hi + freq.hi, grid.n + freq.n)
    if grid.dim == 1:
        values = _wigner_1d(ff, gg, grid, chunk_rows)
    else:
        values = _wigner_2d(ff, gg, grid, max(1, chunk_rows // grid.n[1]))
    return WignerField(out_grid, values)


def _wigner_1d(ff, gg, grid, chunk_rows):
    n = grid.n[0]
    h = grid.step[0]
    sign = (-1.0) ** np.arange(n)
    out = np.empty((n, n), dtype=complex)
    for start in range(0, n, chunk_rows):
        rows = np.arange(start, min(start + chunk_rows, n))
        a, b, ok = _profile_indices(n, rows)
        prof = np.where(ok, ff[a] * gg[b], 0.0)
        folded = _fold(prof, n, axis=1) * sign
        out[rows] = h * np.fft.fft(folded, axis=1)
    return out


def _wigner_2d(ff, gg, grid, chunk_rows):
    n0, n1 = grid.n
    h0, h1 = grid.step
    s0 = (-1.0) ** np.arange(n0)
    s1 = (-1.0) ** np.arange(n1)
    sign = np.outer(s0, s1)
    out = np.empty((n0, n1, n0, n1), dtype=complex)
    a1, b1, ok1 = _profile_indices(n1, np.arange(n1))
    for start in range(0, n0, chunk_rows):
        rows = np.arange(start, min(start + chunk_rows, n0))
        a0, b0, ok0 = _profile_indices(n0, rows)
        # prof[j0, j1, m0, m1]
        A = ff[a0[:, None, :, None], a1[None, :, None, :]]
        B = gg[b0[:, None, :, None], b1[None, :, None, :]]
        ok = ok0[:, None, :, None] & ok1[None, :, None, :]
        prof = np.where(ok, A * B, 0.0)
        folded = _fold(_fold(prof, n0, axis=2), n1, axis=3) * sign
        out[rows] = h0 * h1 * np.fft.fft2(folded, axes=(2, 3))
    return out


def wigner(f: SampledFunction, **kw) -> WignerField:
    return cross_wigner(f, f, **kw)


def box_wigner_oracle(x, xi):
    """Closed-form Wigner distribution of the box chi_[-1/2, 1/2].

    sin(2 pi (1 - 2|x|) xi) / (pi xi) for |x| < 1/2 (limit 2(1 - 2|x|) at
    xi = 0) and zero otherwise.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    width = 1.0 - 2.0 * np.abs(x)
    inside = (x > -0.5) & (x < 0.5)
    val = 2.0 * width * np.sinc(2.0 * width * xi)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def moyal_pairing(f: SampledFunction, g: SampledFunction, **kw) -> complex:
    """<W_f, W_g> over phase space; compare with |<f, g>|^2."""
    check_same_grid(f.grid, g.grid)
    wf = wigner(f, **kw)
    wg = wigner(g, **kw)
    return complex(np.vdot(wg.values, wf.values) * wf.grid.cell_volume)


@dataclass(frozen=True)
class Marginals:
    space: SampledFunction      # int W dxi, compare with |f(x)|^2
    frequency: SampledFunction  # int W dx, compare with |F f(xi)|^2
    total: complex


def marginals(w: WignerField) -> Marginals:
    d = w.d
    sp_axes = tuple(range(d))
    fr_axes = tuple(range(d, 2 * d))
    dxi = w.freq_grid.cell_volume
    dx = w.space_grid.cell_volume
    space = SampledFunction(w.space_grid, np.sum(w.values, axis=fr_axes) * dxi)
    freq = SampledFunction(w.freq_grid, np.sum(w.values, axis=sp_axes) * dx)
    return Marginals(space, freq, w.total_integral())


def abs_mass_in_window(w: WignerField, xi_max: float) -> float:
    """int int_{|xi| <= xi_max} |W| over the field (d = 1)."""
    if w.d != 1:
        raise GridError("window mass is defined for d = 1")
    xi = w.freq_grid.axis(0)
    sel = np.abs(xi) <= xi_max
    return float(np.sum(np.abs(w.values[:, sel])) * w.grid.cell_volume)
