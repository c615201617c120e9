"""Named test functions and wavelets used by the command line.

A function spec is a preset (``gaussian``, ``hermiteN``, ``box``,
``bump``, ``bump(Yj)``), a CSV path, or an expression in ``x`` (d = 1)
or ``x, y`` (d = 2) such as ``exp(-pi*x*x)``.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from . import wavelets as wv
from .errors import ReproLabError
from .expr import Expression
from .grid import GridSpec, SampledFunction


class SpecError(ReproLabError, ValueError):
    """Unknown preset or malformed function spec."""


# default sampling per group
GRIDS = {
    "GABOR": lambda: GridSpec.symmetric(8, 1024, 1, cell_centered=True),
    "GABOR(2)": lambda: GridSpec.symmetric(8, 128, 2, cell_centered=True),
    "WAVELET(dilation)": lambda: GridSpec.symmetric(16, 2048),
    "WAVELET(similitude)": lambda: GridSpec.symmetric(8, 128, 2),
    "H1": lambda: GridSpec.symmetric(4, 4096, 1, cell_centered=True),
    "TDW": lambda: GridSpec.symmetric(4, 256, 2, cell_centered=True),
    "TDH": lambda: GridSpec.symmetric(4, 256, 2, cell_centered=True),
    "TDS": lambda: GridSpec.symmetric(4, 256, 2, cell_centered=True),
    "SIM2": lambda: GridSpec.symmetric(4, 256, 2, cell_centered=True),
}

# bump placement per sheet: (center, radius)
SHEET_BUMPS = {
    ("TDH", "Y1"): ((-2.0, 0.3), 0.6),
    ("TDW", "Y1"): ((1.5, 1.5), 0.6),
    ("TDW", "Y2"): ((-1.5, 1.5), 0.6),
    ("H1", "Y1"): ((1.5,), 0.4),
    ("TDS", "Y1"): ((0.0, 1.5), 0.6),
    ("SIM2", "Y1"): ((0.0, 1.5), 0.6),
}


def default_grid(group) -> GridSpec:
    name = getattr(group, "name", str(group))
    if name not in GRIDS:
        raise SpecError(f"no default grid for {name}")
    return GRIDS[name]()


def _bump_on_sheet(group_name: str, sheet: str, grid: GridSpec) -> SampledFunction:
    neg = sheet.startswith("-")
    key = (group_name, sheet.lstrip("-"))
    if key not in SHEET_BUMPS:
        raise SpecError(f"no bump placement for sheet {sheet} of {group_name}")
    center, radius = SHEET_BUMPS[key]
    center = -np.asarray(center) if neg else np.asarray(center)
    return wv.bump(grid, center, radius)


def function_from_spec(spec: str, grid: GridSpec, group_name: str | None = None) -> SampledFunction:
    text = spec.strip()
    low = text.lower()
    if low.endswith(".csv") and Path(text).exists():
        return SampledFunction.from_csv(text)
    if low == "gaussian":
        return wv.gaussian(grid)
    m = re.fullmatch(r"hermite(\d+)", low)
    if m:
        return wv.hermite(int(m.group(1)), grid)
    if low == "box":
        return wv.box(grid)
    m = re.fullmatch(r"bump(?:\((-?y\d)\))?", low)
    if m:
        sheet = (m.group(1) or "y1").upper()
        if group_name is None or group_name not in {k[0] for k in SHEET_BUMPS}:
            if grid.dim == 1:
                return wv.bump(grid, [0.0], 1.0)
            return wv.bump(grid, np.zeros(grid.dim), 1.0)
        return _bump_on_sheet(group_name, sheet, grid)
    names = ("x",) if grid.dim == 1 else ("x", "y")
    expr = Expression(text, names)
    mesh = grid.mesh()
    env = {n: mesh[..., i] for i, n in enumerate(names)}
    vals = np.broadcast_to(np.asarray(expr(**env), dtype=complex), grid.shape)
    return SampledFunction(grid, np.array(vals))


WAVELET_NAMES = ("gaussian", "hermiteN", "box", "mexican-hat", "h1", "tensor", "tdh", "<file.csv>")


def wavelet_from_name(name: str, group) -> SampledFunction:
    """Window for ``group``: a preset, the constructed class-E wavelets or a CSV file."""
    key = name.strip().lower()
    gname = getattr(group, "name", "")
    if key.endswith(".csv"):
        return SampledFunction.from_csv(name)
    if key in ("h1",):
        return wv.h1_wavelet()
    if key in ("tensor", "tdw"):
        return wv.tdw_tensor_wavelet()
    if key in ("tdh", "tdh-bump"):
        return wv.tdh_wavelet()[0]
    if key == "mexican-hat":
        return wv.mexican_hat(default_grid(group) if gname.startswith("WAVELET") else None)
    if key in ("gaussian", "box") or re.fullmatch(r"hermite\d+", key):
        return function_from_spec(key, default_grid(group), gname)
    raise SpecError(f"unknown wavelet {name!r}; choose from {', '.join(WAVELET_NAMES)}")
