"""Aggregate component statistics into the quantitative laws under study.

All logarithms are natural.  Law fitting conventionally uses only components
with at least 16 cells and area at least 32 h^2, which suppresses the
discretization floor; :func:`filter_for_laws` applies that default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .compgeo import ComponentStats

MIN_CELLS_DEFAULT = 16
MIN_AREA_CELLS_DEFAULT = 32


@dataclass(frozen=True)
class LawProfile:
    abscissa: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    resolution_h: float = float("nan")
    run_ids: tuple[str, ...] = ()

    def __post_init__(self):
        a = np.asarray(self.abscissa, dtype=float)
        if len(a) > 1 and not (np.all(np.diff(a) > 0) or np.all(np.diff(a) < 0)):
            raise ValueError("profile abscissa must be strictly monotone")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")


def filter_for_laws(
    stats: Sequence[ComponentStats],
    h: float,
    min_cells: int = MIN_CELLS_DEFAULT,
    min_area_cells: float = MIN_AREA_CELLS_DEFAULT,
) -> list[ComponentStats]:
    """Drop components below the law-fitting resolution floor."""
    floor = min_area_cells * h * h
    return [s for s in stats if s.cell_count >= min_cells and s.area >= floor]


def areas_of(stats: Sequence[ComponentStats]) -> np.ndarray:
    return np.array([s.area for s in stats], dtype=float)


def count_by_area(stats: Sequence[ComponentStats], eps: float) -> int:
    """Number of components whose area is at least ``eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return int(np.sum(areas_of(stats) >= eps)) if stats else 0


def legall_profile(
    stats: Sequence[ComponentStats],
    eps_grid: Sequence[float],
    resolution_h: float = float("nan"),
    run_ids: tuple[str, ...] = (),
) -> LawProfile:
    """Profile eps * (ln eps)^2 * N(eps) over the grid; the limiting constant
    for Brownian complements is 2 pi."""
    eps_grid = np.asarray(sorted(eps_grid), dtype=float)
    if len(eps_grid) == 0 or eps_grid[0] <= 0 or eps_grid[-1] >= math.exp(-2.0):
        raise ValueError("eps grid must lie in (0, e^-2)")
    areas = areas_of(stats)
    counts = np.array([int(np.sum(areas >= e)) for e in eps_grid]) if len(areas) else np.zeros(len(eps_grid), dtype=int)
    values = eps_grid * np.log(eps_grid) ** 2 * counts
    return LawProfile(eps_grid, values, counts, resolution_h, run_ids)


def sorted_area_law(
    stats: Sequence[ComponentStats],
    resolution_h: float = float("nan"),
    run_ids: tuple[str, ...] = (),
) -> LawProfile:
    """Profile i * (ln i)^2 * area_i for i >= 2 over areas sorted decreasing;
    the limiting constant is again 2 pi."""
    areas = np.sort(areas_of(stats))[::-1]
    if len(areas) < 2:
        return LawProfile(np.array([]), np.array([]), np.array([]), resolution_h, run_ids)
    idx = np.arange(2, len(areas) + 1, dtype=float)
    values = idx * np.log(idx) ** 2 * areas[1:]
    return LawProfile(idx, values, np.ones(len(idx), dtype=int), resolution_h, run_ids)


def weighted_sum(
    stats: Sequence[ComponentStats],
    theta: float,
    radius_kind: str = "out",
    variant: str = "shifted",
) -> float:
    """Sum over components of x^2 * w(x), x the chosen radius.

    ``variant='raw'`` uses w(x) = |ln x|^theta (theta >= 0 only; the weight
    has a pole at x = 1 for negative theta); ``'shifted'`` uses
    w(x) = (1 + |ln x|)^theta for any theta.
    """
    if radius_kind not in ("in", "out"):
        raise ValueError("radius_kind must be 'in' or 'out'")
    if variant not in ("raw", "shifted"):
        raise ValueError("variant must be 'raw' or 'shifted'")
    if variant == "raw" and theta < 0:
        raise ValueError("raw weight requires theta >= 0 (pole at radius 1)")
    x = np.array([s.in_radius if radius_kind == "in" else s.out_radius for s in stats])
    if len(x) == 0:
        return 0.0
    if np.any(x <= 0):
        raise ValueError("radii must be positive")
    logx = np.abs(np.log(x))
    w = np.power(logx, theta) if variant == "raw" else np.power(1.0 + logx, theta)
    return float(np.sum(x * x * w))


def dyadic_occupation_from_areas(areas: np.ndarray) -> dict[int, float]:
    """U_k = total area of components with area in [2^k, 2^(k+1))."""
    areas = np.asarray(areas, dtype=float)
    out: dict[int, float] = {}
    if len(areas) == 0:
        return out
    if np.any(areas <= 0):
        raise ValueError("areas must be positive")
    ks = np.floor(np.log2(areas)).astype(int)
    for k in np.unique(ks):
        out[int(k)] = float(math.fsum(areas[ks == k]))
    return out


def dyadic_occupation(stats: Sequence[ComponentStats]) -> dict[int, float]:
    return dyadic_occupation_from_areas(areas_of(stats))


def profile_csv(profile: LawProfile, fp) -> None:
    """CSV: abscissa,value,count."""
    close = False
    if isinstance(fp, (str, bytes)):
        fp = open(fp, "w", newline="")
        close = True
    try:
        fp.write("abscissa,value,count\n")
        for a, v, c in zip(profile.abscissa, profile.values, profile.counts):
            fp.write(f"{a!r},{v!r},{int(c)}\n")
    finally:
        if close:
            fp.close()
