"""Sampling and refinement of planar Brownian paths.

Paths are time-stamped polylines.  Exponential killing draws the Exp(1)
lifetime first and then samples a fixed-duration path, which matches the
independence of the motion and its killing clock and keeps every path a pure
function of ``(seed, mode, base_step)``.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import rng
from .shapes import Shape, segment_entry

BINARY_MAGIC = b"BMPATH01"


@dataclass(frozen=True)
class FixedHorizon:
    t_end: float


@dataclass(frozen=True)
class ExponentialRate1:
    """Unit-rate exponential killing; ``tau_realized`` is filled at sampling."""

    tau_realized: Optional[float] = None


KillMode = FixedHorizon | ExponentialRate1


@dataclass(frozen=True)
class PlanarPath:
    t: np.ndarray          # (n,) strictly increasing, t[0] == 0
    xy: np.ndarray         # (n, 2)
    kill_mode: KillMode
    seed: int
    base_step: float
    refine_rounds: int = 0

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration(self) -> float:
        return float(self.t[-1])

    def increments(self) -> np.ndarray:
        return np.diff(self.xy, axis=0)

    def increment_lengths(self) -> np.ndarray:
        d = self.increments()
        return np.hypot(d[:, 0], d[:, 1])


def sample_path(seed: int, mode: KillMode, base_step: float) -> PlanarPath:
    """Sample a planar Brownian path from the given seed.

    Per-step increments are independent bivariate Gaussians with
    per-coordinate variance equal to the step duration.  In exponential mode
    the Exp(1) lifetime is drawn first from the same stream, then covered by
    whole steps of ``base_step`` plus a final partial step of the exact
    residual.
    """
    if base_step <= 0:
        raise ValueError("base_step must be positive")
    g = rng.stream(seed, rng.PATH)
    if isinstance(mode, ExponentialRate1):
        total = float(g.exponential(1.0))
        mode = ExponentialRate1(tau_realized=total)
    elif isinstance(mode, FixedHorizon):
        if mode.t_end <= 0:
            raise ValueError("horizon must be positive")
        total = float(mode.t_end)
    else:
        raise TypeError(f"unsupported kill mode {mode!r}")

    n_full = int(total / base_step)
    residual = total - n_full * base_step
    dts = np.full(n_full, base_step)
    if residual > 1e-12 * base_step:
        dts = np.append(dts, residual)
    t = np.concatenate([[0.0], np.cumsum(dts)])
    t[-1] = total  # pin the endpoint against cumulative roundoff
    steps = g.standard_normal((len(dts), 2)) * np.sqrt(dts)[:, None]
    xy = np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])
    return PlanarPath(t=t, xy=xy, kill_mode=mode, seed=int(seed), base_step=float(base_step))


def refine_bridge(path: PlanarPath, max_step_length: float) -> PlanarPath:
    """Insert Brownian-bridge midpoints until all increments are short enough.

    Midpoints have the bridge law: mean of the endpoints plus a Gaussian with
    per-coordinate variance dt/4.  Original points (values and timestamps)
    are preserved exactly.  Deterministic: draws come from a dedicated stream
    keyed by the path seed and the refinement round.
    """
    if max_step_length <= 0:
        raise ValueError("max_step_length must be positive")
    if bool(np.all(path.increment_lengths() <= max_step_length)):
        return path
    g = rng.stream(path.seed, rng.REFINE, path.refine_rounds + 1)
    t, xy = path.t, path.xy
    while True:
        d = np.diff(xy, axis=0)
        lens = np.hypot(d[:, 0], d[:, 1])
        split = lens > max_step_length
        k = int(split.sum())
        if k == 0:
            break
        dt = np.diff(t)[split]
        mid_t = 0.5 * (t[:-1][split] + t[1:][split])
        mid_xy = 0.5 * (xy[:-1][split] + xy[1:][split])
        mid_xy = mid_xy + g.standard_normal((k, 2)) * np.sqrt(dt / 4.0)[:, None]
        # interleave: new position of old point i is i + (#splits before i)
        offsets = np.concatenate([[0], np.cumsum(split.astype(np.int64))])
        n_new = len(t) + k
        new_t = np.empty(n_new)
        new_xy = np.empty((n_new, 2))
        old_pos = np.arange(len(t)) + offsets
        new_t[old_pos] = t
        new_xy[old_pos] = xy
        mid_pos = old_pos[:-1][split] + 1
        new_t[mid_pos] = mid_t
        new_xy[mid_pos] = mid_xy
        t, xy = new_t, new_xy
    return replace(path, t=t, xy=xy, refine_rounds=path.refine_rounds + 1)


def first_hit(path: PlanarPath, shape: Shape, tol: float = 0.0) -> Optional[tuple[int, float]]:
    """First polyline segment of the path meeting the shape, as (index, time).

    Exact segment-circle / segment-segment intersections; a path starting
    inside a region shape reports index 0 at the initial time.  ``tol`` adds
    a proximity allowance against polyline shapes (half the refinement bound
    is the recommended value for discrete Brownian paths).
    """
    xy, t = path.xy, path.t
    for i in range(len(xy) - 1):
        s = segment_entry(shape, xy[i], xy[i + 1], tol=tol)
        if s is not None:
            return i, float(t[i] + s * (t[i + 1] - t[i]))
    return None


def export_csv(path: PlanarPath, fp) -> None:
    """Write the path as CSV with header ``t,x,y``."""
    close = False
    if isinstance(fp, (str, bytes)):
        fp = open(fp, "w", newline="")
        close = True
    try:
        fp.write("t,x,y\n")
        for ti, (x, y) in zip(path.t, path.xy):
            fp.write(f"{ti!r},{x!r},{y!r}\n")
    finally:
        if close:
            fp.close()


def export_binary(path: PlanarPath, fp) -> None:
    """Binary export: magic ``BMPATH01``, little-endian u64 count, then
    (t, x, y) triplets as little-endian float64."""
    close = False
    if isinstance(fp, (str, bytes)):
        fp = open(fp, "wb")
        close = True
    try:
        fp.write(BINARY_MAGIC)
        fp.write(struct.pack("<Q", len(path.t)))
        buf = np.column_stack([path.t, path.xy]).astype("<f8")
        fp.write(buf.tobytes())
    finally:
        if close:
            fp.close()


def read_binary(fp) -> tuple[np.ndarray, np.ndarray]:
    """Read a binary path export; returns (t, xy)."""
    close = False
    if isinstance(fp, (str, bytes)):
        fp = open(fp, "rb")
        close = True
    try:
        magic = fp.read(8)
        if magic != BINARY_MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        (n,) = struct.unpack("<Q", fp.read(8))
        buf = np.frombuffer(fp.read(24 * n), dtype="<f8").reshape(n, 3)
        return buf[:, 0].copy(), buf[:, 1:].copy()
    finally:
        if close:
            fp.close()
