"""The exact KNK two-sided hull, point-to-curve errors, and error sweeps.

For the constant drivers -1, +1 with equal weights, the hull is the pair of
arcs

    sqrt(2 theta / sin(2 theta)) * (+-cos(theta) + i sin(theta)),   0 < theta < pi/2,

a curve rising from the feet +-1 and bending toward the imaginary axis.  The
radius 2 theta / sin(2 theta) is >= 1 and increases monotonically in theta.
Simulated traces are scored by their maximum distance to this curve, split by
the side (driver) each point came from.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import json

import numpy as np

from .driving import WeightVector, build_controlled_plan, build_random_plan
from .errors import NotKnkInstance, ThetaOutOfRange
from .hull import DriverSpec, HullTrace, SimulationConfig, fmt17, simulate_hull

__all__ = [
    "KnkCurveParam",
    "CurveDistance",
    "ErrorReport",
    "knk_radius",
    "knk_point",
    "distance_to_knk_curve",
    "distance_to_knk_curve_many",
    "knk_config",
    "error_report",
    "side_consistency",
    "error_sweep",
    "reports_to_json",
    "write_reports_csv",
    "write_reports_json",
]

_THETA_FLOOR = 1e-12
_SIDES = ("left", "right")


def _radius_sq(theta):
    """2 theta / sin(2 theta), with a series guard near theta = 0."""
    th = np.asarray(theta, dtype=float)
    u = 2.0 * th
    small = th < 1e-6
    safe = np.where(small, 1.0, u)
    direct = np.where(small, 1.0, safe / np.sin(safe))
    series = 1.0 + u * u / 6.0 + 7.0 * u**4 / 360.0
    return np.where(small, series, direct)


def knk_radius(theta):
    """Distance from the origin to the curve point at parameter theta."""
    out = np.sqrt(_radius_sq(theta))
    return float(out) if np.ndim(theta) == 0 else out


@dataclass(frozen=True)
class KnkCurveParam:
    """Curve parameter: angle in (0, pi/2) and the side of the imaginary axis."""

    theta: float
    side: str

    def __post_init__(self) -> None:
        if self.side not in _SIDES:
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if not (math.isfinite(self.theta) and 0.0 < self.theta < math.pi / 2):
            raise ThetaOutOfRange(f"theta must lie in (0, pi/2), got {self.theta!r}")


def knk_point(p: KnkCurveParam) -> complex:
    """Curve point sqrt(2 theta / sin 2 theta) * (+-cos theta + i sin theta)."""
    r = knk_radius(p.theta)
    sign = 1.0 if p.side == "right" else -1.0
    return complex(sign * r * math.cos(p.theta), r * math.sin(p.theta))


def _curve_right(thetas: np.ndarray) -> np.ndarray:
    r = np.sqrt(_radius_sq(thetas))
    return r * (np.cos(thetas) + 1j * np.sin(thetas))


def _theta_for_radius(target: float) -> float:
    """Smallest theta whose curve radius reaches ``target`` (radius is monotone)."""
    lo, hi = _THETA_FLOOR, math.pi / 2 - 1e-15
    if knk_radius(hi) <= target:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if knk_radius(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def _theta_grid(theta_hi: float, n_total: int = 10_000) -> np.ndarray:
    """Dense parameter grid, geometrically refined near both endpoints."""
    n_log = n_total // 8
    n_mid = n_total - 2 * n_log
    knee = theta_hi * 1e-3
    head = np.geomspace(_THETA_FLOOR, knee, n_log)
    mid = np.linspace(knee, theta_hi - knee, n_mid)
    tail = theta_hi - np.geomspace(knee, _THETA_FLOOR, n_log)
    return np.unique(np.concatenate([head, mid, tail]))


class CurveDistance(NamedTuple):
    distance: float
    theta: float
    side: str


def _side_points(thetas: np.ndarray, sign: float) -> np.ndarray:
    right = _curve_right(thetas)
    return right if sign > 0 else -np.conj(right)

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def _golden_refine(z: np.ndarray, a: np.ndarray, b: np.ndarray, sign: float,
                   iters: int = 48) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized golden-section minimization of |z - curve(theta)| per point."""

    def f(theta):
        return np.abs(z - _side_points(theta, sign))

    h = b - a
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc = f(c)
    fd = f(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        h = b - a
        pos = np.where(left, a + _INVPHI2 * h, a + _INVPHI * h)
        fpos = f(pos)
        c_old, fc_old = c, fc
        c = np.where(left, pos, d)
        fc = np.where(left, fpos, fd)
        d = np.where(left, c_old, pos)
        fd = np.where(left, fc_old, fpos)
    theta = 0.5 * (a + b)
    return f(theta), theta


def distance_to_knk_curve_many(z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distances from points to the full curve: (distance, theta, side) arrays.

    A dense grid (about 10^4 parameters, log-refined near the endpoints)
    brackets the minimum on each side; golden-section refinement narrows theta
    to 1e-10 before the better side is chosen.
    """
    arr = np.asarray(z, dtype=np.complex128).ravel()
    if arr.size == 0:
        return np.empty(0), np.empty(0), np.empty(0, dtype=object)
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    if np.any(arr.imag < 0.0):
        raise ValueError("points must lie in the closed upper half-plane")

    # nearest curve point has radius <= 2|z| + 1; search past that
    target = 2.0 * float(np.max(np.abs(arr))) + 2.0
    grid = _theta_grid(_theta_for_radius(target))
    m = grid.size

    best_dist = {}
    best_theta = {}
    for sign in (1.0, -1.0):
        pts = _side_points(grid, sign)
        idx = np.empty(arr.size, dtype=np.int64)
        grid_d = np.empty(arr.size)
        chunk = max(1, int(2**22 // m))
        for lo in range(0, arr.size, chunk):
            hi = min(lo + chunk, arr.size)
            d = np.abs(arr[lo:hi, None] - pts[None, :])
            idx[lo:hi] = np.argmin(d, axis=1)
            grid_d[lo:hi] = d[np.arange(hi - lo), idx[lo:hi]]
        a = grid[np.maximum(idx - 1, 0)]
        b = grid[np.minimum(idx + 1, m - 1)]
        ref_d, ref_t = _golden_refine(arr, a, b, sign)
        use_ref = ref_d <= grid_d
        best_dist[sign] = np.where(use_ref, ref_d, grid_d)
        best_theta[sign] = np.where(use_ref, ref_t, grid[idx])

    right_wins = best_dist[1.0] <= best_dist[-1.0]
    dist = np.where(right_wins, best_dist[1.0], best_dist[-1.0])
    theta = np.where(right_wins, best_theta[1.0], best_theta[-1.0])
    side = np.where(right_wins, "right", "left")
    return dist, theta, side


def distance_to_knk_curve(z) -> CurveDistance:
    """Distance from one point to the curve, with the minimizing theta and side."""
    d, t, s = distance_to_knk_curve_many(np.asarray([complex(z)]))
    return CurveDistance(float(d[0]), float(t[0]), str(s[0]))


@dataclass(frozen=True)
class ErrorReport:
    """Max distance from trace points to the exact curve, split by side."""

    max_error_left: float
    max_error_right: float
    max_error_overall: float
    N: int
    mode: str
    seed: int | None = None


def knk_config(N: int, T: float, mode: str = "controlled",
               seed: int | None = None) -> SimulationConfig:
    """The benchmark setup: constant drivers -1, +1 with equal weights."""
    drivers = (DriverSpec.constant(-1.0, T), DriverSpec.constant(1.0, T))
    if mode == "controlled":
        plan = build_controlled_plan(2, N)
    elif mode == "random":
        if seed is None:
            raise ValueError("random mode requires a seed")
        plan = build_random_plan(WeightVector.equal(2), N, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SimulationConfig(T=T, N=N, drivers=drivers, plan=plan)


def _knk_side_sources(trace: HullTrace) -> tuple[np.ndarray, np.ndarray]:
    """Masks of left (-1 driver) and right (+1 driver) points; validates the instance."""
    drivers = trace.config.drivers
    if len(drivers) != 2 or any(d.kind != "constant" for d in drivers):
        raise NotKnkInstance("trace must use exactly two constant drivers")
    values = tuple(d.value for d in drivers)
    if sorted(values) != [-1.0, 1.0]:
        raise NotKnkInstance(f"driver values must be -1 and +1, got {values}")
    left_index = values.index(-1.0) + 1
    right_index = values.index(1.0) + 1
    return trace.source == left_index, trace.source == right_index


def error_report(trace: HullTrace) -> ErrorReport:
    """Max distance to the curve over left-tagged and right-tagged points."""
    left_mask, right_mask = _knk_side_sources(trace)
    dist, _, _ = distance_to_knk_curve_many(trace.z)
    err_left = float(np.max(dist[left_mask])) if np.any(left_mask) else 0.0
    err_right = float(np.max(dist[right_mask])) if np.any(right_mask) else 0.0
    plan = trace.config.plan
    return ErrorReport(
        max_error_left=err_left,
        max_error_right=err_right,
        max_error_overall=max(err_left, err_right),
        N=trace.config.N,
        mode=plan.mode,
        seed=plan.seed,
    )


def side_consistency(trace: HullTrace) -> bool:
    """True iff every point sits strictly on its driver's side of the imaginary axis."""
    left_mask, right_mask = _knk_side_sources(trace)
    x = trace.z.real
    return bool(np.all(x[left_mask] < 0.0) and np.all(x[right_mask] > 0.0))


def _sweep_job(args: tuple) -> ErrorReport:
    N, seed, mode, T = args
    trace = simulate_hull(knk_config(N, T, mode=mode, seed=seed))
    return error_report(trace)


def _resolve_workers(requested: int | None, n_jobs: int) -> int:
    cap = os.environ.get("LOEWNER_THREADS")
    cap = int(cap) if cap else (os.cpu_count() or 1)
    cap = max(1, cap)
    if requested is None:
        requested = cap
    return max(1, min(requested, cap, n_jobs))


def error_sweep(
    Ns: Sequence[int],
    mode: str,
    T: float = 10.0,
    seeds: Sequence[int] | None = None,
    workers: int | None = None,
) -> list[ErrorReport]:
    """Simulate and score the benchmark hull for each (N, seed) job.

    Controlled mode takes no seeds; random mode requires them.  Jobs may run
    in parallel (capped by LOEWNER_THREADS); output order is by (N, seed)
    regardless of scheduling.
    """
    Ns = list(Ns)
    if not Ns:
        raise ValueError("Ns must be nonempty")
    if mode == "controlled":
        if seeds:
            raise ValueError("controlled mode takes no seeds")
        jobs = [(int(N), None, mode, float(T)) for N in sorted(Ns)]
    elif mode == "random":
        if not seeds:
            raise ValueError("random mode requires seeds")
        jobs = [
            (int(N), int(s), mode, float(T))
            for N in sorted(Ns)
            for s in sorted(seeds)
        ]
    else:
        raise ValueError(f"unknown mode {mode!r}")

    n_workers = _resolve_workers(workers, len(jobs))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(_sweep_job, jobs))
    return [_sweep_job(job) for job in jobs]


def reports_to_json(reports: Sequence[ErrorReport]) -> list[dict]:
    return [
        {
            "N": r.N,
            "mode": r.mode,
            "seed": r.seed,
            "err_left": r.max_error_left,
            "err_right": r.max_error_right,
            "err_overall": r.max_error_overall,
        }
        for r in reports
    ]


def write_reports_csv(reports: Sequence[ErrorReport], path) -> None:
    lines = ["N,mode,seed,err_left,err_right,err_overall"]
    for r in reports:
        seed = "" if r.seed is None else str(r.seed)
        lines.append(
            f"{r.N},{r.mode},{seed},{fmt17(r.max_error_left)},"
            f"{fmt17(r.max_error_right)},{fmt17(r.max_error_overall)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_reports_json(reports: Sequence[ErrorReport], path) -> None:
    Path(path).write_text(json.dumps(reports_to_json(reports), sort_keys=True) + "\n")
