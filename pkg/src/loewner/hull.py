"""Hull simulation: the zipper over a sampled driver, and the multi-driver ODE.

The zipper grows a hull from ``N + 1`` driver samples on ``[0, T]``: start
with the final-time sample as a real point, then for each earlier sample
(walking backward in time) map every tracked point up through one constant
slit step of duration ``T / N`` at that sample value, and append the sample
itself as a new real point.  The resulting ``N + 1`` points approximate the
hull boundary; each is tagged with the driver that produced it.

The weighted downward ODE

    dg/dt = sum_k 2 w_k / (g - lambda_k(t))

is integrated with classic fixed-step RK4 and serves as an independent
cross-check: as the oscillation count grows, the composed per-step down maps
of a plan approach the constant-weight ODE map away from the hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import json

import numpy as np

from ._kernels import run_rk4, run_zipper
from .conformal import SlitStep, compose_down
from .driving import DriverSpec, OscillationPlan, WeightVector
from .errors import SwallowedPoint

__all__ = [
    "SimulationConfig",
    "HullTrace",
    "simulate_hull",
    "driver_samples",
    "schedule_steps",
    "integrate_multi_le_down",
    "cara_distance_proxy",
    "default_probe_grid",
    "config_to_json_dict",
    "config_from_json_dict",
    "fmt17",
]

_HORIZON_TOL = 1e-12


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits (decimal round-trip safe)."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class SimulationConfig:
    """Zipper run parameters: capacity time T (hcap = 2T), N steps, drivers, plan.

    ``plan`` is None only for a single driver.  Driver horizons must equal T.
    """

    T: float
    N: int
    drivers: tuple[DriverSpec, ...]
    plan: OscillationPlan | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "drivers", tuple(self.drivers))
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ValueError(f"T must be positive and finite, got {self.T}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.drivers:
            raise ValueError("at least one driver is required")
        for d in self.drivers:
            if abs(d.horizon - self.T) > _HORIZON_TOL * max(1.0, self.T):
                raise ValueError(
                    f"driver horizon {d.horizon} must equal T = {self.T}"
                )
        if self.plan is None:
            if len(self.drivers) != 1:
                raise ValueError("multiple drivers require an oscillation plan")
        else:
            if self.plan.n_drivers != len(self.drivers):
                raise ValueError("plan.n_drivers must match the driver count")
            if self.plan.N != self.N:
                raise ValueError("plan.N must match config N")


def config_to_json_dict(config: SimulationConfig) -> dict:
    return {
        "T": config.T,
        "N": config.N,
        "drivers": [d.to_json_dict() for d in config.drivers],
        "plan": None if config.plan is None else config.plan.to_json_dict(),
    }


def config_from_json_dict(d: dict) -> SimulationConfig:
    return SimulationConfig(
        T=float(d["T"]),
        N=int(d["N"]),
        drivers=tuple(DriverSpec.from_json_dict(x) for x in d["drivers"]),
        plan=None if d.get("plan") is None else OscillationPlan.from_json_dict(d["plan"]),
    )


def driver_samples(config: SimulationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Driver values and source indices at the sample grid ``t_k = T k / N``."""
    N = config.N
    t = config.T * (np.arange(N + 1) / N)
    if config.plan is None:
        values = np.asarray(config.drivers[0](t), dtype=float)
        sources = np.ones(N + 1, dtype=np.int64)
        return values, sources
    sources = np.asarray(config.plan.assignment, dtype=np.int64)
    values = np.empty(N + 1, dtype=float)
    for j in range(1, config.plan.n_drivers + 1):
        mask = sources == j
        if np.any(mask):
            values[mask] = config.drivers[j - 1](t[mask])
    return values, sources


def schedule_steps(config: SimulationConfig) -> tuple[SlitStep, ...]:
    """Forward-time constant steps equivalent to the sampled driver.

    Sub-interval ``k`` holds the value of sample ``k``; the final sample is a
    point of the trace, not a step.
    """
    values, _ = driver_samples(config)
    dt = config.T / config.N
    return tuple(SlitStep(float(c), dt) for c in values[:-1])


@dataclass(frozen=True)
class HullTrace:
    """Simulated hull points in birth order, tagged by source driver.

    ``z[b]`` is the point born at zipper step ``b``: the driver sample at time
    ``T (N - b) / N`` mapped up through the ``b`` subsequent steps.  The point
    born at step 0 (the final-time sample) passes through every map and sits
    at the hull tip.
    """

    z: np.ndarray
    source: np.ndarray
    birth_step: np.ndarray
    config: SimulationConfig

    def __post_init__(self) -> None:
        z = np.ascontiguousarray(self.z, dtype=np.complex128)
        source = np.ascontiguousarray(self.source, dtype=np.int64)
        birth = np.ascontiguousarray(self.birth_step, dtype=np.int64)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "birth_step", birth)
        n = self.config.N + 1
        if not (z.shape == source.shape == birth.shape == (n,)):
            raise ValueError(f"trace must hold exactly N + 1 = {n} points")
        if not np.all(np.isfinite(z)):
            raise ValueError("trace points must be finite")
        if np.any(z.imag < 0.0):
            raise ValueError("trace points must lie in the closed upper half-plane")
        if not np.array_equal(np.sort(birth), np.arange(n)):
            raise ValueError("birth steps must be 0..N, each exactly once")
        if np.any(source < 1) or np.any(source > len(self.config.drivers)):
            raise ValueError("source indices must reference a driver")

    def __len__(self) -> int:
        return self.z.shape[0]

    def to_csv(self, path) -> None:
        lines = ["re,im,source,birth_step"]
        for b in range(len(self)):
            lines.append(
                f"{fmt17(self.z[b].real)},{fmt17(self.z[b].imag)},"
                f"{self.source[b]},{self.birth_step[b]}"
            )
        Path(path).write_text("\n".join(lines) + "\n")

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "config": config_to_json_dict(self.config),
            "points": [
                {
                    "re": self.z[b].real,
                    "im": self.z[b].imag,
                    "source": int(self.source[b]),
                    "birth_step": int(self.birth_step[b]),
                }
                for b in range(len(self))
            ],
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True) + "\n")

    @classmethod
    def from_json_dict(cls, d: dict) -> "HullTrace":
        pts = d["points"]
        return cls(
            z=np.array([complex(p["re"], p["im"]) for p in pts]),
            source=np.array([p["source"] for p in pts]),
            birth_step=np.array([p["birth_step"] for p in pts]),
            config=config_from_json_dict(d["config"]),
        )

    @classmethod
    def from_json(cls, path) -> "HullTrace":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def simulate_hull(config: SimulationConfig) -> HullTrace:
    """Run the zipper and return all N + 1 tagged hull points.

    Deterministic given the config (including any plan seed); bit-identical
    across runs on the same platform.
    """
    values, sources = driver_samples(config)
    if not np.all(np.isfinite(values)):
        raise ValueError("driver samples must be finite")
    dt = config.T / config.N
    z = run_zipper(values, dt)
    return HullTrace(
        z=z,
        source=sources[::-1].copy(),
        birth_step=np.arange(config.N + 1),
        config=config,
    )


def integrate_multi_le_down(
    z0,
    drivers: Sequence[DriverSpec],
    weights,
    T: float,
    steps: int,
):
    """Integrate dg/dt = sum_k 2 w_k / (g - lambda_k(t)) from 0 to T with RK4.

    ``z0`` may be a complex scalar or array of interior points.  Raises
    :class:`SwallowedPoint` when a trajectory approaches a driver value within
    the singularity guard (the point belongs to the hull).
    """
    if not isinstance(weights, WeightVector):
        weights = WeightVector(tuple(weights))
    if len(drivers) != len(weights):
        raise ValueError("need one weight per driver")
    if not (math.isfinite(T) and T >= 0.0):
        raise ValueError(f"T must be non-negative, got {T}")
    if int(steps) < 1:
        raise ValueError("steps must be >= 1")
    steps = int(steps)
    for d in drivers:
        if d.horizon < T - _HORIZON_TOL * max(1.0, T):
            raise ValueError("driver horizon shorter than integration time")

    arr = np.asarray(z0, dtype=np.complex128)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).copy()
    if not np.all(np.isfinite(arr)):
        raise ValueError("initial points must be finite")
    if np.any(arr.imag <= 0.0):
        raise ValueError("initial points must be interior (positive imaginary part)")
    if T == 0.0:
        return complex(arr[0]) if scalar else arr

    h = T / steps
    t_grid = T * (np.arange(steps + 1) / steps)
    t_mid = 0.5 * (t_grid[:-1] + t_grid[1:])
    lam_grid = np.stack([np.asarray(d(t_grid), dtype=float) for d in drivers], axis=1)
    lam_mid = np.stack([np.asarray(d(t_mid), dtype=float) for d in drivers], axis=1)

    out, bad_point, bad_step = run_rk4(arr, lam_grid, lam_mid, weights.as_array(), h)
    if bad_point >= 0:
        raise SwallowedPoint(
            f"trajectory {bad_point} absorbed near step {bad_step} "
            f"(t ~ {bad_step * h:.6g})"
        )
    return complex(out[0]) if scalar else out


def _sup_abs_driver(config: SimulationConfig) -> float:
    values, _ = driver_samples(config)
    return float(np.max(np.abs(values)))


def default_probe_grid(T: float, sup_abs_driver: float, n: int = 20) -> np.ndarray:
    """n points on the semicircle of radius 8 * max(sqrt(T), sup |driver|)."""
    radius = 8.0 * max(math.sqrt(T), sup_abs_driver)
    angles = np.pi * np.arange(1, n + 1) / (n + 1)
    return radius * np.exp(1j * angles)


def cara_distance_proxy(
    config_a: SimulationConfig,
    other,
    probe_points: np.ndarray | None = None,
    rk4_steps: int | None = None,
) -> float:
    """Sup distance between two down maps over probe points away from the hulls.

    ``other`` is either another :class:`SimulationConfig` (both maps are
    per-step compositions) or a :class:`WeightVector` (the second map is the
    constant-weight ODE of :func:`integrate_multi_le_down` over config_a's
    drivers, integrated with ``rk4_steps`` RK4 steps, default ``100 * N`` so
    integrator error is negligible next to oscillation error).
    """
    if probe_points is None:
        sup_abs = _sup_abs_driver(config_a)
        if isinstance(other, SimulationConfig):
            sup_abs = max(sup_abs, _sup_abs_driver(other))
        probe_points = default_probe_grid(config_a.T, sup_abs)
    probes = np.asarray(probe_points, dtype=np.complex128)
    if probes.ndim == 0:
        probes = np.atleast_1d(probes)
    if np.any(probes.imag <= 0.0):
        raise ValueError("probe points must be interior")

    g_a = compose_down(probes, schedule_steps(config_a))
    if isinstance(other, SimulationConfig):
        if abs(other.T - config_a.T) > _HORIZON_TOL * max(1.0, config_a.T):
            raise ValueError("configs must share the same total time")
        g_b = compose_down(probes, schedule_steps(other))
    else:
        weights = other if isinstance(other, WeightVector) else WeightVector(tuple(other))
        steps = int(rk4_steps) if rk4_steps is not None else 100 * config_a.N
        g_b = integrate_multi_le_down(probes, config_a.drivers, weights, config_a.T, steps)
    return float(np.max(np.abs(g_a - g_b)))
