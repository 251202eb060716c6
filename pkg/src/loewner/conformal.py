"""Exact conformal maps for constant-driver slit steps in the upper half-plane.

A constant driver value ``c`` held for capacity time ``t`` grows a vertical
slit of height ``2*sqrt(t)`` at ``c``.  The map that grows it (the "up" map)
is

    f(z) = c + sqrt((z - c)**2 - 4*t)

with the square-root branch whose argument lies in ``[0, pi)`` (branch cut
along the non-negative real axis), which is the unique branch mapping the
upper half-plane onto the half-plane minus the slit.  Its inverse (the
"down" map) is

    g(z) = c + sqrt((z - c)**2 + 4*t)

Hulls are grown by composing up-steps in reverse time order and mapped back
to the real line by composing down-steps in forward time order.  All
operations are pure and accept either complex scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ProbeTooClose, SwallowedPoint

__all__ = [
    "SlitStep",
    "sqrt_h",
    "slit_map_up",
    "slit_map_down",
    "compose_up",
    "compose_down",
    "hcap_estimate",
    "probe_radius_bound",
]


@dataclass(frozen=True)
class SlitStep:
    """One constant-driver step: value ``c`` held for capacity time ``dt``."""

    c: float
    dt: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and math.isfinite(self.dt)):
            raise ValueError(f"step parameters must be finite, got {self}")
        if self.dt < 0.0:
            raise ValueError(f"step duration must be non-negative, got {self.dt}")


def _coerce_step(step) -> SlitStep:
    if isinstance(step, SlitStep):
        return step
    c, dt = step
    return SlitStep(float(c), float(dt))


def _as_points(z) -> tuple[np.ndarray, bool]:
    """Return (complex array, was_scalar); reject NaN/inf and lower half-plane."""
    arr = np.asarray(z, dtype=np.complex128)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite (no NaN/inf)")
    if np.any(arr.imag < 0.0):
        raise ValueError("points must lie in the closed upper half-plane")
    return arr, scalar


def sqrt_h(w):
    """Square root with argument in [0, pi); branch cut on the non-negative reals.

    Maps the cut plane into the closed upper half-plane: positive reals go to
    positive reals, negative reals to the positive imaginary axis.
    """
    arr = np.asarray(w, dtype=np.complex128)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    # clear signed zeros so -0j inputs land on the upper side of the cut
    wn = np.where(arr.imag == 0.0, arr.real.astype(np.complex128), arr)
    s = np.sqrt(wn)
    out = np.where(wn.imag < 0.0, -s, s)
    return complex(out[0]) if scalar else out


def _slit_up_core(z: np.ndarray, c: float, dt: float) -> np.ndarray:
    """Vectorized up map; assumes validated inputs in the closed half-plane."""
    if dt == 0.0:
        return z.copy()
    out = np.empty_like(z)
    interior = z.imag > 0.0
    if np.any(interior):
        w = z[interior] - c
        out[interior] = c + sqrt_h(w * w - 4.0 * dt)
    boundary = ~interior
    if np.any(boundary):
        # real-axis inputs follow the continuity convention: the interval
        # [c - 2 sqrt(dt), c + 2 sqrt(dt)] lands on the slit, the rest stays real
        x = z[boundary].real - c
        half = 2.0 * math.sqrt(dt)
        on_slit = np.abs(x) <= half
        lifted = 1j * np.sqrt(np.maximum(4.0 * dt - x * x, 0.0))
        slid = np.sign(x) * np.sqrt(np.maximum(x * x - 4.0 * dt, 0.0))
        out[boundary] = c + np.where(on_slit, lifted, slid)
    return out


def slit_map_up(z, step):
    """Grow a slit: apply f(z) = c + sqrt((z - c)^2 - 4 dt) with the half-plane branch.

    Interior points map to interior points; the driver point ``c`` maps to the
    slit tip ``c + 2i*sqrt(dt)``.  Real points use the boundary extension by
    continuity.  ``dt = 0`` is the identity.
    """
    s = _coerce_step(step)
    arr, scalar = _as_points(z)
    out = _slit_up_core(arr, s.c, s.dt)
    return complex(out[0]) if scalar else out


def _slit_down_core(z: np.ndarray, c: float, dt: float) -> np.ndarray:
    """Vectorized down map; raises SwallowedPoint for inputs inside the slit."""
    if dt == 0.0:
        return z.copy()
    out = np.empty_like(z)
    x = z.real - c
    y = z.imag
    two_root = 2.0 * math.sqrt(dt)

    interior = y > 0.0
    on_axis = interior & (x == 0.0)
    off_axis = interior & ~on_axis
    if np.any(off_axis):
        w = z[off_axis] - c
        out[off_axis] = c + sqrt_h(w * w + 4.0 * dt)
    if np.any(on_axis):
        ya = y[on_axis]
        if np.any(ya < two_root):
            raise SwallowedPoint(
                f"point on the slit segment above c={c} (height < {two_root:.6g})"
            )
        out[on_axis] = c + 1j * np.sqrt(np.maximum(ya * ya - 4.0 * dt, 0.0))

    boundary = ~interior
    if np.any(boundary):
        xb = x[boundary]
        if np.any(xb == 0.0):
            raise SwallowedPoint(f"point at the slit base c={c}")
        out[boundary] = c + np.sign(xb) * np.sqrt(xb * xb + 4.0 * dt)
    return out


def slit_map_down(z, step):
    """Invert :func:`slit_map_up`: apply g(z) = c + sqrt((z - c)^2 + 4 dt).

    Points strictly inside the slit segment ``{c + iy : 0 <= y < 2 sqrt(dt)}``
    have no preimage and raise :class:`SwallowedPoint`.  The slit tip maps to
    ``c``; real points follow the same continuity convention as the up map.
    """
    s = _coerce_step(step)
    arr, scalar = _as_points(z)
    out = _slit_down_core(arr, s.c, s.dt)
    return complex(out[0]) if scalar else out


def compose_up(z, steps: Iterable):
    """Apply up-steps sequentially (first step applied first)."""
    arr, scalar = _as_points(z)
    for step in steps:
        s = _coerce_step(step)
        arr = _slit_up_core(arr, s.c, s.dt)
    return complex(arr[0]) if scalar else arr


def compose_down(z, steps: Iterable):
    """Apply down-steps sequentially in forward time order (first step first)."""
    arr, scalar = _as_points(z)
    for step in steps:
        s = _coerce_step(step)
        arr = _slit_down_core(arr, s.c, s.dt)
    return complex(arr[0]) if scalar else arr


def probe_radius_bound(steps: Sequence[SlitStep]) -> float:
    """Minimum recommended probe radius for a schedule: 100 * max(sqrt(T), sup|c|).

    The hull generated by the schedule stays within 4 * max(sqrt(T), sup|c|)
    of the origin, so this keeps probes comfortably outside it.
    """
    total = sum(s.dt for s in steps)
    cmax = max((abs(s.c) for s in steps), default=0.0)
    return 100.0 * max(math.sqrt(total), cmax)


def hcap_estimate(steps: Iterable, probe_radius: float) -> float:
    """Estimate the half-plane capacity of the hull grown by ``steps``.

    Evaluates the composed down map g at z = i * probe_radius and returns
    Re[z * (g(z) - z)].  For a schedule of total duration T the estimate
    converges to 2 T as the probe radius grows; taking the real part cancels
    the leading odd term of the expansion at infinity, leaving an error of
    order 1 / probe_radius**2.

    Raises :class:`ProbeTooClose` when ``probe_radius`` is below the bound of
    :func:`probe_radius_bound`.
    """
    step_list = [_coerce_step(s) for s in steps]
    if not math.isfinite(probe_radius) or probe_radius <= 0.0:
        raise ProbeTooClose(f"probe radius must be positive and finite, got {probe_radius}")
    bound = probe_radius_bound(step_list)
    if probe_radius < bound:
        raise ProbeTooClose(
            f"probe radius {probe_radius:.6g} below recommended bound {bound:.6g}"
        )
    z0 = 1j * probe_radius
    g = compose_down(z0, step_list)
    return float((z0 * (g - z0)).real)
