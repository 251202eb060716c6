"""Hot numerical loops: the zipper composition and the RK4 integrator.

Both have a JIT-compiled scalar-loop kernel (numba, cached) and a vectorized
numpy fallback.  The fallback is also the reference implementation the JIT
kernels are tested against.  Set LOEWNER_DISABLE_JIT=1 to force the numpy
path.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .conformal import _slit_up_core

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

# guard for the singular denominators of the downward ODE:
# abort when min_k |g - lambda_k| < 10 * sqrt(eps) * max(1, |g|)
RK4_GUARD = 10.0 * math.sqrt(np.finfo(np.float64).eps)


def _use_jit() -> bool:
    return HAVE_NUMBA and os.environ.get("LOEWNER_DISABLE_JIT", "") != "1"


def _zipper_loop(values, dt):
    # values[k] = driver sample at time T*k/N, k = 0..N; returns points in
    # birth order: z[b] is the sample values[N-b] mapped by all later steps
    N = values.shape[0] - 1
    z = np.empty(N + 1, dtype=np.complex128)
    z[0] = complex(values[N], 0.0)
    half = 2.0 * math.sqrt(dt)
    for k in range(1, N + 1):
        c = values[N - k]
        for i in range(k):
            zi = z[i]
            if zi.imag > 0.0:
                w = zi - c
                w = w * w - 4.0 * dt
                wr = w.real
                wi = w.imag
                if wi == 0.0:
                    if wr >= 0.0:
                        s = complex(math.sqrt(wr), 0.0)
                    else:
                        s = complex(0.0, math.sqrt(-wr))
                else:
                    s = np.sqrt(w)
                    if wi < 0.0:
                        s = -s
                z[i] = c + s
            else:
                x = zi.real - c
                ax = abs(x)
                if ax <= half:
                    h2 = 4.0 * dt - x * x
                    if h2 < 0.0:
                        h2 = 0.0
                    z[i] = complex(c, math.sqrt(h2))
                else:
                    mag = math.sqrt(x * x - 4.0 * dt)
                    z[i] = complex(c + (mag if x > 0.0 else -mag), 0.0)
        z[k] = complex(c, 0.0)
    return z


if HAVE_NUMBA:
    _zipper_jit = njit(cache=True)(_zipper_loop)


def zipper_numpy(values: np.ndarray, dt: float) -> np.ndarray:
    N = values.shape[0] - 1
    z = np.empty(N + 1, dtype=np.complex128)
    z[0] = values[N]
    for k in range(1, N + 1):
        c = values[N - k]
        z[:k] = _slit_up_core(z[:k], float(c), dt)
        z[k] = c
    return z


def run_zipper(values: np.ndarray, dt: float) -> np.ndarray:
    """Map all driver samples up through the remaining steps (birth order out)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if _use_jit():
        return _zipper_jit(values, float(dt))
    return zipper_numpy(values, float(dt))


def _rk4_loop(g0, lam_grid, lam_mid, weights, h):
    # lam_grid: (steps+1, n) driver values on the time grid; lam_mid: (steps, n)
    # at midpoints.  Returns (result, bad_point, bad_step); bad_point >= 0
    # flags a trajectory that hit the singularity guard.
    m = g0.shape[0]
    n = weights.shape[0]
    steps = lam_mid.shape[0]
    out = g0.copy()
    for p in range(m):
        g = out[p]
        for s in range(steps):
            ok = True
            k_sum = complex(0.0, 0.0)
            gs = g
            # stage weights 1,2,2,1 over driver rows (grid, mid, mid, grid+1)
            for stage in range(4):
                acc = complex(0.0, 0.0)
                lim = RK4_GUARD * max(1.0, abs(gs))
                for j in range(n):
                    if stage == 0:
                        lam = lam_grid[s, j]
                    elif stage == 3:
                        lam = lam_grid[s + 1, j]
                    else:
                        lam = lam_mid[s, j]
                    d = gs - lam
                    if abs(d) < lim:
                        ok = False
                        break
                    acc += 2.0 * weights[j] / d
                if not ok:
                    break
                if stage == 0:
                    k_sum = acc
                    gs = g + 0.5 * h * acc
                elif stage == 1:
                    k_sum += 2.0 * acc
                    gs = g + 0.5 * h * acc
                elif stage == 2:
                    k_sum += 2.0 * acc
                    gs = g + h * acc
                else:
                    k_sum += acc
            if not ok:
                return out, p, s
            g = g + (h / 6.0) * k_sum
        out[p] = g
    return out, -1, -1


if HAVE_NUMBA:
    _rk4_jit = njit(cache=True)(_rk4_loop)


def rk4_numpy(g0, lam_grid, lam_mid, weights, h):
    g = g0.copy()
    steps = lam_mid.shape[0]
    w2 = 2.0 * weights[np.newaxis, :]

    def field(gs, lam_row, step_idx):
        d = gs[:, np.newaxis] - lam_row[np.newaxis, :]
        lim = RK4_GUARD * np.maximum(1.0, np.abs(gs))
        bad = np.abs(d) < lim[:, np.newaxis]
        if np.any(bad):
            p = int(np.argmax(np.any(bad, axis=1)))
            raise _GuardTrip(p, step_idx)
        return np.sum(w2 / d, axis=1)

    try:
        for s in range(steps):
            k1 = field(g, lam_grid[s], s)
            k2 = field(g + 0.5 * h * k1, lam_mid[s], s)
            k3 = field(g + 0.5 * h * k2, lam_mid[s], s)
            k4 = field(g + h * k3, lam_grid[s + 1], s)
            g = g + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    except _GuardTrip as trip:
        return g, trip.point, trip.step
    return g, -1, -1


class _GuardTrip(Exception):
    def __init__(self, point: int, step: int):
        self.point = point
        self.step = step


def run_rk4(g0, lam_grid, lam_mid, weights, h):
    """Integrate the weighted downward ODE with classic RK4 over all points."""
    g0 = np.ascontiguousarray(g0, dtype=np.complex128)
    lam_grid = np.ascontiguousarray(lam_grid, dtype=np.float64)
    lam_mid = np.ascontiguousarray(lam_mid, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if _use_jit():
        return _rk4_jit(g0, lam_grid, lam_mid, weights, float(h))
    return rk4_numpy(g0, lam_grid, lam_mid, weights, float(h))
