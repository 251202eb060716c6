"""Driving functions, oscillation plans, and indicator-weight convergence.

An oscillation plan assigns one of ``n`` drivers to each of the ``N + 1``
sample points of ``[0, T]``.  Sub-interval ``[k/N, (k+1)/N)`` of normalized
time inherits the assignment of its left sample point ``k``; the final sample
``k = N`` only contributes the last hull point, never a map step.

Controlled plans rotate through the drivers round-robin, ``j_k = (k mod n) + 1``,
so driver 1 is active on the first sub-interval.  For two drivers this is the
alternating indicator construction: driver 1 on even sub-intervals, driver 2
on odd ones.  Random plans draw each ``j_k`` independently from the weight
vector, reproducibly from a 64-bit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DriverSpec",
    "WeightVector",
    "OscillationPlan",
    "TestFunction",
    "TEST_FUNCTIONS",
    "build_controlled_plan",
    "build_random_plan",
    "oscillating_driver_value",
    "weight_indicator",
    "weak_convergence_gap",
]

_WEIGHT_SUM_TOL = 1e-12

# named closed-form drivers: name -> (required parameter keys, evaluator)
_NAMED_DRIVERS: dict[str, tuple[tuple[str, ...], Callable]] = {
    "linear": (("intercept", "slope"), lambda t, p: p["intercept"] + p["slope"] * t),
    "sine": (
        ("amplitude", "omega"),
        lambda t, p: p["amplitude"] * np.sin(p["omega"] * t + p.get("phase", 0.0)),
    ),
}


@dataclass(frozen=True)
class DriverSpec:
    """A continuous driving function on ``[0, horizon]``.

    Construct with :meth:`constant`, :meth:`tabulated`, or :meth:`named`;
    instances are callable on scalars or arrays.
    """

    kind: str
    horizon: float
    value: float = 0.0
    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    name: str = ""
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")
        if self.kind == "constant":
            if not math.isfinite(self.value):
                raise ValueError("constant driver value must be finite")
        elif self.kind == "tabulated":
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if t.size < 2 or t.size != v.size:
                raise ValueError("tabulated driver needs matching times/values, >= 2 knots")
            if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
                raise ValueError("tabulated knots must be finite")
            if np.any(np.diff(t) <= 0.0):
                raise ValueError("tabulated times must be strictly ascending")
            if t[0] != 0.0 or t[-1] != self.horizon:
                raise ValueError("tabulated times must start at 0 and end at the horizon")
        elif self.kind == "named":
            if self.name not in _NAMED_DRIVERS:
                raise ValueError(f"unknown named driver {self.name!r}")
            required, _ = _NAMED_DRIVERS[self.name]
            given = {k for k, _ in self.params}
            missing = [k for k in required if k not in given]
            if missing:
                raise ValueError(f"named driver {self.name!r} missing params {missing}")
        else:
            raise ValueError(f"unknown driver kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float, horizon: float) -> "DriverSpec":
        return cls(kind="constant", horizon=float(horizon), value=float(value))

    @classmethod
    def tabulated(cls, times: Sequence[float], values: Sequence[float]) -> "DriverSpec":
        times = tuple(float(t) for t in times)
        values = tuple(float(v) for v in values)
        return cls(kind="tabulated", horizon=times[-1] if times else 0.0,
                   times=times, values=values)

    @classmethod
    def named(cls, name: str, params: dict[str, float], horizon: float) -> "DriverSpec":
        items = tuple(sorted((str(k), float(v)) for k, v in params.items()))
        return cls(kind="named", horizon=float(horizon), name=name, params=items)

    @property
    def params_dict(self) -> dict[str, float]:
        return dict(self.params)

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        tol = 1e-9 * max(1.0, self.horizon)
        if np.any(arr < -tol) or np.any(arr > self.horizon + tol):
            raise ValueError(f"time outside [0, {self.horizon}]")
        arr = np.clip(arr, 0.0, self.horizon)
        if self.kind == "constant":
            out = np.full_like(arr, self.value)
        elif self.kind == "tabulated":
            out = np.interp(arr, self.times, self.values)
        else:
            _, fn = _NAMED_DRIVERS[self.name]
            out = np.asarray(fn(arr, self.params_dict), dtype=float)
        return float(out[0]) if scalar else out

    def to_json_dict(self) -> dict:
        d: dict = {"kind": self.kind, "horizon": self.horizon}
        if self.kind == "constant":
            d["value"] = self.value
        elif self.kind == "tabulated":
            d["times"] = list(self.times)
            d["values"] = list(self.values)
            d["interpolation"] = "linear"
        else:
            d["name"] = self.name
            d["params"] = self.params_dict
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "DriverSpec":
        kind = d["kind"]
        if kind == "constant":
            return cls.constant(d["value"], d["horizon"])
        if kind == "tabulated":
            return cls.tabulated(d["times"], d["values"])
        if kind == "named":
            return cls.named(d["name"], d["params"], d["horizon"])
        raise ValueError(f"unknown driver kind {kind!r}")


@dataclass(frozen=True)
class WeightVector:
    """Constant weights, one per driver, summing to 1.

    Multi-driver weights must lie strictly inside (0, 1); the single-driver
    vector is the degenerate (1,).
    """

    w: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", tuple(float(x) for x in self.w))
        if len(self.w) == 0:
            raise ValueError("weight vector must be nonempty")
        if not all(math.isfinite(x) for x in self.w):
            raise ValueError("weights must be finite")
        if len(self.w) == 1:
            if abs(self.w[0] - 1.0) > _WEIGHT_SUM_TOL:
                raise ValueError("single-driver weight must be 1")
        elif not all(0.0 < x < 1.0 for x in self.w):
            raise ValueError("weights must lie strictly in (0, 1)")
        if abs(sum(self.w) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {sum(self.w)!r}")

    @classmethod
    def equal(cls, n: int) -> "WeightVector":
        if n < 1:
            raise ValueError("need at least one driver")
        return cls((1.0,)) if n == 1 else cls(tuple(1.0 / n for _ in range(n)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.w, dtype=float)

    def __len__(self) -> int:
        return len(self.w)

    def __getitem__(self, i: int) -> float:
        return self.w[i]


def _round_robin(n_drivers: int, N: int) -> tuple[int, ...]:
    return tuple(k % n_drivers + 1 for k in range(N + 1))


def _categorical_from_uniform(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    # inverse CDF with ties broken toward the lower index
    return np.searchsorted(cum, u, side="left") + 1


def _random_assignment(weights: WeightVector, N: int, seed: int) -> tuple[int, ...]:
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(N + 1)
    cum = np.cumsum(weights.as_array())
    cum[-1] = 1.0
    return tuple(int(j) for j in _categorical_from_uniform(cum, u))


@dataclass(frozen=True)
class OscillationPlan:
    """Per-sample driver choice ``j_k`` for ``k = 0..N``, controlled or random."""

    n_drivers: int
    N: int
    assignment: tuple[int, ...]
    mode: str
    weights: WeightVector
    seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", tuple(int(j) for j in self.assignment))
        if self.n_drivers < 1:
            raise ValueError("n_drivers must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if len(self.assignment) != self.N + 1:
            raise ValueError(f"assignment must have N + 1 = {self.N + 1} entries")
        if any(not (1 <= j <= self.n_drivers) for j in self.assignment):
            raise ValueError("assignment entries must lie in 1..n_drivers")
        if len(self.weights) != self.n_drivers:
            raise ValueError("weights length must equal n_drivers")
        if self.mode == "controlled":
            if self.seed is not None:
                raise ValueError("controlled plans carry no seed")
            equal = 1.0 / self.n_drivers
            if any(abs(w - equal) > _WEIGHT_SUM_TOL for w in self.weights.w):
                raise ValueError("controlled mode requires equal weights 1/n")
            if self.assignment != _round_robin(self.n_drivers, self.N):
                raise ValueError("controlled assignment must be the round-robin")
        elif self.mode == "random":
            if self.seed is None:
                raise ValueError("random plans require a seed")
            if not (0 <= int(self.seed) < 2**64):
                raise ValueError("seed must be a 64-bit unsigned integer")
            if self.assignment != _random_assignment(self.weights, self.N, self.seed):
                raise ValueError("assignment does not match the seeded draw")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")

    def to_json_dict(self) -> dict:
        return {
            "n_drivers": self.n_drivers,
            "N": self.N,
            "mode": self.mode,
            "weights": list(self.weights.w),
            "seed": self.seed,
            "assignment": list(self.assignment),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "OscillationPlan":
        return cls(
            n_drivers=int(d["n_drivers"]),
            N=int(d["N"]),
            assignment=tuple(d["assignment"]),
            mode=d["mode"],
            weights=WeightVector(tuple(d["weights"])),
            seed=None if d.get("seed") is None else int(d["seed"]),
        )


def build_controlled_plan(n_drivers: int, N: int) -> OscillationPlan:
    """Round-robin plan ``j_k = (k mod n) + 1`` with equal weights.

    Driver 1 is active on the first sub-interval of time, matching the
    alternating indicator weights; for two drivers the samples alternate
    1, 2, 1, 2, ... from ``k = 0``.
    """
    return OscillationPlan(
        n_drivers=n_drivers,
        N=N,
        assignment=_round_robin(n_drivers, N),
        mode="controlled",
        weights=WeightVector.equal(n_drivers),
    )


def build_random_plan(weights: WeightVector, N: int, seed: int) -> OscillationPlan:
    """Draw ``j_k`` i.i.d. categorical with the given weights, k = 0..N.

    The draw is a pure function of (weights, N, seed): a PCG64 stream seeded
    with ``seed`` supplies uniforms mapped through the inverse CDF, ties
    toward the lower index.
    """
    if not isinstance(weights, WeightVector):
        weights = WeightVector(tuple(weights))
    return OscillationPlan(
        n_drivers=len(weights),
        N=N,
        assignment=_random_assignment(weights, N, int(seed)),
        mode="random",
        weights=weights,
        seed=int(seed),
    )


def oscillating_driver_value(plan: OscillationPlan, drivers: Sequence[DriverSpec], k: int) -> float:
    """Sample the oscillating driver at grid point k: value of driver ``j_k`` at ``T k / N``.

    The drivers must share a common horizon T.
    """
    if len(drivers) != plan.n_drivers:
        raise ValueError("drivers list length must equal plan.n_drivers")
    horizons = {d.horizon for d in drivers}
    if len(horizons) != 1:
        raise ValueError("drivers must share a common horizon")
    if not (0 <= k <= plan.N):
        raise IndexError(f"sample index {k} outside 0..{plan.N}")
    T = drivers[0].horizon
    t = T * (k / plan.N)
    return float(drivers[plan.assignment[k] - 1](t))


def weight_indicator(plan: OscillationPlan, driver_index: int, t: float) -> int:
    """1 iff the plan assigns ``driver_index`` on the normalized sub-interval holding ``t``."""
    if not (1 <= driver_index <= plan.n_drivers):
        raise ValueError(f"driver index {driver_index} outside 1..{plan.n_drivers}")
    if not (0.0 <= t < 1.0):
        raise ValueError(f"normalized time {t} outside [0, 1)")
    k = min(int(t * plan.N), plan.N - 1)
    return 1 if plan.assignment[k] == driver_index else 0


@dataclass(frozen=True)
class TestFunction:
    """Integrand on [0, 1] with an optional exact antiderivative.

    When the antiderivative accepts ``fractions.Fraction`` arguments and stays
    in exact arithmetic (any polynomial written with ``+ * /`` does), the
    weak-convergence gap below is computed exactly.
    """

    __test__ = False  # not a pytest class, despite the name

    fn: Callable[[float], float]
    antiderivative: Callable[[float], float] | None = None


TEST_FUNCTIONS: dict[str, TestFunction] = {
    "one": TestFunction(lambda t: 1.0, lambda t: t),
    "t": TestFunction(lambda t: t, lambda t: t * t / 2),
    "cos_pi_t": TestFunction(
        lambda t: math.cos(math.pi * t), lambda t: math.sin(math.pi * t) / math.pi
    ),
}


def _adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) + recurse(
            m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1
        )

    return recurse(a, fa, b, fb, m, fm, whole, tol, 48)


def _interval_integrals(h: TestFunction, N: int) -> list:
    """Integrals of h over [k/N, (k+1)/N], exact when the antiderivative allows."""
    if h.antiderivative is not None:
        H = h.antiderivative
        try:
            vals = [H(Fraction(k, N)) for k in range(N + 1)]
        except (TypeError, ValueError, ZeroDivisionError, OverflowError):
            vals = [H(k / N) for k in range(N + 1)]
        return [vals[k + 1] - vals[k] for k in range(N)]
    return [
        _adaptive_simpson(h.fn, k / N, (k + 1) / N, 1e-12) for k in range(N)
    ]


def weak_convergence_gap(
    plan: OscillationPlan,
    driver_index: int,
    target_w: float,
    h: TestFunction | Callable[[float], float],
) -> float:
    """|integral of h against the plan's indicator weight - target_w * integral of h|.

    The indicator weight of ``driver_index`` is 1 on each normalized
    sub-interval the plan assigns to that driver and 0 elsewhere, so the
    integral is a sum of per-sub-interval integrals of h.  Sub-interval ``k``
    is governed by assignment entry ``k``; the final entry ``N`` plays no role.
    """
    if not (1 <= driver_index <= plan.n_drivers):
        raise ValueError(f"driver index {driver_index} outside 1..{plan.n_drivers}")
    if not isinstance(h, TestFunction):
        h = TestFunction(h)
    parts = _interval_integrals(h, plan.N)
    assigned = sum(
        part for k, part in enumerate(parts) if plan.assignment[k] == driver_index
    )
    total = sum(parts)
    if isinstance(assigned, Fraction) or isinstance(total, Fraction):
        target = Fraction(target_w)
    else:
        target = target_w
    return float(abs(assigned - target * total))
