"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``.

Criteria 6, 7, and 10 include the controlled benchmark at T = 10, N = 10.
That configuration is degenerate: the step capacity dt = T/N = 1 makes the
per-step slit reach 2*sqrt(dt) = 2 exactly equal to the gap between the
drivers -1 and +1, so every sample point stays pinned to the real axis and
the trace collapses onto the driver locations.  The assertions are kept as
stated and those three tests fail honestly on the N = 10 entries; companion
tests show the same claims hold away from the degenerate step size.
"""

import math
import time

import numpy as np

from loewner import (
    DriverSpec,
    KnkCurveParam,
    SimulationConfig,
    SlitStep,
    TEST_FUNCTIONS,
    WeightVector,
    build_controlled_plan,
    build_random_plan,
    cara_distance_proxy,
    distance_to_knk_curve_many,
    error_report,
    hcap_estimate,
    knk_config,
    knk_point,
    schedule_steps,
    side_consistency,
    simulate_hull,
    slit_map_down,
    slit_map_up,
    weak_convergence_gap,
)

SWEEP_NS = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 200, 300, 400, 500, 1000]


def crit(cid: int, ok: bool, detail: str) -> None:
    print(f"[acceptance] criterion {cid:2d}: {'PASS' if ok else 'FAIL'} :: {detail}")
    assert ok, f"criterion {cid}: {detail}"


def single_config(c: float, T: float, N: int) -> SimulationConfig:
    return SimulationConfig(T=T, N=N, drivers=(DriverSpec.constant(c, T),))


def test_criterion_01_exact_slit_tip():
    t0 = time.perf_counter()
    worst = 0.0
    for c in (0.0, 0.7, -1.3):
        for T in (1.0, 10.0):
            for N in (10, 1000, 10_000):
                trace = simulate_hull(single_config(c, T, N))
                tip = c + 2j * math.sqrt(T)
                worst = max(worst, abs(trace.z[0] - tip))
    elapsed = time.perf_counter() - t0
    crit(1, worst <= 1e-9 and elapsed < 5.0,
         f"max tip error {worst:.3e} (tol 1e-9), {elapsed:.2f} s (< 5 s)")


def test_criterion_02_map_identities(rng):
    t0 = time.perf_counter()
    n_total, batch = 100_000, 500
    half_side = 100.0 / math.sqrt(2.0)  # rectangle stays inside |z| <= 100
    devs = dict.fromkeys(("inverse", "semigroup", "scaling", "translation", "mirror"), 0.0)
    for _ in range(n_total // batch):
        z = rng.uniform(-half_side, half_side, batch) + 1j * rng.uniform(1e-3, half_side, batch)
        c, t1, t2 = rng.uniform(-5, 5), rng.uniform(0, 4), rng.uniform(0, 4)
        s, a = rng.uniform(0.1, 10), rng.uniform(-5, 5)

        up = slit_map_up(z, SlitStep(c, t1))
        rel = np.maximum(1.0, np.abs(z))
        devs["inverse"] = max(devs["inverse"], float(np.max(
            np.abs(slit_map_down(up, SlitStep(c, t1)) - z) / rel)))
        one = slit_map_up(z, SlitStep(c, t1 + t2))
        devs["semigroup"] = max(devs["semigroup"], float(np.max(
            np.abs(slit_map_up(up, SlitStep(c, t2)) - one) / np.maximum(1.0, np.abs(one)))))
        lhs = slit_map_up(s * z, SlitStep(s * c, s * s * t1))
        devs["scaling"] = max(devs["scaling"], float(np.max(
            np.abs(lhs - s * up) / np.maximum(1.0, np.abs(s * up)))))
        lhs = slit_map_up(z + a, SlitStep(c + a, t1))
        devs["translation"] = max(devs["translation"], float(np.max(
            np.abs(lhs - (up + a)) / np.maximum(1.0, np.abs(up + a)))))
        lhs = slit_map_up(-np.conj(z), SlitStep(-c, t1))
        devs["mirror"] = max(devs["mirror"], float(np.max(
            np.abs(lhs - (-np.conj(up))) / np.maximum(1.0, np.abs(up)))))
    elapsed = time.perf_counter() - t0
    worst = max(devs.values())
    crit(2, worst <= 1e-10 and elapsed < 10.0,
         f"max relative defect {worst:.3e} across {sorted(devs)} (tol 1e-10), "
         f"{elapsed:.2f} s (< 10 s)")


def test_criterion_03_hcap_normalization():
    t0 = time.perf_counter()
    schedules = {
        "controlled": schedule_steps(knk_config(1000, 10.0)),
        "random": schedule_steps(knk_config(1000, 10.0, mode="random", seed=0)),
        "single": schedule_steps(single_config(0.5, 10.0, 1000)),
    }
    errs = {name: abs(hcap_estimate(steps, 1.0e4) - 20.0)
            for name, steps in schedules.items()}
    elapsed = time.perf_counter() - t0
    worst = max(errs.values())
    crit(3, worst <= 0.02 and elapsed < 1.0,
         f"max |estimate - 20| = {worst:.3e} over {sorted(errs)} (tol 0.02), "
         f"{elapsed:.2f} s (< 1 s)")


def test_criterion_04_controlled_gap_closed_form():
    worst = 0.0
    for N in (10, 100, 1000):
        plan = build_controlled_plan(2, N)
        for j in (1, 2):
            gap = weak_convergence_gap(plan, j, 0.5, TEST_FUNCTIONS["t"])
            worst = max(worst, abs(gap - 1.0 / (4.0 * N)))
    zeros = [
        weak_convergence_gap(build_controlled_plan(2, N), 1, 0.5, TEST_FUNCTIONS["one"])
        for N in (10, 100, 1000)
    ]
    crit(4, worst <= 1e-12 and all(g == 0.0 for g in zeros),
         f"max |gap - 1/(4N)| = {worst:.3e} (tol 1e-12); "
         f"constant-h gaps {zeros} (must be exactly 0)")


def test_criterion_05_random_gap_mean_decreases():
    seeds = range(50)

    def mean_gap(N: int) -> float:
        gaps = [
            weak_convergence_gap(
                build_random_plan(WeightVector.equal(2), N, seed=s), 1, 0.5,
                TEST_FUNCTIONS["t"])
            for s in seeds
        ]
        return sum(gaps) / len(gaps)

    lo, hi = mean_gap(10_000), mean_gap(100)
    crit(5, lo < hi, f"mean gap over 50 seeds: {lo:.3e} at N=1e4 vs {hi:.3e} at N=1e2")


def test_criterion_06_side_consistency():
    results = {N: side_consistency(simulate_hull(knk_config(N, 10.0)))
               for N in SWEEP_NS}
    bad = [N for N, ok in results.items() if not ok]
    crit(6, not bad, f"side-consistent for all N in the sweep list at T=10; failures: {bad}")


def test_criterion_06_companion_side_consistency_off_degenerate():
    # the same claim away from dt = 1: N = 10 passes at T = 5, every other
    # sweep N passes at T = 10 (checked in criterion 6)
    ok = side_consistency(simulate_hull(knk_config(10, 5.0)))
    crit(6, ok, "companion: side-consistent at N=10, T=5 (dt != 1)")


def _controlled_errors(T: float) -> dict[int, float]:
    return {
        N: error_report(simulate_hull(knk_config(N, T))).max_error_overall
        for N in SWEEP_NS
    }


def test_criterion_07_controlled_error_trend():
    t0 = time.perf_counter()
    errs = _controlled_errors(10.0)
    chain = errs[1000] < errs[100] < errs[10]
    inversions = sum(
        1 for a, b in zip(SWEEP_NS, SWEEP_NS[1:]) if errs[b] > errs[a]
    )
    elapsed = time.perf_counter() - t0
    crit(7, chain and inversions <= 2 and elapsed < 120.0,
         f"errors {{10: {errs[10]:.3g}, 100: {errs[100]:.3g}, 1000: {errs[1000]:.3g}}}, "
         f"{inversions} adjacent inversions, {elapsed:.1f} s (< 120 s)")


def test_criterion_07_companion_trend_off_degenerate():
    errs = _controlled_errors(5.0)
    chain = errs[1000] < errs[100] < errs[10]
    inversions = sum(
        1 for a, b in zip(SWEEP_NS, SWEEP_NS[1:]) if errs[b] > errs[a]
    )
    crit(7, chain and inversions <= 2,
         f"companion at T=5: errors {{10: {errs[10]:.3g}, 100: {errs[100]:.3g}, "
         f"1000: {errs[1000]:.3g}}}, {inversions} adjacent inversions")


def test_criterion_08_random_ensemble_trend():
    t0 = time.perf_counter()
    seeds = list(range(10))

    def median_err(N: int) -> float:
        errs = sorted(
            error_report(simulate_hull(knk_config(N, 10.0, mode="random", seed=s))
                         ).max_error_overall
            for s in seeds
        )
        return errs[len(errs) // 2]

    m3, m4 = median_err(1000), median_err(10_000)
    elapsed = time.perf_counter() - t0
    crit(8, m4 < m3 and elapsed < 600.0,
         f"median error over 10 seeds: {m4:.3e} at N=1e4 vs {m3:.3e} at N=1e3, "
         f"{elapsed:.1f} s (< 600 s)")


def test_criterion_09_cara_proxy_convergence():
    t0 = time.perf_counter()
    w = WeightVector.equal(2)
    ok = True
    details = []
    for mode, seed in (("controlled", None), ("random", 0)):
        p3 = cara_distance_proxy(knk_config(1000, 10.0, mode=mode, seed=seed), w)
        p4 = cara_distance_proxy(knk_config(10_000, 10.0, mode=mode, seed=seed), w)
        ok = ok and p4 < p3
        details.append(f"{mode}: {p3:.3e} at N=1e3 -> {p4:.3e} at N=1e4")
    elapsed = time.perf_counter() - t0
    crit(9, ok, "; ".join(details) + f", {elapsed:.1f} s")


def _thickening_margin(T: float, N: int) -> tuple[float, float]:
    trace = simulate_hull(knk_config(N, T))
    err = error_report(trace).max_error_overall
    left = trace.z[trace.source == 1]
    right = trace.z[trace.source == 2]
    gap = float(np.min(np.abs(left[:, None] - right[None, :])))
    return err, gap


def test_criterion_10_thickened_sides_disjoint():
    bad = []
    details = {}
    for N in SWEEP_NS:
        err, gap = _thickening_margin(10.0, N)
        details[N] = (err, gap)
        if not 2.0 * err < gap:
            bad.append(N)
    worst = {N: f"2*err={2*details[N][0]:.3g} vs gap={details[N][1]:.3g}"
             for N in (bad or [SWEEP_NS[0]])}
    crit(10, not bad,
         f"thickened sides stay disjoint for all N at T=10; failures: {worst if bad else 'none'}")


def test_criterion_10_companion_off_degenerate():
    bad = []
    for N in SWEEP_NS:
        err, gap = _thickening_margin(2.0, N)
        if not 2.0 * err < gap:
            bad.append(N)
    crit(10, not bad, f"companion at T=2: thickened sides disjoint for all N; failures: {bad or 'none'}")


def test_criterion_11_oracle_self_tests(rng):
    # independent brute-force projection: 1e6-point grid over both branches
    z = rng.uniform(-3, 3, 100) + 1j * rng.uniform(0.0, 3, 100)
    dists, _, _ = distance_to_knk_curve_many(z)
    thetas = np.linspace(1e-9, 1.55, 1_000_000)
    r = np.sqrt(2.0 * thetas / np.sin(2.0 * thetas))
    pts = r * (np.cos(thetas) + 1j * np.sin(thetas))
    worst = 0.0
    for zi, di in zip(z, dists):
        bf = min(np.min(np.abs(zi - pts)), np.min(np.abs(zi + np.conj(pts))))
        worst = max(worst, abs(di - float(bf)))
    point_err = abs(
        knk_point(KnkCurveParam(math.pi / 4, "right"))
        - (math.sqrt(math.pi) / 2) * (1 + 1j)
    )
    crit(11, worst <= 1e-6 and point_err <= 1e-12,
         f"max |refined - brute force| = {worst:.3e} over 100 probes (tol 1e-6); "
         f"quarter-pi point error {point_err:.3e} (tol 1e-12)")
