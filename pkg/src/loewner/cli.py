"""Command-line front end: run simulations, error sweeps, and verification checks.

Every output file is accompanied by a manifest holding the resolved arguments,
so a run can be reproduced bit-exactly (timestamps aside) with ``replay``.
Exit codes: 0 success, 1 failed check, 2 usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .conformal import SlitStep, hcap_estimate, probe_radius_bound, slit_map_down, slit_map_up
from .driving import (
    TEST_FUNCTIONS,
    DriverSpec,
    WeightVector,
    build_controlled_plan,
    build_random_plan,
    weak_convergence_gap,
)
from .errors import LoewnerError
from .hull import SimulationConfig, cara_distance_proxy, schedule_steps, simulate_hull
from .knk import error_sweep, knk_config, write_reports_csv, write_reports_json

MANIFEST_SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def _parse_drivers(text: str, T: float) -> tuple[DriverSpec, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise UsageError("at least one driver is required")
    drivers = []
    for part in parts:
        if part.startswith("const:"):
            try:
                value = float(part[len("const:"):])
            except ValueError as exc:
                raise UsageError(f"bad driver value in {part!r}") from exc
            if not math.isfinite(value):
                raise UsageError(f"driver value must be finite, got {part!r}")
            drivers.append(DriverSpec.constant(value, T))
        elif part.startswith("table:"):
            raise UsageError("table: drivers are reserved and not supported yet")
        else:
            raise UsageError(f"unrecognized driver spec {part!r} (expected const:<v>)")
    return tuple(drivers)


def _parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _write_manifest(prefix: str, command: str, args: dict, seeds: list, outputs: list[str]) -> str:
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "tool": "loewner",
        "tool_version": __version__,
        "command": command,
        "args": args,
        "seeds": seeds,
        "outputs": outputs,
        "timestamp": _utc_now(),
    }
    path = f"{prefix}.manifest.json"
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _build_config(params: dict) -> SimulationConfig:
    T = float(params["T"])
    N = int(params["N"])
    if T <= 0 or N < 1:
        raise UsageError("need T > 0 and N >= 1")
    drivers = _parse_drivers(params["drivers"], T)
    if len(drivers) == 1:
        plan = None
    else:
        mode = params["mode"]
        weights = params.get("weights")
        if mode == "controlled":
            if weights is not None:
                equal = 1.0 / len(drivers)
                if any(abs(w - equal) > 1e-12 for w in weights):
                    raise UsageError("controlled mode requires equal weights")
            plan = build_controlled_plan(len(drivers), N)
        elif mode == "random":
            if params.get("seed") is None:
                raise UsageError("random mode requires --seed")
            wv = WeightVector(tuple(weights)) if weights else WeightVector.equal(len(drivers))
            plan = build_random_plan(wv, N, int(params["seed"]))
        else:
            raise UsageError(f"unknown mode {mode!r}")
    return SimulationConfig(T=T, N=N, drivers=drivers, plan=plan)


def _run_simulate(params: dict) -> list[str]:
    config = _build_config(params)
    trace = simulate_hull(config)
    prefix = params["out"]
    csv_path = f"{prefix}.csv"
    json_path = f"{prefix}.json"
    trace.to_csv(csv_path)
    trace.to_json(json_path)
    seeds = [] if config.plan is None or config.plan.seed is None else [config.plan.seed]
    manifest = _write_manifest(prefix, "simulate", params, seeds, [csv_path, json_path])
    return [csv_path, json_path, manifest]


def cmd_simulate(args: argparse.Namespace) -> int:
    params = {
        "drivers": args.drivers,
        "mode": args.mode,
        "weights": _parse_float_list(args.weights) if args.weights else None,
        "N": args.N,
        "T": args.T,
        "seed": args.seed,
        "out": args.out,
    }
    for path in _run_simulate(params):
        print(path)
    return 0


def _run_sweep(params: dict) -> list[str]:
    Ns = params["Ns"]
    if not Ns:
        raise UsageError("--Ns must be a nonempty list")
    mode = params["mode"]
    seeds = params.get("seeds")
    if mode == "controlled" and seeds:
        raise UsageError("controlled mode takes no seeds")
    if mode == "random" and not seeds:
        raise UsageError("random mode requires --seeds or --n-seeds")
    reports = error_sweep(Ns, mode, T=float(params["T"]), seeds=seeds,
                          workers=params.get("workers"))
    prefix = params["out"]
    csv_path = f"{prefix}.csv"
    json_path = f"{prefix}.json"
    write_reports_csv(reports, csv_path)
    write_reports_json(reports, json_path)
    manifest = _write_manifest(prefix, "sweep", params, seeds or [], [csv_path, json_path])
    return [csv_path, json_path, manifest]


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.seeds is not None and args.n_seeds is not None:
        raise UsageError("give either --seeds or --n-seeds, not both")
    seeds = None
    if args.seeds is not None:
        seeds = _parse_int_list(args.seeds)
    elif args.n_seeds is not None:
        seeds = list(range(args.seed_base, args.seed_base + args.n_seeds))
    params = {
        "Ns": _parse_int_list(args.Ns),
        "mode": args.mode,
        "seeds": seeds,
        "T": args.T,
        "workers": args.workers,
        "out": args.out,
    }
    for path in _run_sweep(params):
        print(path)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    params = dict(manifest["args"])
    if args.out:
        params["out"] = args.out
    command = manifest["command"]
    if command == "simulate":
        paths = _run_simulate(params)
    elif command == "sweep":
        paths = _run_sweep(params)
    else:
        raise UsageError(f"manifest command {command!r} cannot be replayed")
    for path in paths:
        print(path)
    return 0


def _check_hcap(N: int, T: float) -> list[tuple[str, bool, str]]:
    config = knk_config(N, T, mode="controlled")
    steps = schedule_steps(config)
    probe = max(1.0e4, 2.0 * probe_radius_bound(steps))
    est = hcap_estimate(steps, probe)
    tol = 10.0 * (2.0 * T) / probe
    err = abs(est - 2.0 * T)
    return [(
        "hcap",
        err <= tol,
        f"|estimate - {2.0 * T:g}| = {err:.3e} at probe radius {probe:g} (tolerance {tol:.3g})",
    )]


def _check_weights(N: int) -> list[tuple[str, bool, str]]:
    if N < 2 or N % 2 != 0:
        raise UsageError("--weights check needs an even N >= 2")
    plan = build_controlled_plan(2, N)
    results = []
    gap_t = weak_convergence_gap(plan, 1, 0.5, TEST_FUNCTIONS["t"])
    expect = 1.0 / (4.0 * N)
    results.append((
        "weights[h=t]",
        abs(gap_t - expect) <= 1e-12,
        f"controlled gap {gap_t:.12e}, closed form 1/(4N) = {expect:.12e}",
    ))
    gap_one = weak_convergence_gap(plan, 1, 0.5, TEST_FUNCTIONS["one"])
    results.append((
        "weights[h=1]",
        gap_one == 0.0,
        f"controlled gap {gap_one:.3e} (expected exactly 0 for even N)",
    ))
    return results


def _check_cara(N: int, T: float, seeds: list[int]) -> list[tuple[str, bool, str]]:
    if N < 20:
        raise UsageError("--cara check needs N >= 20")
    n_small = max(10, N // 10)
    results = []
    w = WeightVector.equal(2)
    prox_small = cara_distance_proxy(knk_config(n_small, T, "controlled"), w)
    prox_big = cara_distance_proxy(knk_config(N, T, "controlled"), w)
    results.append((
        "cara[controlled]",
        prox_big < prox_small,
        f"proxy {prox_small:.3e} at N={n_small} -> {prox_big:.3e} at N={N}",
    ))
    for seed in seeds:
        ps = cara_distance_proxy(knk_config(n_small, T, "random", seed=seed), w)
        pb = cara_distance_proxy(knk_config(N, T, "random", seed=seed), w)
        results.append((
            f"cara[random seed={seed}]",
            pb < ps,
            f"proxy {ps:.3e} at N={n_small} -> {pb:.3e} at N={N}",
        ))
    return results


def _check_symmetry(n_batches: int = 100, batch: int = 100, seed: int = 0) -> list[tuple[str, bool, str]]:
    rng = np.random.Generator(np.random.PCG64(seed))
    dev = {"inverse": 0.0, "semigroup": 0.0, "scaling": 0.0,
           "translation": 0.0, "mirror": 0.0}
    for _ in range(n_batches):
        z = rng.uniform(-50, 50, batch) + 1j * rng.uniform(1e-3, 50, batch)
        c, t1, t2 = rng.uniform(-5, 5), rng.uniform(0, 4), rng.uniform(0, 4)
        shift, scale = rng.uniform(-5, 5), rng.uniform(0.2, 5)

        up = slit_map_up(z, SlitStep(c, t1))
        dev["inverse"] = max(dev["inverse"],
                             float(np.max(np.abs(slit_map_down(up, SlitStep(c, t1)) - z))))
        one = slit_map_up(z, SlitStep(c, t1 + t2))
        two = slit_map_up(up, SlitStep(c, t2))
        dev["semigroup"] = max(dev["semigroup"],
                               float(np.max(np.abs(two - one) / np.maximum(1.0, np.abs(one)))))
        lhs = slit_map_up(scale * z, SlitStep(scale * c, scale**2 * t1))
        dev["scaling"] = max(dev["scaling"],
                             float(np.max(np.abs(lhs - scale * up) / np.maximum(1.0, np.abs(up)))))
        lhs = slit_map_up(z + shift, SlitStep(c + shift, t1))
        dev["translation"] = max(dev["translation"], float(np.max(np.abs(lhs - (up + shift)))))
        lhs = slit_map_up(-np.conj(z), SlitStep(-c, t1))
        dev["mirror"] = max(dev["mirror"], float(np.max(np.abs(lhs - (-np.conj(up))))))

    n = n_batches * batch
    tol = {"inverse": 1e-10, "semigroup": 1e-10, "scaling": 1e-10,
           "translation": 1e-9, "mirror": 1e-9}
    return [
        (f"symmetry[{name}]", dev[name] <= tol[name],
         f"max defect {dev[name]:.3e} over {n} samples (tolerance {tol[name]:g})")
        for name in dev
    ]


def cmd_check(args: argparse.Namespace) -> int:
    suites = []
    if args.hcap:
        suites.append(lambda: _check_hcap(args.N, args.T))
    if args.weights:
        suites.append(lambda: _check_weights(args.N))
    if args.cara:
        seeds = _parse_int_list(args.seeds) if args.seeds else [0]
        suites.append(lambda: _check_cara(args.N, args.T, seeds))
    if args.symmetry:
        suites.append(lambda: _check_symmetry())
    if not suites:
        raise UsageError("select at least one of --hcap --weights --cara --symmetry")
    all_ok = True
    for suite in suites:
        for name, ok, detail in suite():
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
            all_ok = all_ok and ok
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loewner",
        description="Simulate hulls from oscillating driving functions and verify them.",
    )
    parser.add_argument("--version", action="version", version=f"loewner {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one hull simulation")
    p_sim.add_argument("--drivers", default="const:-1,const:1",
                       help="comma list of driver specs, e.g. const:-1,const:1")
    p_sim.add_argument("--mode", choices=["controlled", "random"], default="controlled")
    p_sim.add_argument("--weights", default=None, help="comma list of weights (random mode)")
    p_sim.add_argument("-N", type=int, default=1000, help="number of time steps")
    p_sim.add_argument("-T", type=float, default=10.0, help="total capacity time (hcap = 2T)")
    p_sim.add_argument("--seed", type=int, default=None, help="seed (random mode)")
    p_sim.add_argument("--out", required=True, help="output file prefix")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="error sweep over step counts and seeds")
    p_sweep.add_argument("--Ns", required=True, help="comma list of step counts")
    p_sweep.add_argument("--mode", choices=["controlled", "random"], default="controlled")
    p_sweep.add_argument("--seeds", default=None, help="comma list of seeds (random mode)")
    p_sweep.add_argument("--n-seeds", type=int, default=None, help="number of seeds")
    p_sweep.add_argument("--seed-base", type=int, default=0, help="first seed for --n-seeds")
    p_sweep.add_argument("-T", type=float, default=10.0)
    p_sweep.add_argument("--workers", type=int, default=None,
                         help="parallel workers (capped by LOEWNER_THREADS)")
    p_sweep.add_argument("--out", required=True, help="output file prefix")
    p_sweep.set_defaults(func=cmd_sweep)

    p_check = sub.add_parser("check", help="run verification suites")
    p_check.add_argument("--hcap", action="store_true", help="capacity normalization")
    p_check.add_argument("--weights", action="store_true", help="weak-convergence gaps")
    p_check.add_argument("--cara", action="store_true", help="map-convergence proxy")
    p_check.add_argument("--symmetry", action="store_true", help="exact map identities")
    p_check.add_argument("-N", type=int, default=1000)
    p_check.add_argument("-T", type=float, default=10.0)
    p_check.add_argument("--seeds", default=None, help="seeds for the random cara check")
    p_check.set_defaults(func=cmd_check)

    p_replay = sub.add_parser("replay", help="re-run a command from its manifest")
    p_replay.add_argument("manifest", help="path to a .manifest.json file")
    p_replay.add_argument("--out", default=None, help="override the output prefix")
    p_replay.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LoewnerError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
