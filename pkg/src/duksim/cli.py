"""Command-line orchestration: config resolution, subcommands, artifact emission.

Configuration is a flat dotted-key map (``noise.alpha_exponent = 2``), read
from an optional config file, overridden by repeatable ``--set key=value``
flags and by the dedicated convenience flags.  Every run writes a
``manifest.json`` recording the fully resolved configuration; rerunning a
subcommand with the same resolved configuration reproduces all data files
byte for byte (the manifest differs only in its ``wall_clock`` block).

Exit codes: 0 all requested checks passed, 2 usage/configuration error,
3 divergence, 4 a check failed its window.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time

from . import __version__
from .duks import SimConfig, simulate_coupled
from .errors import ConfigurationError, DivergenceError
from .noise import NoiseScaling
from .validate import (
    epsilon_scaling_study,
    ou_statistics_check,
    pathwise_error,
    residual_order_study,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIVERGENCE = 3
EXIT_CHECK_FAILED = 4

DEFAULTS = {
    "eps": 0.1,
    "t0": 1.0,
    "truncation": 32,
    "dt": 0.01,
    "cadence": 1.0,
    "seed": 1,
    "r_weight": 2.0,
    "order": "first",
    "init.a1": "1+0j",
    "init.a3": "0.5+0j",
    "noise.amplitude": 1.0,
    "noise.alpha_exponent": 2.0,
    "noise.alpha_decay": 0.0,
    "noise.c_critical_exponent": 1.0,
    "noise.c_stable_exponent": 2.0,
}

_KEY_TYPES = {
    "eps": float, "t0": float, "truncation": int, "dt": float, "cadence": float,
    "seed": int, "r_weight": float, "order": str, "init.a1": str, "init.a3": str,
    "noise.amplitude": float, "noise.alpha_exponent": float,
    "noise.alpha_decay": float, "noise.c_critical_exponent": float,
    "noise.c_stable_exponent": float,
}


def load_config_file(path):
    """Read a flat ``key = value`` config file, or the config block of a manifest."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(text)
        if "config" not in payload:
            raise ConfigurationError(f"{path}: JSON config must carry a 'config' block")
        return {str(k): v for k, v in payload["config"].items()}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def resolve_config(file_values=None, overrides=None):
    """Merge defaults, config-file values and overrides into a typed map."""
    resolved = dict(DEFAULTS)
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key not in DEFAULTS:
                raise ConfigurationError(f"unknown configuration key {key!r}")
            caster = _KEY_TYPES[key]
            try:
                resolved[key] = caster(value)
            except (TypeError, ValueError) as err:
                raise ConfigurationError(f"bad value for {key!r}: {value!r}") from err
    if resolved["order"] not in ("first", "second"):
        raise ConfigurationError(f"order must be 'first' or 'second', got {resolved['order']!r}")
    for key in ("init.a1", "init.a3"):
        try:
            complex(str(resolved[key]))
        except ValueError as err:
            raise ConfigurationError(f"bad complex value for {key!r}: {resolved[key]!r}") from err
    return resolved


def build_sim_config(resolved) -> SimConfig:
    scaling = NoiseScaling(
        eps=resolved["eps"],
        amplitude=resolved["noise.amplitude"],
        alpha_exponent=resolved["noise.alpha_exponent"],
        alpha_decay=resolved["noise.alpha_decay"],
        c_critical_exponent=resolved["noise.c_critical_exponent"],
        c_stable_exponent=resolved["noise.c_stable_exponent"],
    )
    return SimConfig(
        eps=resolved["eps"],
        t0=resolved["t0"],
        truncation=resolved["truncation"],
        dt=resolved["dt"],
        cadence=resolved["cadence"],
        seed=resolved["seed"],
        a1_init=complex(str(resolved["init.a1"])),
        a3_init=complex(str(resolved["init.a3"])),
        scaling=scaling,
    )


def atomic_write_text(path, text):
    """Write via a temporary file and rename, so failures leave no partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_manifest(out_dir, command, resolved, outputs, started, extra=None):
    manifest = {
        "tool": "duksim",
        "version": __version__,
        "command": command,
        "config": resolved,
        "outputs": sorted(outputs),
        "wall_clock": {
            "started_unix": started,
            "elapsed_s": time.time() - started,
        },
    }
    if extra:
        manifest.update(extra)
    atomic_write_text(os.path.join(out_dir, "manifest.json"), dump_json(manifest))


def _add_common_flags(sub):
    sub.add_argument("--config", help="config file (flat key=value, or a manifest.json)")
    sub.add_argument("--set", dest="sets", action="append", default=[],
                     metavar="KEY=VALUE", help="override any dotted config key")
    sub.add_argument("--t0", type=float)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--out-dir", default=".", help="output directory")
    sub.add_argument("--noise-off", action="store_true", help="set noise.amplitude = 0")
    sub.add_argument("--order", choices=("first", "second"))
    sub.add_argument("--workers", type=int, default=None,
                     help="worker processes for ensembles (default: CPU count)")


def _collect_overrides(args, eps_scalar=None):
    overrides = {}
    for item in args.sets:
        if "=" not in item:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if eps_scalar is not None:
        overrides["eps"] = eps_scalar
    if args.t0 is not None:
        overrides["t0"] = args.t0
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.order is not None:
        overrides["order"] = args.order
    if getattr(args, "a1", None) is not None:
        overrides["init.a1"] = args.a1
    if getattr(args, "a3", None) is not None:
        overrides["init.a3"] = args.a3
    if args.noise_off:
        overrides["noise.amplitude"] = 0.0
    return overrides


def _parse_eps_list(text):
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as err:
        raise ConfigurationError(f"bad eps list {text!r}") from err
    return values


def _workers(args):
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigurationError("--workers must be >= 1")
        return args.workers
    return max(1, os.cpu_count() or 1)


def cmd_simulate(args):
    file_values = load_config_file(args.config) if args.config else None
    eps = args.eps if args.eps is not None else None
    resolved = resolve_config(file_values, _collect_overrides(args, eps_scalar=eps))
    config = build_sim_config(resolved)
    started = time.time()
    traj, amp = simulate_coupled(config)
    record = pathwise_error(traj, amp, r_weight=resolved["r_weight"],
                            order=resolved["order"])
    out_dir = args.out_dir
    atomic_write_text(os.path.join(out_dir, "trajectory.csv"),
                      "\n".join(traj.to_csv_lines()) + "\n")
    atomic_write_text(os.path.join(out_dir, "amplitudes.csv"),
                      "\n".join(amp.to_csv_lines()) + "\n")
    report = {
        "kind": "pathwise_error",
        "eps": record.eps,
        "seed": record.seed,
        "path": record.path,
        "r_weight": record.r_weight,
        "order": record.order,
        "e_r": record.e_r,
        "e_sup_v": record.e_sup_v,
        "e_sup_u": record.e_sup_u,
        "aborted": record.aborted,
        "sanity_l1_ok": record.sanity_l1_ok,
    }
    atomic_write_text(os.path.join(out_dir, "error_report.json"), dump_json(report))
    write_manifest(out_dir, "simulate", resolved,
                   ["trajectory.csv", "amplitudes.csv", "error_report.json"], started)
    return EXIT_OK


def cmd_scaling(args):
    file_values = load_config_file(args.config) if args.config else None
    resolved = resolve_config(file_values, _collect_overrides(args))
    eps_list = _parse_eps_list(args.eps)
    if len(set(eps_list)) < 3:
        raise ConfigurationError("scaling needs >= 3 distinct eps values")
    if args.paths < 16:
        raise ConfigurationError("scaling needs --paths >= 16")
    base = build_sim_config(resolved)
    started = time.time()
    table = epsilon_scaling_study(base, eps_list, args.paths,
                                  workers=_workers(args),
                                  r_weight=resolved["r_weight"],
                                  order=resolved["order"])
    out_dir = args.out_dir
    atomic_write_text(os.path.join(out_dir, "scaling.json"),
                      dump_json(table.to_json_dict()))
    atomic_write_text(os.path.join(out_dir, "scaling_paths.csv"),
                      "\n".join(table.to_csv_lines()) + "\n")
    write_manifest(out_dir, "scaling", resolved,
                   ["scaling.json", "scaling_paths.csv"], started,
                   extra={"eps_list": list(eps_list), "paths": args.paths})
    print(f"slope(e_sup_v) = {table.slopes['e_sup_v'][0]:.3f}  "
          f"success = {table.success_fraction:.3f}  e_r ratio = {table.e_r_ratio:.3f}")
    return EXIT_OK if all(table.passes.values()) else EXIT_CHECK_FAILED


def cmd_ou_check(args):
    file_values = load_config_file(args.config) if args.config else None
    resolved = resolve_config(file_values, _collect_overrides(args))
    scaling = build_sim_config(resolved).scaling
    started = time.time()
    report = ou_statistics_check(
        scaling,
        paths=args.paths,
        tail_paths=args.tail_paths,
        seed=resolved["seed"],
        weighted_paths=args.weighted_paths,
        truncation=resolved["truncation"],
        r_weight=resolved["r_weight"],
    )
    atomic_write_text(os.path.join(args.out_dir, "ou_check.json"), dump_json(report))
    write_manifest(args.out_dir, "ou-check", resolved, ["ou_check.json"], started)
    n_ok = sum(1 for m in report["moments"] if m["pass"])
    print(f"moments {n_ok}/{len(report['moments'])} pass; overall "
          f"{'PASS' if report['pass'] else 'FAIL'}")
    return EXIT_OK if report["pass"] else EXIT_CHECK_FAILED


def cmd_residuals(args):
    file_values = load_config_file(args.config) if args.config else None
    resolved = resolve_config(file_values, _collect_overrides(args))
    eps_list = _parse_eps_list(args.eps)
    if len(set(eps_list)) < 3:
        raise ConfigurationError("residuals needs >= 3 distinct eps values")
    base = build_sim_config(resolved)
    started = time.time()
    table = residual_order_study(base, eps_list)
    payload = table.to_json_dict()
    windows_ok = (
        all(table.residual_orders[k] >= 3.5 for k in (0, 1, 3))
        and table.residual_orders[5] >= 2.5
        and all(table.integrated_orders[j] >= 0.6 for j in (2, 4, 6))
    )
    payload["pass"] = bool(windows_ok)
    atomic_write_text(os.path.join(args.out_dir, "residuals.json"), dump_json(payload))
    write_manifest(args.out_dir, "residuals", resolved, ["residuals.json"], started,
                   extra={"eps_list": list(eps_list)})
    for k in sorted(table.residual_orders):
        print(f"mode {k}: order {table.residual_orders[k]:.2f}")
    for j in sorted(table.integrated_orders):
        print(f"integrated j={j}: order {table.integrated_orders[j]:.2f}")
    return EXIT_OK if windows_ok else EXIT_CHECK_FAILED


def build_parser():
    parser = argparse.ArgumentParser(
        prog="duksim",
        description="Spectral simulation and validation harness for a doubly "
                    "unstable fourth-order pattern equation with additive noise.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="one coupled full + amplitude path")
    _add_common_flags(sim)
    sim.add_argument("--eps", type=float)
    sim.add_argument("--a1", help="initial A1, e.g. '1+0.5j'")
    sim.add_argument("--a3", help="initial A3")
    sim.set_defaults(func=cmd_simulate)

    sca = subs.add_parser("scaling", help="eps-scaling ensemble study")
    _add_common_flags(sca)
    sca.add_argument("--eps", required=True, help="comma list, e.g. 0.2,0.1,0.05")
    sca.add_argument("--paths", type=int, required=True)
    sca.set_defaults(func=cmd_scaling)

    ouc = subs.add_parser("ou-check", help="noise process statistics checks")
    _add_common_flags(ouc)
    ouc.add_argument("--paths", type=int, default=10_000)
    ouc.add_argument("--tail-paths", type=int, default=1_000)
    ouc.add_argument("--weighted-paths", type=int, default=0,
                     help="paths for the weighted-supremum statistic (0 = skip)")
    ouc.set_defaults(func=cmd_ou_check)

    res = subs.add_parser("residuals", help="residual hierarchy order fits")
    _add_common_flags(res)
    res.add_argument("--eps", required=True, help="comma list, >= 3 values")
    res.set_defaults(func=cmd_residuals)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as err:
        print(f"divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
