"""Command-line front end: config parsing, campaign orchestration, data files.

Subcommands:
  run     one campaign, CCDF + summary output
  sweep   one campaign per power point (dB list)
  minpow  minimum enabling power for a given gain
  bound   pessimistic vs exact gain threshold, side by side

Everything at this boundary is dB; everything inside the library is linear.
The conversion happens in parse_config and nowhere else.  Output is
byte-stable: a fixed seed and config produce identical files.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

from . import channel, fbl, sim

__all__ = ["ConfigError", "parse_config", "default_config_dict", "emit_metrics", "main"]

# exit codes by error category
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTERNAL = 4

_CONFIG_KEYS = {
    "m": int,
    "p_db": float,
    "n0": float,
    "packet_bits": int,
    "latency_s": float,
    "subcarrier_hz": float,
    "per_target": float,
    "decoding_error": float,
    "outage_budget": float,
    "sigma_e2": float,
    "trials": int,
    "seed": int,
}


class ConfigError(ValueError):
    pass


def default_config_dict() -> dict:
    """Baseline OFDMA scenario: 256-bit packet in 0.5 ms at 240 kHz spacing."""
    return {
        "m": 20,
        "p_db": 10.0,
        "n0": 1.0,
        "packet_bits": 256,
        "latency_s": 0.5e-3,
        "subcarrier_hz": 240e3,
        "per_target": 1e-5,
        "decoding_error": 1e-5,
        "outage_budget": 0.0,
        "sigma_e2": 0.0,
        "trials": 10000,
        "seed": 20260810,
    }


def _coerce(key: str, value):
    if key not in _CONFIG_KEYS:
        raise ConfigError(f"{key}: unknown config key")
    try:
        return _CONFIG_KEYS[key](value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def parse_config(path: str | None, overrides: list[str] | None = None) -> sim.ScenarioConfig:
    """Read a JSON config file, apply key=value overrides, validate.

    path may be None to start from the built-in defaults.  Unknown keys are
    hard errors, in the file and in the overrides alike.
    """
    raw = default_config_dict()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        for key, value in loaded.items():
            raw[key] = _coerce(key, value)
    for item in overrides or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        raw[key] = _coerce(key.strip(), value.strip())
    try:
        return sim.ScenarioConfig(
            m=raw["m"],
            power=10.0 ** (raw["p_db"] / 10.0),
            trials=raw["trials"],
            seed=raw["seed"],
            noise_power=raw["n0"],
            packet_bits=raw["packet_bits"],
            latency_s=raw["latency_s"],
            subcarrier_hz=raw["subcarrier_hz"],
            per_target=raw["per_target"],
            decoding_error=raw["decoding_error"],
            outage_budget=raw["outage_budget"],
            sigma_e2=raw["sigma_e2"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _campaign_dict(metrics: sim.CampaignMetrics) -> dict:
    return {
        "kind": "campaign",
        "m": metrics.m,
        "p_db": metrics.power_db,
        "trials": metrics.trials_run,
        "allocators": {
            name: {
                "mean_capacity": am.mean_capacity,
                "avg_power_per_user_db": (
                    None if math.isnan(am.avg_power_per_user_db) else am.avg_power_per_user_db
                ),
                "ccdf": [[g, c] for g, c in am.ccdf],
            }
            for name, am in metrics.per_allocator.items()
        },
        "diagnostics": list(metrics.diagnostics),
    }


def _emit_campaign_csv(metrics: sim.CampaignMetrics, out: io.TextIOBase):
    out.write("allocator,gamma,ccdf\n")
    for name, am in metrics.per_allocator.items():
        for gamma, ccdf in am.ccdf:
            out.write(f"{name},{_fmt(gamma)},{_fmt(ccdf)}\n")


def _emit_sweep_csv(points: list[sim.CampaignMetrics], out: io.TextIOBase):
    out.write("allocator,P_db,avg_power_per_user_db,mean_capacity\n")
    for metrics in points:
        for name, am in metrics.per_allocator.items():
            out.write(
                f"{name},{_fmt(metrics.power_db)},{_fmt(am.avg_power_per_user_db)},"
                f"{_fmt(am.mean_capacity)}\n"
            )


def emit_metrics(metrics, fmt: str, path: str | None):
    """Write campaign or sweep metrics as CSV or JSON (path None = stdout)."""
    is_sweep = isinstance(metrics, list)
    if fmt == "csv":
        buf = io.StringIO()
        if is_sweep:
            _emit_sweep_csv(metrics, buf)
        else:
            _emit_campaign_csv(metrics, buf)
        text = buf.getvalue()
    elif fmt == "json":
        payload = (
            {"kind": "sweep", "points": [_campaign_dict(m) for m in metrics]}
            if is_sweep
            else _campaign_dict(metrics)
        )
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file (defaults used if omitted)")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    p.add_argument("--trials", type=int, help="shorthand for --set trials=N")
    p.add_argument("--seed", type=int, help="shorthand for --set seed=N")


def _add_output(p: argparse.ArgumentParser):
    p.add_argument("--out", help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument(
        "--allocators",
        default="sorting,equal,waterfilling,isnr",
        help="comma-separated subset of: sorting,equal,waterfilling,isnr",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urllc-alloc",
        description="Finite-blocklength power allocation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one campaign")
    _add_common(p_run)
    _add_output(p_run)

    p_sweep = sub.add_parser("sweep", help="run a sweep over power points")
    _add_common(p_sweep)
    _add_output(p_sweep)
    p_sweep.add_argument(
        "--p-db-list",
        required=True,
        help="comma-separated per-sub-channel powers in dB, e.g. 5,10,15,21",
    )

    p_min = sub.add_parser("minpow", help="minimum enabling power for a gain")
    _add_common(p_min)
    p_min.add_argument("--gain", type=float, required=True, help="linear channel gain")

    p_bound = sub.add_parser("bound", help="pessimistic vs exact gain threshold")
    _add_common(p_bound)
    p_bound.add_argument("--est-gain", type=float, required=True, help="estimated gain |h_est|^2")
    p_bound.add_argument("--sigma-e2", type=float, required=True, help="estimation error variance")
    p_bound.add_argument("--outage", type=float, required=True, help="outage budget")
    return parser


def _config_from_args(args) -> sim.ScenarioConfig:
    overrides = list(args.overrides)
    if args.trials is not None:
        overrides.append(f"trials={args.trials}")
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    return parse_config(args.config, overrides)


def _allocators_from_args(args) -> tuple[str, ...]:
    names = tuple(n.strip() for n in args.allocators.split(",") if n.strip())
    unknown = set(names) - set(sim.ALLOCATOR_NAMES)
    if unknown:
        raise ConfigError(f"unknown allocators: {sorted(unknown)}")
    if not names:
        raise ConfigError("at least one allocator is required")
    return names


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    metrics = sim.run_campaign(cfg, _allocators_from_args(args))
    emit_metrics(metrics, args.format, args.out)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    try:
        p_db_list = [float(x) for x in args.p_db_list.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --p-db-list: {exc}") from exc
    if not p_db_list:
        raise ConfigError("--p-db-list is empty")
    points = sim.sweep_power(cfg, p_db_list, _allocators_from_args(args))
    emit_metrics(points, args.format, args.out)
    return 0


def _cmd_minpow(args) -> int:
    cfg = _config_from_args(args)
    power = fbl.min_power_perfect(args.gain, cfg.fbl_params)
    if math.isinf(power):
        print(f"gain={_fmt(args.gain)} unreachable (above power ceiling)")
    else:
        print(
            f"gain={_fmt(args.gain)} min_power={_fmt(power)} "
            f"min_power_db={_fmt(10.0 * math.log10(power))}"
        )
    return 0


def _cmd_bound(args) -> int:
    if args.sigma_e2 <= 0.0:
        raise ConfigError("sigma_e2: must be > 0")
    if not 0.0 < args.outage < 1.0:
        raise ConfigError("outage: must be in (0, 1)")
    try:
        a_cher = channel.chernoff_gain(args.est_gain, args.sigma_e2, args.outage)
    except channel.NoSolutionError:
        print("chernoff threshold: no solution (treat as unreachable)")
        return 0
    a_exact = channel.exact_gain_threshold(args.est_gain, args.sigma_e2, args.outage)
    tail = channel.exact_gain_cdf(args.est_gain, args.sigma_e2, a_cher)
    print(f"chernoff_threshold={_fmt(a_cher)}")
    print(f"exact_threshold={_fmt(a_exact)}")
    print(f"exact_tail_at_chernoff={_fmt(tail)}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "minpow": _cmd_minpow,
        "bound": _cmd_bound,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error:config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, AssertionError, ArithmeticError) as exc:
        print(f"error:internal: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
