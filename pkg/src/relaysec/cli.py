"""Command-line entry point.

Exit status: 0 success, 1 failed verification check, 2 invalid
configuration, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from relaysec.config import ConfigError, ExperimentConfig, load_config, normalise_key, parse_config_text
from relaysec.constellation import extremal_phases, min_distance, superpose
from relaysec.experiment import FIGURES, figure_config, run_sweep
from relaysec.verify import format_report, run_checks

EXIT_OK, EXIT_CHECK_FAILED, EXIT_BAD_CONFIG, EXIT_IO = 0, 1, 2, 3

# flag -> config key; values stay strings until config parsing
_FLAGS = {
    "seed": "seed", "trials": "trials", "nodes": "nodes", "alpha": "alpha",
    "relay_power": "relay_power_db", "engine": "engine", "out": "out",
    "theta_start": "theta_start", "theta_stop": "theta_stop", "theta_step": "theta_step",
    "snr_db": "snr_db", "order": "order", "workers": "workers",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="key = value config file")
    p.add_argument("--seed")
    p.add_argument("--trials", help="SER trials (and MC samples for --engine mc)")
    p.add_argument("--nodes", help="Gauss-Hermite nodes per axis")
    relay = p.add_mutually_exclusive_group()
    relay.add_argument("--alpha", help="fixed relay amplification factor")
    relay.add_argument("--relay-power", metavar="DB", help="relay power in dB; alpha from the power constraint")
    p.add_argument("--engine", choices=("mc", "quad", "oracle"))
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--theta-start", metavar="DEG")
    p.add_argument("--theta-stop", metavar="DEG")
    p.add_argument("--theta-step", metavar="DEG")
    p.add_argument("--snr-db", metavar="LIST", help="comma-separated SNR points, P1 = P2 = 10^(dB/10)")
    p.add_argument("--order", metavar="M")
    p.add_argument("--workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaysec",
        description="Secrecy rate of a two-hop AF relay link with M-PSK friendly jamming.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("sweep", "evaluate the (SNR, theta) grid and write CSV"),
        ("fig2", "d_min and eavesdropper SER vs theta at 10 and 20 dB"),
        ("fig3", "secrecy rate and upper bound vs theta at 5 and 10 dB"),
        ("fig4", "secrecy rate and upper bound vs theta at 20 dB"),
        ("verify", "run the invariant checks"),
        ("extremal-phases", "phases minimising / maximising d_min"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "extremal-phases":
            p.add_argument("--grid-step", metavar="DEG", type=float, default=0.1)
    return parser


def _split_extra(extra: list[str]) -> dict[str, str]:
    out = {}
    for item in extra:
        if not item.startswith("--") or "=" not in item:
            raise ConfigError(item, "expected --key=value")
        key, value = item[2:].split("=", 1)
        out[key] = value
    return out


def _resolve_config(args, extra) -> tuple[ExperimentConfig, set[str]]:
    overrides = {key: getattr(args, flag) for flag, key in _FLAGS.items()
                 if getattr(args, flag, None) is not None}
    overrides.update(_split_extra(extra))
    # figure presets yield to any key the user set explicitly
    explicit = {normalise_key(k) for k in overrides}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            explicit |= set(parse_config_text(fh.read()))
    return load_config(args.config, overrides), explicit


def _cmd_extremal(cfg: ExperimentConfig, grid_step_deg: float) -> int:
    t0 = time.perf_counter()
    params = cfg.params(cfg.snr_db[0], 0.0)
    theta_h, theta_l = extremal_phases(params, np.radians(grid_step_deg))
    elapsed = time.perf_counter() - t0
    for label, th in (("theta_h", theta_h), ("theta_l", theta_l)):
        d = min_distance(superpose(params.order, params.p1, params.p2, th))
        print(f"{label} = {th:.6g} rad ({np.degrees(th):.4g} deg)  d_min = {d:.6g}")
    print(f"grid step {grid_step_deg:g} deg, {elapsed:.3f} s")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        cfg, explicit = _resolve_config(args, extra)
        if args.command == "extremal-phases":
            return _cmd_extremal(cfg, args.grid_step)
        if args.command == "verify":
            results = run_checks(cfg)
            print(format_report(results))
            return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED
        if args.command in FIGURES:
            cfg = figure_config(args.command, cfg, explicit)
            path = run_sweep(cfg, cfg.out or f"{args.command}.csv")
        else:
            path = run_sweep(cfg)
        print(f"wrote {path}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
