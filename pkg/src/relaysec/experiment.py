"""Parameter sweeps over (SNR, theta) written as CSV, and figure presets."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from relaysec.config import ExperimentConfig
from relaysec.secrecy import evaluate_point

COLUMNS = (
    "theta_rad", "snr_db", "d_min", "p_e", "p_e_stderr", "i_xs_yd", "i_xs_yd_stderr",
    "i_xs_ye", "i_xs_ye_stderr", "secrecy_rate", "secrecy_rate_raw", "upper_bound",
    "samples", "seed",
)

FIGURES = {
    "fig2": dict(snr_db=(10.0, 20.0)),
    "fig3": dict(snr_db=(5.0, 10.0)),
    "fig4": dict(snr_db=(20.0,)),
}
FIGURE_THETA = dict(theta_start=0.0, theta_stop=np.pi, theta_step=np.radians(1.0))


def grid_points(config: ExperimentConfig) -> list[tuple[float, float]]:
    """(snr_db, theta) pairs, SNR-major; row ``i`` is seeded with (seed, i)."""
    return [(snr, float(t)) for snr in config.snr_db for t in config.thetas]


def _row(config: ExperimentConfig, index: int, snr_db: float, theta: float) -> dict:
    point = evaluate_point(
        config.params(snr_db, theta), config.engine, config.precision,
        trials=config.trials, seed=[config.seed, index], detector=config.detector,
    )
    return {
        "theta_rad": theta,
        "snr_db": snr_db,
        "d_min": point.d_min,
        "p_e": point.p_e.value,
        "p_e_stderr": point.p_e.stderr,
        "i_xs_yd": point.i_destination.value,
        "i_xs_yd_stderr": point.i_destination.stderr,
        "i_xs_ye": point.i_eavesdropper.value,
        "i_xs_ye_stderr": point.i_eavesdropper.stderr,
        "secrecy_rate": point.secrecy_rate.value,
        "secrecy_rate_raw": point.secrecy_rate.unclamped,
        "upper_bound": point.upper_bound.value,
        "samples": config.trials,
        "seed": config.seed,
    }


def sweep_rows(config: ExperimentConfig) -> list[dict]:
    points = grid_points(config)

    def work(item):
        i, (snr, theta) = item
        return _row(config, i, snr, theta)

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            return list(pool.map(work, enumerate(points)))
    return [work(item) for item in enumerate(points)]


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if value == 0.0:
        value = 0.0  # no "-0"
    return f"{value:.6g}"


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()


def write_csv(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
    return path


def run_sweep(config: ExperimentConfig, out: str | Path | None = None) -> Path:
    out = out or config.out or "sweep.csv"
    return write_csv(sweep_rows(config), out)


def figure_config(which: str, config: ExperimentConfig | None = None,
                  explicit: set[str] = frozenset()) -> ExperimentConfig:
    """Figure preset (M=4, theta in [0, pi] at 1 deg) merged with ``config``;
    fields named in ``explicit`` keep the caller's value."""
    if which not in FIGURES:
        raise ValueError(f"unknown figure {which!r}; expected one of {sorted(FIGURES)}")
    config = config or ExperimentConfig()
    preset = {"order": 4, **FIGURE_THETA, **FIGURES[which]}
    return replace(config, **{k: v for k, v in preset.items() if k not in explicit})


def reproduce_figure(which: str, config: ExperimentConfig | None = None,
                     explicit: set[str] = frozenset(), out: str | Path | None = None) -> Path:
    cfg = figure_config(which, config, explicit)
    return run_sweep(cfg, out or cfg.out or f"{which}.csv")
