"""Command-line sweep driver: one row per SNR point with the Monte-Carlo
mutual information and the selected closed-form baselines, serialized as
CSV (default) or JSON.

Reproducibility: the seed of sweep point i is SeedSequence(seed,
spawn_key=(i,)), so identical specs produce byte-identical output files.
Rows are flushed as they complete, so interrupted runs keep finished points.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .closedform import (MAX_ANTENNAS, MAX_SAMPLES, high_snr_slope_capacity,
                         high_snr_slope_pilot, mi_lower_bound,
                         perfect_csi_capacity)
from .engine import StoppingRule, mutual_information
from .errors import BlockfadeError, UnsupportedRegimeError
from .model import ChannelConfig, snr_db_to_linear
from .pilots import pilot_se_boosted, pilot_se_uniform

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

BASELINE_NAMES = ("capacity", "pilot_uniform", "pilot_boost", "lower_bound",
                  "slopes")

COLUMNS = ("snr_db", "mi_bits", "mi_stderr", "n_samples", "cond_entropy_bits",
           "out_entropy_bits", "capacity_csi_bits", "pilot_uniform_bits",
           "pilot_uniform_np", "pilot_boost_bits", "lower_bound_bits",
           "ebn0_db", "degenerate_resample_count")

_DEFAULTS = {
    "nt": 1,
    "nr": 1,
    "nb": 10,
    "snr_db": "0:20:5",
    "ci_halfwidth": 0.005,
    "confidence": 0.90,
    "min_samples": 1000,
    "max_samples": 100_000_000,
    "seed": 0,
    "workers": 4,
    "baselines": "all",
    "grid_accel": False,
    "format": "csv",
    "output": "-",
}


class UsageError(BlockfadeError):
    """Malformed flags or config file (exit code 2)."""


@dataclass(frozen=True)
class SweepSpec:
    """Resolved sweep parameters (defaults < config file < flags)."""

    nt: int
    nr: int
    nb: int
    snr_start_db: float
    snr_stop_db: float
    snr_step_db: float
    ci_halfwidth: float
    confidence: float
    min_samples: int
    max_samples: int
    seed: int
    workers: int
    baselines: tuple
    grid_accel: bool
    format: str
    output: str

    def snr_grid_db(self):
        count = int(math.floor((self.snr_stop_db - self.snr_start_db)
                               / self.snr_step_db + 1e-9)) + 1
        return [self.snr_start_db + i * self.snr_step_db for i in range(count)]

    def echo(self) -> dict:
        d = asdict(self)
        d["baselines"] = ",".join(self.baselines) if self.baselines else "none"
        d["snr_db"] = (f"{self.snr_start_db:g}:{self.snr_stop_db:g}"
                       f":{self.snr_step_db:g}")
        for k in ("snr_start_db", "snr_stop_db", "snr_step_db"):
            del d[k]
        return d


@dataclass(frozen=True)
class SweepRow:
    """One serialized sweep point; absent baselines are None, never 0."""

    snr_db: float
    mi_bits: float
    mi_stderr: float
    n_samples: int
    cond_entropy_bits: float
    out_entropy_bits: float
    capacity_csi_bits: float | None
    pilot_uniform_bits: float | None
    pilot_uniform_np: int | None
    pilot_boost_bits: float | None
    lower_bound_bits: float | None
    ebn0_db: float | None
    degenerate_resample_count: int


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="blockfade-sweep",
        description="SNR sweep of the Gaussian-input mutual information on a "
                    "block Rayleigh-faded MIMO channel, with baselines.")
    p.add_argument("--nt", type=int, help="transmit antennas (>= nr)")
    p.add_argument("--nr", type=int, help="receive antennas")
    p.add_argument("--nb", type=int, help="coherence blocklength in symbols")
    p.add_argument("--snr-db", type=str,
                   help="grid START:STOP:STEP in dB (or a single value)")
    p.add_argument("--ci-halfwidth", type=float,
                   help="target CI halfwidth in bits/s/Hz")
    p.add_argument("--confidence", type=float, help="CI confidence in (0,1)")
    p.add_argument("--min-samples", type=int)
    p.add_argument("--max-samples", type=int)
    p.add_argument("--seed", type=int, help="master seed (64-bit)")
    p.add_argument("--workers", type=int, help="Monte-Carlo worker threads")
    p.add_argument("--baselines", type=str,
                   help="comma list of %s, or all|none" % "|".join(BASELINE_NAMES))
    p.add_argument("--grid-accel", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="precompute the density interpolation table")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--output", type=str, help="output path, '-' for stdout")
    p.add_argument("--config", type=str, help="JSON file with flag defaults")
    return p


def _parse_grid(text: str):
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            start = stop = float(parts[0])
            step = 1.0
        elif len(parts) == 3:
            start, stop, step = (float(v) for v in parts)
        else:
            raise ValueError
    except ValueError:
        raise UsageError(f"--snr-db expects START:STOP:STEP, got {text!r}") from None
    if step <= 0:
        raise UsageError(f"--snr-db step must be positive, got {step}")
    if stop < start:
        raise UsageError(f"--snr-db needs start <= stop, got {text!r}")
    return start, stop, step


def _parse_baselines(text: str):
    text = str(text).strip()
    if text == "all":
        return BASELINE_NAMES
    if text in ("none", ""):
        return ()
    names = tuple(t.strip() for t in text.split(","))
    for n in names:
        if n not in BASELINE_NAMES:
            raise UsageError(f"--baselines: unknown baseline {n!r} "
                             f"(choose from {', '.join(BASELINE_NAMES)})")
    return names


def parse_spec(argv=None) -> SweepSpec:
    """Resolve flags and the optional config file into a SweepSpec."""
    ns = _build_parser().parse_args(argv)
    merged = dict(_DEFAULTS)
    if ns.config is not None:
        try:
            with open(ns.config) as fh:
                data = json.load(fh)
        except OSError as e:
            raise UsageError(f"--config: cannot read {ns.config!r}: {e}") from None
        except json.JSONDecodeError as e:
            raise UsageError(f"--config: invalid JSON in {ns.config!r}: {e}") from None
        unknown = sorted(set(data) - set(_DEFAULTS))
        if unknown:
            raise UsageError(f"--config: unknown keys {unknown}")
        merged.update(data)
    for key in _DEFAULTS:
        v = getattr(ns, key, None)
        if v is not None:
            merged[key] = v

    start, stop, step = _parse_grid(merged["snr_db"])
    baselines = _parse_baselines(merged["baselines"])
    try:
        spec = SweepSpec(
            nt=int(merged["nt"]), nr=int(merged["nr"]), nb=int(merged["nb"]),
            snr_start_db=start, snr_stop_db=stop, snr_step_db=step,
            ci_halfwidth=float(merged["ci_halfwidth"]),
            confidence=float(merged["confidence"]),
            min_samples=int(merged["min_samples"]),
            max_samples=int(merged["max_samples"]),
            seed=int(merged["seed"]), workers=int(merged["workers"]),
            baselines=baselines, grid_accel=bool(merged["grid_accel"]),
            format=str(merged["format"]), output=str(merged["output"]))
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from None
    if spec.format not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {spec.format!r}")
    if spec.workers < 1:
        raise UsageError(f"--workers must be >= 1, got {spec.workers}")
    # surface config errors now, before any output is written
    try:
        ChannelConfig(spec.nt, spec.nr, spec.nb, 1.0)
        StoppingRule(spec.confidence, spec.ci_halfwidth, spec.min_samples,
                     spec.max_samples)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if spec.nb < spec.nt:
        raise UsageError(f"--nb must be >= --nt, got nb={spec.nb} nt={spec.nt}")
    if spec.nb > MAX_SAMPLES or spec.nt > MAX_ANTENNAS:
        raise UsageError(
            f"closed forms support nt <= {MAX_ANTENNAS} and nb <= "
            f"{MAX_SAMPLES}, got nt={spec.nt} nb={spec.nb}")
    return spec


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def compute_row(spec: SweepSpec, index: int, snr_db: float,
                warn=lambda msg: None) -> SweepRow:
    """Evaluate one sweep point; deterministic in (spec.seed, index)."""
    config = ChannelConfig(spec.nt, spec.nr, spec.nb, snr_db_to_linear(snr_db))
    rule = StoppingRule(confidence=spec.confidence,
                        halfwidth=spec.ci_halfwidth,
                        min_samples=spec.min_samples,
                        max_samples=spec.max_samples)
    seed = np.random.SeedSequence(entropy=spec.seed, spawn_key=(index,))
    est = mutual_information(config, rule, seed=seed, workers=spec.workers,
                             grid_accel=spec.grid_accel)

    capacity = pilot_u = pilot_np = pilot_b = lower = None
    if "capacity" in spec.baselines:
        capacity = perfect_csi_capacity(config)
    if "pilot_uniform" in spec.baselines:
        res = pilot_se_uniform(config)
        pilot_u, pilot_np = res.se_bits, res.n_p
    if "pilot_boost" in spec.baselines:
        try:
            pilot_b = pilot_se_boosted(config).se_bits
        except UnsupportedRegimeError as e:
            warn(f"snr_db={snr_db:g}: {e}")
    if "lower_bound" in spec.baselines:
        lower = mi_lower_bound(config)
    ebn0 = (10.0 * math.log10(config.snr / est.mi_bits)
            if est.mi_bits > 0 else None)
    return SweepRow(
        snr_db=snr_db, mi_bits=est.mi_bits, mi_stderr=est.stderr_bits,
        n_samples=est.n_samples, cond_entropy_bits=est.cond_entropy_bits,
        out_entropy_bits=est.out_entropy_bits, capacity_csi_bits=capacity,
        pilot_uniform_bits=pilot_u, pilot_uniform_np=pilot_np,
        pilot_boost_bits=pilot_b, lower_bound_bits=lower, ebn0_db=ebn0,
        degenerate_resample_count=est.degenerate_resamples)


def _spec_header(spec: SweepSpec) -> dict:
    echo = spec.echo()
    if "slopes" in spec.baselines:
        cfg = ChannelConfig(spec.nt, spec.nr, spec.nb, 1.0)
        echo["capacity_slope_per_3db"] = high_snr_slope_capacity(cfg)
        echo["pilot_slope_per_3db"] = high_snr_slope_pilot(cfg)
    return echo


def run_sweep(spec: SweepSpec, stream=None):
    """Run all sweep points, writing rows as they complete.

    Returns the list of SweepRow.  If `stream` is None, writes to
    spec.output ('-' meaning stdout).
    """
    own = stream is None and spec.output != "-"
    if stream is None:
        stream = sys.stdout if spec.output == "-" else open(spec.output, "w")
    rows = []
    grid = spec.snr_grid_db()
    header = _spec_header(spec)
    try:
        if spec.format == "csv":
            stream.write(f"# blockfade {__version__}\n")
            stream.write(f"# spec: {json.dumps(header)}\n")
            stream.write(",".join(COLUMNS) + "\n")
        else:
            stream.write('{"spec": %s, "rows": [' % json.dumps(header))
        stream.flush()
        for i, snr_db in enumerate(grid):
            try:
                row = compute_row(spec, i, snr_db,
                                  warn=lambda m: print(f"warning: {m}",
                                                       file=sys.stderr))
            except BlockfadeError as e:
                raise type(e)(f"at snr_db={snr_db:g}: {e}") from e
            rows.append(row)
            if spec.format == "csv":
                stream.write(",".join(_fmt(getattr(row, c)) for c in COLUMNS) + "\n")
            else:
                stream.write(("," if i else "") + json.dumps(asdict(row)))
            stream.flush()
        if spec.format == "json":
            stream.write("]}\n")
            stream.flush()
    finally:
        if own:
            stream.close()
    return rows


def main(argv=None) -> int:
    try:
        spec = parse_spec(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        run_sweep(spec)
    except BlockfadeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
