"""Experiment front end: config parsing, single runs, and arrival-rate sweeps.

Config files are flat key=value text, one key per line, ``#`` comments::

    mode=SW              # FR or SW (required)
    window=100           # frame / sliding-window slots (required)
    n_rx=500             # receiver memory; required for SW, frame-scoped in FR
    dist=crdsa2          # named (crdsa2, crdsa3, irsa4, irsa8) or inline "2:0.5,3:0.5"
    lambda=0.6           # required; also "0.1,0.2" or "0.1:1.2:0.1" (start:stop:step)
    total_slots=100000   # required
    warmup=1000          # default 10*window
    seed=1               # base seed; replication k uses seed+k
    replications=1
    t_slot=1.0
    t_p=250.0
    i_max=50
    bin_width_ms=1.0
    out=results          # output path prefix
    format=csv           # csv | json | both
    hist=off             # sweep: also write per-run histograms
    timestamp=on         # header timestamp line (also --no-timestamp)
    workers=1            # concurrent runs for sweeps

Subcommands: ``run`` (single point, full histogram), ``sweep`` (lambda sweep
with replications), ``analytic`` (per-slot placement probability terms and
the FR/SW equality check), ``oracle`` (re-decode a run trace with the
unbounded fixpoint oracle and diff against the decoder's events).
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .analytics import oracle_decode, p_uins_fr, p_uins_fr_terms, p_uins_sw, p_uins_sw_terms
from .engine import TRACE_FIELDS, run_simulation
from .metrics import delay_distribution, loss_rate, throughput
from .model import (
    AccessMode,
    ConfigError,
    DegreeDistribution,
    NAMED_DISTRIBUTIONS,
    SchemeConfig,
    TimeConfig,
    TrafficConfig,
    named_distribution,
)

SUMMARY_COLUMNS = (
    "lambda",
    "mode",
    "dist",
    "window",
    "n_rx",
    "seeds",
    "throughput_mean",
    "throughput_sd",
    "loss_rate_mean",
    "delay_mean_ms",
    "delay_p50_ms",
    "delay_p95_ms",
    "delay_p99_ms",
)

HIST_COLUMNS = ("delay_ms", "count", "pdf", "cdf")


@dataclass(frozen=True)
class ExperimentSpec:
    """A parsed, validated experiment description."""

    mode: AccessMode
    window: int
    n_rx: int
    dist_name: str
    dist: DegreeDistribution
    lambdas: tuple[float, ...]
    total_slots: int
    warmup: int
    base_seed: int
    replications: int
    t_slot: float = 1.0
    t_p: float = 250.0
    i_max: int = 50
    bin_width_ms: float = 1.0
    out: str = "results"
    format: str = "csv"
    hist: bool = False
    timestamp: bool = True
    workers: int = 1

    def scheme(self) -> SchemeConfig:
        return SchemeConfig(
            mode=self.mode,
            window_slots=self.window,
            degree_distribution=self.dist,
            receiver_memory_slots=self.n_rx,
            max_ic_iterations=self.i_max,
        )

    def traffic(self, lam: float, seed: int) -> TrafficConfig:
        return TrafficConfig(
            mean_arrival_rate=lam,
            total_slots=self.total_slots,
            warmup_slots=self.warmup,
            rng_seed=seed,
        )

    def time(self) -> TimeConfig:
        return TimeConfig(slot_duration_ms=self.t_slot, propagation_delay_ms=self.t_p)

    def seeds(self) -> tuple[int, ...]:
        return tuple(self.base_seed + k for k in range(self.replications))


class SpecError(ValueError):
    """Config text failed to parse or validate; message carries line numbers."""


def _parse_lambda(raw: str) -> tuple[float, ...]:
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ValueError("range form is start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError("range needs step > 0 and stop >= start")
        vals = []
        k = 0
        while True:
            v = start + k * step
            if v > stop + 1e-12:
                break
            vals.append(round(v, 12))
            k += 1
        return tuple(vals)
    return tuple(float(p) for p in raw.split(","))


def _parse_dist(raw: str) -> tuple[str, DegreeDistribution]:
    if raw in NAMED_DISTRIBUTIONS:
        return raw, named_distribution(raw)
    if ":" not in raw:
        known = ", ".join(sorted(NAMED_DISTRIBUTIONS))
        raise ValueError(f"unknown distribution {raw!r} (named: {known}; inline: 'l:p,l:p')")
    entries = []
    for part in raw.split(","):
        l, p = part.split(":")
        entries.append((int(l), float(p)))
    return raw, DegreeDistribution(tuple(entries))


_BOOL = {"on": True, "true": True, "1": True, "off": False, "false": False, "0": False}

# key -> (parser, required)
_KEYS = {
    "mode": (lambda s: AccessMode(s.upper()), True),
    "window": (int, True),
    "n_rx": (int, False),
    "dist": (_parse_dist, False),
    "lambda": (_parse_lambda, True),
    "total_slots": (int, True),
    "warmup": (int, False),
    "seed": (int, False),
    "replications": (int, False),
    "t_slot": (float, False),
    "t_p": (float, False),
    "i_max": (int, False),
    "bin_width_ms": (float, False),
    "out": (str, False),
    "format": (str, False),
    "hist": (lambda s: _BOOL[s.lower()], False),
    "timestamp": (lambda s: _BOOL[s.lower()], False),
    "workers": (int, False),
}


def parse_config(text: str) -> ExperimentSpec:
    """Parse and validate flat key=value config text.

    All problems are collected and reported together, each prefixed with its
    line number; unknown keys are errors.
    """
    values: dict[str, object] = {}
    errors: list[str] = []
    seen_lines: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key=value, got {line!r}")
            continue
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _KEYS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r} (first on line {seen_lines[key]})")
            continue
        seen_lines[key] = lineno
        parser, _ = _KEYS[key]
        try:
            values[key] = parser(raw)
        except (ValueError, KeyError, ConfigError) as exc:
            errors.append(f"line {lineno}: bad value for {key!r}: {exc}")
    for key, (_, required) in _KEYS.items():
        if required and key not in values:
            errors.append(f"missing required key {key!r}")
    if errors:
        raise SpecError("\n".join(errors))

    mode: AccessMode = values["mode"]  # type: ignore[assignment]
    window: int = values["window"]  # type: ignore[assignment]
    dist_name, dist = values.get("dist", ("crdsa2", named_distribution("crdsa2")))
    total_slots: int = values["total_slots"]  # type: ignore[assignment]
    warmup = values.get("warmup")
    if warmup is None:
        warmup = 10 * window
        if warmup >= total_slots:
            raise SpecError(
                f"default warmup (10*window = {warmup}) does not fit in "
                f"total_slots={total_slots}; set warmup explicitly"
            )
    n_rx = values.get("n_rx", window if mode is AccessMode.FR else None)
    if n_rx is None:
        raise SpecError("missing required key 'n_rx' (required in SW mode)")
    spec = dict(
        mode=mode,
        window=window,
        n_rx=n_rx,
        dist_name=dist_name,
        dist=dist,
        lambdas=values["lambda"],
        total_slots=total_slots,
        warmup=warmup,
        base_seed=values.get("seed", 0),
        replications=values.get("replications", 1),
    )
    for key, attr in (
        ("t_slot", "t_slot"),
        ("t_p", "t_p"),
        ("i_max", "i_max"),
        ("bin_width_ms", "bin_width_ms"),
        ("out", "out"),
        ("format", "format"),
        ("hist", "hist"),
        ("timestamp", "timestamp"),
        ("workers", "workers"),
    ):
        if key in values:
            spec[attr] = values[key]
    try:
        result = ExperimentSpec(**spec)  # type: ignore[arg-type]
        # fail fast on inconsistent combinations before any simulation work
        result.scheme()
        result.traffic(result.lambdas[0], result.base_seed)
        result.time()
    except ConfigError as exc:
        raise SpecError(str(exc)) from None
    if result.replications < 1:
        raise SpecError(f"replications must be >= 1, got {result.replications}")
    if result.format not in ("csv", "json", "both"):
        raise SpecError(f"format must be csv, json or both, got {result.format!r}")
    if result.workers < 1:
        raise SpecError(f"workers must be >= 1, got {result.workers}")
    return result


def _run_point(args: tuple[ExperimentSpec, float, int]) -> dict:
    spec, lam, seed = args
    try:
        r = run_simulation(spec.scheme(), spec.traffic(lam, seed), spec.time())
    except Exception as exc:
        raise RuntimeError(f"sweep point lambda={lam} seed={seed} failed: {exc}") from exc
    dist = delay_distribution(r, spec.bin_width_ms)
    return {
        "lambda": lam,
        "seed": seed,
        "throughput": throughput(r),
        "loss_rate": loss_rate(r),
        "delay_mean_ms": dist.mean_ms,
        "delay_p50_ms": dist.quantiles[0.5],
        "delay_p95_ms": dist.quantiles[0.95],
        "delay_p99_ms": dist.quantiles[0.99],
        "hist": (dist.lower_edges_ms.tolist(), dist.counts.tolist(), dist.pdf.tolist(), dist.cdf.tolist()),
    }


def _aggregate(spec: ExperimentSpec, lam: float, points: list[dict]) -> dict:
    thr = [p["throughput"] for p in points]
    row = {
        "lambda": lam,
        "mode": spec.mode.value,
        "dist": spec.dist_name,
        "window": spec.window,
        "n_rx": spec.n_rx,
        "seeds": len(points),
        "throughput_mean": statistics.fmean(thr),
        "throughput_sd": statistics.stdev(thr) if len(thr) > 1 else 0.0,
        "loss_rate_mean": statistics.fmean(p["loss_rate"] for p in points),
        "delay_mean_ms": statistics.fmean(p["delay_mean_ms"] for p in points),
        "delay_p50_ms": statistics.fmean(p["delay_p50_ms"] for p in points),
        "delay_p95_ms": statistics.fmean(p["delay_p95_ms"] for p in points),
        "delay_p99_ms": statistics.fmean(p["delay_p99_ms"] for p in points),
    }
    return row


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _write_summary_csv(path: Path, rows: list[dict], timestamp: bool) -> None:
    with open(path, "w", newline="") as fh:
        if timestamp:
            fh.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])


def _write_summary_json(path: Path, spec: ExperimentSpec, rows: list[dict], timestamp: bool) -> None:
    payload = {
        "config": {
            "mode": spec.mode.value,
            "window": spec.window,
            "n_rx": spec.n_rx,
            "dist": spec.dist_name,
            "dist_entries": list(spec.dist.entries),
            "lambdas": list(spec.lambdas),
            "total_slots": spec.total_slots,
            "warmup": spec.warmup,
            "seed": spec.base_seed,
            "replications": spec.replications,
            "t_slot": spec.t_slot,
            "t_p": spec.t_p,
            "i_max": spec.i_max,
            "bin_width_ms": spec.bin_width_ms,
        },
        "rows": rows,
    }
    if timestamp:
        payload["generated"] = datetime.now(timezone.utc).isoformat()
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_hist_csv(path: Path, hist, timestamp: bool) -> None:
    edges, counts, pdf, cdf = hist
    with open(path, "w", newline="") as fh:
        if timestamp:
            fh.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        w = csv.writer(fh)
        w.writerow(HIST_COLUMNS)
        for e, c, p, f in zip(edges, counts, pdf, cdf):
            w.writerow([_fmt(float(e)), c, _fmt(float(p)), _fmt(float(f))])


def run_sweep(spec: ExperimentSpec, no_timestamp: bool = False) -> list[dict]:
    """Run every (lambda, seed) point, aggregate per lambda, write outputs.

    Returns the summary rows. Replications of a lambda use seeds
    base_seed..base_seed+replications-1; points may run in parallel
    (workers > 1) and are aggregated in deterministic order.
    """
    timestamp = spec.timestamp and not no_timestamp
    jobs = [(spec, lam, seed) for lam in spec.lambdas for seed in spec.seeds()]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            points = list(pool.map(_run_point, jobs))
    else:
        points = [_run_point(j) for j in jobs]
    rows = []
    per_lambda = len(spec.seeds())
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    for i, lam in enumerate(spec.lambdas):
        chunk = points[i * per_lambda : (i + 1) * per_lambda]
        rows.append(_aggregate(spec, lam, chunk))
        if spec.hist:
            for p in chunk:
                hist_path = out.with_name(f"{out.name}_hist_l{lam:g}_s{p['seed']}.csv")
                _write_hist_csv(hist_path, p["hist"], timestamp)
    if spec.format in ("csv", "both"):
        _write_summary_csv(out.with_name(out.name + "_summary.csv"), rows, timestamp)
    if spec.format in ("json", "both"):
        _write_summary_json(out.with_name(out.name + "_summary.json"), spec, rows, timestamp)
    return rows


def _cmd_run(args) -> int:
    spec = parse_config(Path(args.config).read_text())
    if len(spec.lambdas) != 1:
        print("run expects a single lambda value; use the sweep subcommand for lists", file=sys.stderr)
        return 2
    if spec.replications != 1:
        print("run executes one replication; ignoring replications>1", file=sys.stderr)
    lam = spec.lambdas[0]
    timestamp = spec.timestamp and not args.no_timestamp
    r = run_simulation(
        spec.scheme(), spec.traffic(lam, spec.base_seed), spec.time(), trace_path=args.trace
    )
    dist = delay_distribution(r, spec.bin_width_ms)
    point = {
        "lambda": lam,
        "seed": spec.base_seed,
        "throughput": throughput(r),
        "loss_rate": loss_rate(r),
        "delay_mean_ms": dist.mean_ms,
        "delay_p50_ms": dist.quantiles[0.5],
        "delay_p95_ms": dist.quantiles[0.95],
        "delay_p99_ms": dist.quantiles[0.99],
    }
    row = _aggregate(spec, lam, [point])
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if spec.format in ("csv", "both"):
        _write_summary_csv(out.with_name(out.name + "_summary.csv"), [row], timestamp)
    if spec.format in ("json", "both"):
        _write_summary_json(out.with_name(out.name + "_summary.json"), spec, [row], timestamp)
    _write_hist_csv(
        out.with_name(out.name + "_hist.csv"),
        (dist.lower_edges_ms.tolist(), dist.counts.tolist(), dist.pdf.tolist(), dist.cdf.tolist()),
        timestamp,
    )
    print(
        f"lambda={lam:g} throughput={row['throughput_mean']:.4f} "
        f"loss={row['loss_rate_mean']:.4g} mean_delay={row['delay_mean_ms']:.2f}ms"
    )
    return 0


def _cmd_sweep(args) -> int:
    spec = parse_config(Path(args.config).read_text())
    rows = run_sweep(spec, no_timestamp=args.no_timestamp)
    for row in rows:
        print(
            f"lambda={row['lambda']:g} throughput={row['throughput_mean']:.4f}"
            f"±{row['throughput_sd']:.4f} loss={row['loss_rate_mean']:.4g}"
        )
    return 0


def _cmd_analytic(args) -> int:
    l, n_f, n_sw = args.degree, args.n_frame, args.n_window
    if not 1 <= l <= n_sw <= n_f:
        print(f"need 1 <= l <= N_sw <= N_f, got l={l}, N_sw={n_sw}, N_f={n_f}", file=sys.stderr)
        return 2
    fr_terms = p_uins_fr_terms(l, n_f)
    sw_terms = p_uins_sw_terms(l, n_f, n_sw)
    print(f"FR per-slot placement probability, l={l}, N_f={n_f}")
    for i, t in enumerate(fr_terms, start=1):
        print(f"  replica {i}: {t:.12f}")
    fr = p_uins_fr(l, n_f)
    print(f"  sum = {fr:.12f}   l/N_f = {l / n_f:.12f}")
    print(f"SW per-slot placement probability, l={l}, N_sw={n_sw}, horizon N_f={n_f}")
    print(f"  first replica: {sw_terms[0]:.12f}")
    for j, t in enumerate(sw_terms[1:], start=1):
        print(f"  replica {j + 1} (windowed): {t:.12f}")
    sw = p_uins_sw(l, n_f, n_sw)
    print(f"  sum = {sw:.12f}   l/N_f = {l / n_f:.12f}")
    equal = abs(fr - sw) < 1e-12 and abs(fr - l / n_f) < 1e-12
    print(f"equality FR == SW == l/N_f: {'OK' if equal else 'VIOLATED'}")
    return 0 if equal else 1


def _cmd_oracle(args) -> int:
    placements: dict[int, set[int]] = {}
    decoder_decoded: set[int] = set()
    with open(args.trace, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(TRACE_FIELDS):
            print(f"unexpected trace columns {reader.fieldnames}", file=sys.stderr)
            return 2
        for line in reader:
            pid = int(line["packet_id"])
            if line["event"] == "replica":
                placements.setdefault(pid, set()).add(int(line["slot_index"]))
            elif line["event"] == "decode":
                decoder_decoded.add(pid)
    oracle = oracle_decode(placements, verify_residual=True)
    only_oracle = sorted(oracle - decoder_decoded)
    only_decoder = sorted(decoder_decoded - oracle)
    print(f"packets={len(placements)} decoder_decoded={len(decoder_decoded)} oracle_decoded={len(oracle)}")
    if not only_oracle and not only_decoder:
        print("MATCH: decoder events equal the unbounded-memory fixpoint")
        return 0
    if only_oracle:
        print(f"oracle-only ({len(only_oracle)}): {only_oracle[:20]}")
    if only_decoder:
        print(f"decoder-only ({len(only_decoder)}): {only_decoder[:20]}")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="craloha",
        description="Framed / sliding-window CRDSA-IRSA simulator and sweep runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation with full delay histogram")
    p_run.add_argument("config")
    p_run.add_argument("--trace", default=None, help="write a decode/loss event trace CSV")
    p_run.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="lambda sweep with replications")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_an = sub.add_parser("analytic", help="placement probability terms and FR/SW equality")
    p_an.add_argument("degree", type=int)
    p_an.add_argument("n_frame", type=int)
    p_an.add_argument("n_window", type=int)
    p_an.set_defaults(func=_cmd_analytic)

    p_or = sub.add_parser("oracle", help="re-decode a trace and diff against decoder events")
    p_or.add_argument("trace")
    p_or.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, ConfigError) as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
