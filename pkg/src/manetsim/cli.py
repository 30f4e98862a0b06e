"""Experiment orchestration: configuration, sweeps, seeding and CSV output.

Configs are plain key=value text. A numeric field may hold a comma-separated
list, which turns it into the sweep variable of the run (one swept variable
per run). Results land in one CSV table (a row per sweep point and protocol)
next to a manifest that records the resolved configuration and reparses into
an identical config.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .channel import ChannelParams
from .engine import SimulationPoint, run_point_parallel
from .metrics import AveragedMetrics, densities, topological_averages
from .protocols import PROTOCOL_NAMES, ProtocolConfig

_INT_FIELDS = {"M", "B", "max_hops", "topologies", "k1", "k2", "k3", "seed"}
SWEEPABLE_FIELDS = {
    "M",
    "r_net",
    "r_ex",
    "dest_distance",
    "mu",
    "p",
    "alpha",
    "sigma_s_db",
    "r_f",
    "g_over_h",
    "beta_db",
    "gamma_db",
    "B",
    "r_t",
    "r_g",
}

RESULT_COLUMNS = (
    "protocol",
    "reliability",
    "reliability_stderr",
    "request_reliability",
    "ack_reliability",
    "delivery_reliability",
    "mean_hops",
    "mean_cond_delay",
    "ase",
    "ase_stderr",
    "relay_density",
    "contention_density",
)


class ConfigError(ValueError):
    """A configuration file or flag failed validation."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment description. All dB-valued inputs (beta, gamma,
    shadowing deviation) are stored in dB and converted where modules need
    linear values."""

    M: int = 200
    r_net: float = 1.0
    r_ex: float = 0.05
    dest_distance: float = 0.5
    mu: float = 0.4
    p: float = 0.3
    alpha: float = 3.5
    sigma_s_db: float = 8.0
    r_f: float = 0.2
    g_over_h: float = 96.0
    beta_db: float = 0.0
    gamma_db: float = 0.0
    B: int = 4
    r_t: float = 0.4
    r_g: float = 0.15
    T: float = 1.0
    T_e: float = 1.2
    T_d: float = 0.1
    max_hops: int = 30
    topologies: int = 200
    k1: int = 10
    k2: int = 10
    k3: int = 10
    protocols: tuple[str, ...] = PROTOCOL_NAMES
    seed: int = 0
    sweep_var: str | None = None
    sweep_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not self.protocols:
            raise ConfigError("protocols must not be empty")
        for name in self.protocols:
            if name not in PROTOCOL_NAMES:
                raise ConfigError(f"unknown protocol {name!r}; choose from {PROTOCOL_NAMES}")
        if (self.sweep_var is None) != (self.sweep_values is None):
            raise ConfigError("sweep_var and sweep_values must be set together")
        if self.sweep_var is not None:
            if self.sweep_var not in SWEEPABLE_FIELDS:
                raise ConfigError(f"field {self.sweep_var!r} is not sweepable")
            if not self.sweep_values:
                raise ConfigError("sweep list must not be empty")
        # Surface bad field values now, not mid-run: build every point.
        for _, resolved in self.points():
            resolved.channel_params()
            for name in resolved.protocols:
                resolved.protocol_config(name)
            resolved.simulation_point()

    def points(self) -> list[tuple[float, "ExperimentConfig"]]:
        """(sweep value, resolved scalar config) per sweep point."""
        if self.sweep_var is None:
            return [(getattr(self, "dest_distance"), self)]
        out = []
        for value in self.sweep_values:
            cast = int(value) if self.sweep_var in _INT_FIELDS else float(value)
            out.append(
                (value, replace(self, sweep_var=None, sweep_values=None, **{self.sweep_var: cast}))
            )
        return out

    @property
    def sweep_column(self) -> str:
        return self.sweep_var if self.sweep_var is not None else "dest_distance"

    def channel_params(self) -> ChannelParams:
        try:
            return ChannelParams(
                alpha=self.alpha,
                sigma_s_db=self.sigma_s_db,
                r_f=self.r_f,
                g_over_h=self.g_over_h,
                gamma=10.0 ** (self.gamma_db / 10.0),
                beta=10.0 ** (self.beta_db / 10.0),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def protocol_config(self, name: str) -> ProtocolConfig:
        try:
            return ProtocolConfig(
                protocol=name, B=self.B, r_t=self.r_t, r_g=self.r_g, T=self.T, T_e=self.T_e, T_d=self.T_d
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def simulation_point(self) -> SimulationPoint:
        try:
            return SimulationPoint(
                M=self.M,
                r_net=self.r_net,
                r_ex=self.r_ex,
                dest_distance=self.dest_distance,
                mu=self.mu,
                p=self.p,
                channel=self.channel_params(),
                topologies=self.topologies,
                k1=self.k1,
                k2=self.k2,
                k3=self.k3,
                max_hops=self.max_hops,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            if f.name in ("sweep_var", "sweep_values"):
                continue
            value = getattr(self, f.name)
            if f.name == "protocols":
                lines.append(f"protocols = {','.join(value)}")
            elif f.name == self.sweep_var:
                lines.append(f"{f.name} = {','.join(repr(v) for v in self.sweep_values)}")
            else:
                lines.append(f"{f.name} = {value!r}")
        return "\n".join(lines) + "\n"


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    if name == "protocols":
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    if "," in raw:
        if name not in SWEEPABLE_FIELDS:
            raise ConfigError(f"field {name!r} cannot hold a sweep list")
        try:
            return tuple(float(part) for part in raw.split(",") if part.strip())
        except ValueError as exc:
            raise ConfigError(f"bad sweep list for {name!r}: {raw!r}") from exc
    try:
        if name in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name!r}: {raw!r}") from exc


def parse_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from an optional key=value file plus overrides.

    Overrides follow the same syntax as file entries and win over the file.
    An empty input yields the default configuration.
    """
    known = {f.name for f in fields(ExperimentConfig)} - {"sweep_var", "sweep_values"}
    values: dict = {}
    sweep: tuple[str, tuple[float, ...]] | None = None

    def absorb(name: str, raw: str, where: str):
        nonlocal sweep
        name = name.strip()
        if name not in known:
            raise ConfigError(f"unknown config field {name!r} in {where}")
        parsed = _parse_value(name, raw)
        if isinstance(parsed, tuple) and name != "protocols":
            if sweep is not None and sweep[0] != name:
                raise ConfigError(f"only one sweep variable allowed, got {sweep[0]!r} and {name!r}")
            sweep = (name, parsed)
            values.pop(name, None)
        else:
            if sweep is not None and sweep[0] == name:
                sweep = None
            values[name] = parsed

    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            name, raw = line.split("=", 1)
            absorb(name, raw, f"{path}:{lineno}")
    for name, raw in (overrides or {}).items():
        absorb(name, raw, "command line")

    if sweep is not None:
        values["sweep_var"], values["sweep_values"] = sweep
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _result_row(sweep_value, protocol: str, avg: AveragedMetrics, relay_density, contention_density) -> str:
    cells = [
        _fmt(sweep_value),
        protocol,
        _fmt(avg.reliability),
        _fmt(avg.reliability_stderr),
        _fmt(avg.request_reliability),
        _fmt(avg.ack_reliability),
        _fmt(avg.delivery_reliability),
        _fmt(avg.mean_hops),
        _fmt(avg.mean_delay),
        _fmt(avg.ase),
        _fmt(avg.ase_stderr),
        _fmt(relay_density),
        _fmt(contention_density),
    ]
    return ",".join(cells)


def run_experiment(
    config: ExperimentConfig,
    out_dir,
    workers: int = 1,
    echo=None,
) -> tuple[Path, Path]:
    """Run the configured sweep and stream results to ``out_dir``.

    Rows are flushed as each (point, protocol) pair completes, so an
    interrupted run leaves a readable partial table. Returns the paths of
    the results table and the manifest.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.txt"
    results_path = out_dir / "results.csv"

    stamp = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    manifest_path.write_text(f"# generated: {stamp}\n{config.to_text()}", encoding="utf-8")

    points = config.points()
    total = len(points) * len(config.protocols)
    done = 0
    with open(results_path, "w", encoding="utf-8") as fh:
        fh.write(config.sweep_column + "," + ",".join(RESULT_COLUMNS) + "\n")
        fh.flush()
        for value, resolved in points:
            point = resolved.simulation_point()
            relay_density, contention_density = densities(point.node_density, resolved.mu, resolved.p)
            for name in resolved.protocols:
                cfg = resolved.protocol_config(name)
                per_topology = run_point_parallel(point, cfg, resolved.seed, workers=workers)
                avg = topological_averages(per_topology)
                fh.write(_result_row(value, name, avg, relay_density, contention_density) + "\n")
                fh.flush()
                done += 1
                if echo:
                    echo(f"[{done}/{total}] {config.sweep_column}={value} protocol={name} "
                         f"reliability={avg.reliability:.4f} ase={avg.ase:.4f}")
    return results_path, manifest_path


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manetsim",
        description="Monte-Carlo comparison of AODV, greedy-forwarding and "
        "maximum-progress routing in a finite ad hoc network.",
    )
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    parser.add_argument("--protocol", metavar="LIST", help="comma-separated subset of aodv,gf,mp")
    parser.add_argument("--sweep", metavar="VAR=LIST", help="sweep variable and comma-separated values")
    parser.add_argument("--seed", type=int, metavar="N", help="master seed (non-negative integer)")
    parser.add_argument("--out", metavar="DIR", default="results", help="output directory")
    parser.add_argument("--topologies", type=int, metavar="N", help="number of random topologies")
    parser.add_argument(
        "--trials-per-layer",
        metavar="K",
        help="trials per simulation layer: one count for all three layers or 'k1,k2,k3'",
    )
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        dest="assignments",
        help="override any config field (repeatable)",
    )
    parser.add_argument(
        "--workers",
        type=int,
        metavar="N",
        help="worker processes (default: MANETSIM_WORKERS or 1)",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides: dict[str, str] = {}
    for assignment in args.assignments:
        if "=" not in assignment:
            print(f"error: --set expects KEY=VALUE, got {assignment!r}", file=sys.stderr)
            return 2
        key, raw = assignment.split("=", 1)
        overrides[key.strip()] = raw
    if args.protocol:
        overrides["protocols"] = args.protocol
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.topologies is not None:
        overrides["topologies"] = str(args.topologies)
    if args.trials_per_layer:
        parts = [p.strip() for p in args.trials_per_layer.split(",")]
        if len(parts) == 1:
            parts = parts * 3
        if len(parts) != 3:
            print("error: --trials-per-layer expects K or k1,k2,k3", file=sys.stderr)
            return 2
        overrides["k1"], overrides["k2"], overrides["k3"] = parts
    if args.sweep:
        if "=" not in args.sweep:
            print("error: --sweep expects VAR=LIST", file=sys.stderr)
            return 2
        var, raw = args.sweep.split("=", 1)
        overrides[var.strip()] = raw

    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("MANETSIM_WORKERS", "1"))

    try:
        config = parse_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    echo = None if args.quiet else (lambda msg: print(msg, file=sys.stderr, flush=True))
    try:
        results_path, manifest_path = run_experiment(config, args.out, workers=workers, echo=echo)
    except KeyboardInterrupt:
        print("interrupted; partial results were flushed", file=sys.stderr)
        return 130
    if echo:
        echo(f"results: {results_path}")
        echo(f"manifest: {manifest_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
