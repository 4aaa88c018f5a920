"""Method registry, the evaluation loop and Table-1 style output."""

from __future__ import annotations

import argparse
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import static, temporal
from .color import ErrorStats, Illuminant, angular_error, summarize
from .dataset import DatasetManifest, SequenceRecord, load_frame, read_manifest
from .errors import EmptyInputError, TccError, ValidationError

TABLE_COLUMNS = ("Mean", "Med.", "Tri.", "B25%", "W25%", "W5%")
FOLDS = ("train", "test", "all")

Estimator = Callable[[Sequence[np.ndarray], SequenceRecord], Illuminant]


@dataclass(frozen=True)
class Param:
    name: str
    type: Callable[[str], Any]
    default: Any
    help: str = ""


@dataclass(frozen=True)
class MethodSpec:
    name: str
    temporal: bool  # False: the method only ever sees the shot frame
    params: tuple[Param, ...]
    build: Callable[[dict], Estimator]
    label: Callable[[dict], str]

    def parse(self, args: Sequence[str] = ()) -> dict:
        parser = argparse.ArgumentParser(prog=self.name, add_help=False, exit_on_error=False)
        for p in self.params:
            parser.add_argument(f"--{p.name.replace('_', '-')}", dest=p.name, type=p.type,
                                default=p.default, help=p.help)
        try:
            ns, rest = parser.parse_known_args(list(args))
        except argparse.ArgumentError as exc:
            raise ValidationError(f"{self.name}: {exc}") from exc
        if rest:
            raise ValidationError(f"{self.name}: unknown arguments {rest}")
        return vars(ns)

    def defaults(self) -> dict:
        return {p.name: p.default for p in self.params}


REGISTRY: dict[str, MethodSpec] = {}


def register(spec: MethodSpec) -> MethodSpec:
    REGISTRY[spec.name] = spec
    return spec


def resolve(name: str) -> MethodSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ValidationError(f"unknown method {name!r}; known: {', '.join(sorted(REGISTRY))}") from None


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:g}"


def _static(name, label, order, p, sigma):
    params = (
        Param("p", float, p, "Minkowski norm (inf for max)"),
        Param("sigma", float, sigma, "Gaussian pre-smoothing, pixels"),
    )

    def build(kw):
        gp = static.GrayEdgeParams(order, kw["p"], kw["sigma"])
        return lambda frames, rec: static.gray_edge_family(frames[-1], gp)

    def make_label(kw):
        if (kw["p"], kw["sigma"]) == (p, sigma):
            return label
        base = label.split(" (")[0]
        return f"{base} (p={_fmt(kw['p'])}, sigma={_fmt(kw['sigma'])})"

    register(MethodSpec(name, False, params, build, make_label))


_static("white-patch", "White-Patch", 0, math.inf, 0.0)
_static("gray-world", "Gray-World", 0, 1.0, 0.0)
_static("shades-of-gray", "Shades-of-Grey (p=4)", 0, 4.0, 0.0)
_static("general-gray-world", "General Grey-World (p=1, sigma=9)", 0, 1.0, 9.0)
_static("grey-edge-1", "1st-order Grey-Edge (p=1, sigma=9)", 1, 1.0, 9.0)
_static("grey-edge-2", "2nd-order Grey-Edge (p=1, sigma=9)", 2, 1.0, 9.0)

_TOP = Param("top_fraction", float, static.DEFAULT_TOP_FRACTION, "fraction of grayest pixels used")

register(MethodSpec(
    "grayness-index", False, (_TOP,),
    lambda kw: lambda frames, rec: static.grayness_index_estimate(frames[-1], kw["top_fraction"]),
    lambda kw: "Grayness Index (GI)",
))
register(MethodSpec(
    "t-gi", True, (_TOP,),
    lambda kw: lambda frames, rec: temporal.temporal_grayness_estimate(frames, kw["top_fraction"]).illuminant,
    lambda kw: "T.GI",
))

_BASE = Param("base", str, "gray-world", "single-frame method run on every frame")


def _base_estimator(name: str) -> Callable[[np.ndarray], Illuminant]:
    spec = resolve(name)
    if spec.temporal:
        raise ValidationError(f"base method must be single-frame, got {name!r}")
    est = spec.build(spec.defaults())
    return lambda frame: est([frame], None)


register(MethodSpec(
    "kalman-smooth", True,
    (_BASE,
     Param("obs_var", float, temporal.OBSERVATION_VARIANCE, "observation variance"),
     Param("q", float, temporal.TRANSITION_NOISE, "transition noise per step")),
    lambda kw: lambda frames, rec: temporal.smoothed_sequence_estimate(
        frames, _base_estimator(kw["base"]), temporal.constant_noise(kw["obs_var"]), kw["q"]
    ).illuminant,
    lambda kw: f"T.{resolve(kw['base']).label(resolve(kw['base']).defaults())} (Kalman)",
))


def _moving_average(kw):
    base = _base_estimator(kw["base"])
    return lambda frames, rec: temporal.moving_average_combine(
        [base(f) for f in frames], kw["window"], kw["decay"]
    )


register(MethodSpec(
    "moving-average", True,
    (_BASE, Param("window", int, 3, "frames averaged"),
     Param("decay", lambda s: None if s == "none" else float(s), None, "exponential weight or none")),
    _moving_average,
    lambda kw: f"{resolve(kw['base']).label(resolve(kw['base']).defaults())} (moving avg, w={kw['window']})",
))
register(MethodSpec("oracle", True, (), lambda kw: lambda frames, rec: rec.ground_truth,
                    lambda kw: "Oracle"))
register(MethodSpec(
    "fixed", False,
    (Param("r", float, 1.0), Param("g", float, 1.0), Param("b", float, 1.0)),
    lambda kw: (lambda est: lambda frames, rec: est)(Illuminant(kw["r"], kw["g"], kw["b"])),
    lambda kw: f"Fixed ({_fmt(kw['r'])}, {_fmt(kw['g'])}, {_fmt(kw['b'])})",
))


def _tcc_net(kw):
    from .net.checkpoint import load_checkpoint
    from .net.model import forward

    if not kw["checkpoint"]:
        raise ValidationError("tcc-net needs --checkpoint")
    config, params = load_checkpoint(kw["checkpoint"])
    return lambda frames, rec: forward(frames, config, params).illuminant


register(MethodSpec("tcc-net", True, (Param("checkpoint", str, ""),), _tcc_net,
                    lambda kw: "TCC-Net"))


@dataclass(frozen=True)
class RunConfig:
    manifest: Path
    method: str
    params: dict = field(default_factory=dict)
    fold: str = "test"
    out_dir: Optional[Path] = None
    # the built-in estimators are deterministic; kept so stochastic methods can be seeded
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        resolve(self.method)
        if self.fold not in FOLDS:
            raise ValidationError(f"fold must be one of {FOLDS}")


@dataclass(frozen=True)
class SequenceResult:
    id: str
    degrees: Optional[float]
    error: str = ""


@dataclass(frozen=True)
class TableRow:
    method: str
    stats: Optional[ErrorStats]
    failures: int
    log: tuple[SequenceResult, ...] = ()

    def check(self) -> None:
        ok = [r.degrees for r in self.log if r.degrees is not None]
        expected = summarize(ok) if ok else None
        if expected != self.stats:
            raise AssertionError(f"{self.method}: table stats disagree with the error log")
        if self.failures != sum(r.degrees is None for r in self.log):
            raise AssertionError(f"{self.method}: failure count disagrees with the error log")


@dataclass
class ResultsTable:
    rows: list[TableRow] = field(default_factory=list)

    def check(self) -> None:
        for row in self.rows:
            row.check()


def evaluate_method(
    spec: MethodSpec,
    params: dict,
    manifest: DatasetManifest,
    records: Sequence[SequenceRecord],
    workers: int = 1,
) -> TableRow:
    """Score one method on `records`; failures are logged and excluded from the stats."""
    estimator = spec.build(params)

    def one(record: SequenceRecord) -> SequenceResult:
        try:
            if spec.temporal:
                frames = manifest.load_frames(record)
            else:
                frames = [load_frame(manifest.frame_path(record, record.length - 1))]
            est = estimator(frames, record)
            return SequenceResult(record.id, angular_error(est, record.ground_truth))
        except (TccError, ValueError) as exc:
            return SequenceResult(record.id, None, f"{type(exc).__name__}: {exc}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            log = list(pool.map(one, records))
    else:
        log = [one(r) for r in records]
    ok = [r.degrees for r in log if r.degrees is not None]
    row = TableRow(spec.label(params), summarize(ok) if ok else None,
                   sum(r.degrees is None for r in log), tuple(log))
    row.check()
    return row


def run_benchmark(config: RunConfig) -> ResultsTable:
    manifest = read_manifest(config.manifest)
    records = manifest.fold(config.fold)
    if not records:
        raise EmptyInputError(f"fold {config.fold!r} of {config.manifest} is empty")
    spec = resolve(config.method)
    params = {**spec.defaults(), **config.params}
    table = ResultsTable([evaluate_method(spec, params, manifest, records, config.workers)])
    table.check()
    if config.out_dir is not None:
        write_outputs(table, config.out_dir)
    return table


def write_outputs(table: ResultsTable, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "table.md").write_bytes(emit_table(table, "markdown"))
    (out / "table.csv").write_bytes(emit_table(table, "csv"))
    (out / "errors.csv").write_bytes(emit_log(table))


def _cells(row: TableRow) -> list[str]:
    if row.stats is None:
        return ["-"] * len(TABLE_COLUMNS)
    return [f"{v:.2f}" for v in row.stats.as_tuple()]


def emit_table(table: ResultsTable, fmt: str = "markdown") -> bytes:
    """Deterministic rendering; mean, median, trimean, best and worst quartile, worst 5% and a failure count."""
    if not table.rows:
        raise EmptyInputError("no rows to emit")
    if fmt == "markdown":
        lines = [
            "| Method | " + " | ".join(TABLE_COLUMNS) + " | Fail. |",
            "|:--|" + "--:|" * (len(TABLE_COLUMNS) + 1),
        ]
        for row in table.rows:
            lines.append(f"| {row.method} | " + " | ".join(_cells(row)) + f" | {row.failures} |")
        return ("\n".join(lines) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Method", *TABLE_COLUMNS, "Failures"])
        for row in table.rows:
            w.writerow([row.method, *_cells(row), row.failures])
        return buf.getvalue().encode("utf-8")
    raise ValidationError(f"unknown table format {fmt!r}")


def emit_log(table: ResultsTable) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "id", "degrees", "error"])
    for row in table.rows:
        for r in row.log:
            w.writerow([row.method, r.id, "" if r.degrees is None else f"{r.degrees:.6f}", r.error])
    return buf.getvalue().encode("utf-8")
