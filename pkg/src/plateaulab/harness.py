"""Seeded experiment orchestration: sweeps, restart and dilution runs, CSV/SVG."""

from __future__ import annotations

import configparser
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from . import oracle, theory
from .core import FixedOnes, InitDistribution, Point, Uniform, UniformNonOptimal
from .ea import DEFAULT_CAP, RlsMutation, RunConfig, RunResult, run
from .fitness import (
    BlockMajorityFitness,
    FitnessFunction,
    MajorityFitness,
    make_fitness,
)

CSV_HEADER = "n,r,ell,runs,mean,median,p25,p75,stderr,censored"


@dataclass(frozen=True)
class CellStats:
    """Summary of the uncensored run times of one sweep cell."""

    runs: int
    mean: float
    median: float
    p25: float
    p75: float
    stderr: float
    censored: int

    @classmethod
    def from_runtimes(cls, runtimes: Sequence[Optional[int]]) -> "CellStats":
        total = len(runtimes)
        finite = np.asarray([t for t in runtimes if t is not None], dtype=float)
        censored = total - len(finite)
        if len(finite) == 0:
            nan = math.nan
            return cls(total, nan, nan, nan, nan, nan, censored)
        stderr = (
            float(finite.std(ddof=1) / math.sqrt(len(finite)))
            if len(finite) > 1
            else 0.0
        )
        return cls(
            runs=total,
            mean=float(finite.mean()),
            median=float(np.median(finite)),
            p25=float(np.percentile(finite, 25)),
            p75=float(np.percentile(finite, 75)),
            stderr=stderr,
            censored=censored,
        )


@dataclass(frozen=True)
class CellResult:
    n: int
    r: int
    ell: int
    stats: CellStats


@dataclass(frozen=True)
class ExperimentSpec:
    """Flat description of a sweep; every field has a config-file key.

    ``r`` is the fixed majority surplus; with r_rule="sqrt" it is derived
    as floor(sqrt(n)) per problem size instead.  For onemax-neutral, ``n``
    counts blocks and ``k`` is the block width.
    """

    function: str = "majority"
    n_values: tuple[int, ...] = (100,)
    ell_values: tuple[int, ...] = (1,)
    r: Optional[int] = None
    r_rule: str = "fixed"
    k: int = 1
    runs: int = 100
    master_seed: int = 1
    cap: int = DEFAULT_CAP
    init: str = "uniform"
    csv_path: Optional[str] = None
    svg_path: Optional[str] = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.r_rule not in ("fixed", "sqrt"):
            raise ValueError(f"r rule must be 'fixed' or 'sqrt', got {self.r_rule!r}")
        if not self.n_values or not self.ell_values:
            raise ValueError("n and ell lists must be non-empty")

    def resolve_r(self, n: int) -> int:
        if self.r_rule == "sqrt":
            return math.isqrt(n)
        return 0 if self.r is None else self.r


def parse_init(text: str, fitness: FitnessFunction) -> InitDistribution:
    """Parse an init spec: uniform | uniform-nonopt | ones=J | point=BITS."""
    if text == "uniform":
        return Uniform()
    if text == "uniform-nonopt":
        return UniformNonOptimal(fitness)
    if text.startswith("ones="):
        return FixedOnes(int(text[5:]))
    if text.startswith("point="):
        return Point(text[6:])
    raise ValueError(
        f"unknown init {text!r}; expected uniform, uniform-nonopt, ones=J or point=BITS"
    )


def _build_fitness(kind: str, args: tuple) -> FitnessFunction:
    if kind == "block":
        block, blocks, k = args
        return BlockMajorityFitness(block, blocks, k)
    n, r, k = args
    return make_fitness(kind, n, r=r, k=k)


def _workload(payload):
    """Run a contiguous block of seeded runs; picklable for process pools."""
    kind, fit_args, ell, init_text, seed, start, count, cap, want_restart = payload
    fit = _build_fitness(kind, fit_args)
    init = parse_init(init_text, fit)
    mutation = RlsMutation(ell)
    out = []
    for idx in range(start, start + count):
        res = run(
            RunConfig(
                fit,
                mutation,
                init,
                seed,
                idx,
                cap,
                record_restart_stats=want_restart,
            )
        )
        if want_restart:
            rs = res.restart
            out.append(
                (
                    res.runtime,
                    res.init_ones,
                    rs.retries,
                    rs.first_hit_majority,
                    rs.partial,
                )
            )
        else:
            out.append((res.runtime, res.init_ones))
    return out


def _execute(payloads: list, workers: int) -> list:
    if workers <= 1 or len(payloads) <= 1:
        return [_workload(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_workload, payloads))


def _chunked(start: int, count: int, pieces: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(count / pieces))
    spans = []
    done = 0
    while done < count:
        take = min(size, count - done)
        spans.append((start + done, take))
        done += take
    return spans


def sweep(spec: ExperimentSpec) -> list[CellResult]:
    """Run every (n, ell) cell of the spec and summarize it.

    Run seeds are (master_seed, cell_index * runs + run_index), so the
    output is identical regardless of worker count or scheduling.  Writes
    the CSV/SVG outputs when paths are set.
    """
    cells = []
    for n in spec.n_values:
        r = spec.resolve_r(n)
        for ell in spec.ell_values:
            cells.append((n, r, ell))
    payloads = []
    spans_per_cell = []
    for cell_index, (n, r, ell) in enumerate(cells):
        fit_args = (n, r, spec.k)
        _build_fitness(spec.function, fit_args)  # validate cell parameters early
        base = cell_index * spec.runs
        spans = _chunked(base, spec.runs, max(1, spec.workers * 4))
        spans_per_cell.append(len(spans))
        for start, count in spans:
            payloads.append(
                (
                    spec.function,
                    fit_args,
                    ell,
                    spec.init,
                    spec.master_seed,
                    start,
                    count,
                    spec.cap,
                    False,
                )
            )
    blocks = _execute(payloads, spec.workers)
    results = []
    cursor = 0
    for (n, r, ell), span_count in zip(cells, spans_per_cell):
        runtimes: list[Optional[int]] = []
        for block in blocks[cursor : cursor + span_count]:
            runtimes.extend(t for t, _ in block)
        cursor += span_count
        results.append(CellResult(n, r, ell, CellStats.from_runtimes(runtimes)))
    if spec.csv_path:
        write_csv(results, spec.csv_path)
    if spec.svg_path:
        emit_sweep_svg(results, spec.svg_path)
    return results


@dataclass(frozen=True)
class RestartReport:
    """Measured restart decomposition on the one-sided objective."""

    n: int
    r: int
    runs: int
    censored: int
    p0_hat: float
    p0_stderr: float
    retried_runs: int
    mean_retries: Optional[float]
    retries_stderr: Optional[float]


def restart_experiment(
    n: int,
    r: int,
    runs: int,
    master_seed: int,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
) -> RestartReport:
    """Estimate the first-hit success probability and the retry count.

    p0_hat is the fraction of runs whose first plateau optimum already had
    a majority of ones; mean_retries averages the retry count over runs
    that needed at least one retry (None when no run did).
    """
    payloads = [
        (("majority"), (n, r, 1), 1, "uniform", master_seed, start, count, cap, True)
        for start, count in _chunked(0, runs, max(1, workers * 4))
    ]
    rows = [row for block in _execute(payloads, workers) for row in block]
    complete = [row for row in rows if not row[4]]
    censored = len(rows) - len(complete)
    if not complete:
        raise RuntimeError("every run was censored; raise the cap")
    first = np.asarray([1.0 if row[3] else 0.0 for row in complete])
    p0 = float(first.mean())
    p0_se = float(first.std(ddof=1) / math.sqrt(len(first))) if len(first) > 1 else 0.0
    retries = np.asarray([row[2] for row in complete if row[2] >= 1], dtype=float)
    if len(retries) == 0:
        mean_retries, retries_se = None, None
    else:
        mean_retries = float(retries.mean())
        retries_se = (
            float(retries.std(ddof=1) / math.sqrt(len(retries)))
            if len(retries) > 1
            else 0.0
        )
    return RestartReport(
        n=n,
        r=r,
        runs=runs,
        censored=censored,
        p0_hat=p0,
        p0_stderr=p0_se,
        retried_runs=int(len(retries)),
        mean_retries=mean_retries,
        retries_stderr=retries_se,
    )


@dataclass(frozen=True)
class DilutionReport:
    """Single-block run times against blocks * exact one-block expectation."""

    blocks: int
    k: int
    runs: int
    censored: int
    mean_runtime: float
    stderr: float
    exact_block_time: float
    ratio: float
    ratio_stderr: float
    block_bound: float


def dilution_experiment(
    blocks: int,
    k: int,
    runs: int,
    master_seed: int,
    cap: int = DEFAULT_CAP,
    workers: int = 1,
) -> DilutionReport:
    """Measure how a width-k block vote dilutes inside a blocks*k genotype.

    Each mutation hits the scored block with chance 1/blocks, so the mean
    run time should equal blocks times the exact single-block expectation;
    the report carries the ratio of the two, which should be 1 within
    noise, and the closed-form ceiling 6 + k/2 for the block expectation.
    """
    if k < 2 or k % 2:
        raise ValueError(f"block width must be an even integer >= 2, got {k}")
    payloads = [
        ("block", (1, blocks, k), 1, "uniform", master_seed, start, count, cap, False)
        for start, count in _chunked(0, runs, max(1, workers * 4))
    ]
    rows = [row for block in _execute(payloads, workers) for row in block]
    finite = np.asarray([t for t, _ in rows if t is not None], dtype=float)
    censored = len(rows) - len(finite)
    if len(finite) == 0:
        raise RuntimeError("every run was censored; raise the cap")
    mean = float(finite.mean())
    se = float(finite.std(ddof=1) / math.sqrt(len(finite))) if len(finite) > 1 else 0.0
    exact = oracle.expected_under_init(
        oracle.majority_hitting_by_level(k, 1), k, Uniform()
    )
    scale = blocks * exact
    return DilutionReport(
        blocks=blocks,
        k=k,
        runs=runs,
        censored=censored,
        mean_runtime=mean,
        stderr=se,
        exact_block_time=exact,
        ratio=mean / scale,
        ratio_stderr=se / scale,
        block_bound=theory.block_bound(k),
    )


def trajectory_capture(
    n: int, r: int, ell: int, master_seed: int, cap: int = DEFAULT_CAP
) -> RunResult:
    """One instrumented run on the one-sided objective from a non-optimal uniform start."""
    fit = MajorityFitness(n, r)
    cfg = RunConfig(
        fit,
        RlsMutation(ell),
        UniformNonOptimal(fit),
        master_seed,
        0,
        cap,
        record_trajectory=True,
    )
    return run(cfg)


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: Sequence[CellResult], path: str) -> None:
    """Write sweep rows under the fixed header; floats keep full precision."""
    if not rows:
        raise ValueError("refusing to write an empty table")
    lines = [CSV_HEADER]
    for row in rows:
        s = row.stats
        lines.append(
            ",".join(
                _format_value(v)
                for v in (
                    row.n,
                    row.r,
                    row.ell,
                    s.runs,
                    s.mean,
                    s.median,
                    s.p25,
                    s.p75,
                    s.stderr,
                    s.censored,
                )
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str) -> list[CellResult]:
    """Read a table written by write_csv back into sweep rows."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"expected header {CSV_HEADER!r}")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        n, r, ell, runs = (int(parts[i]) for i in range(4))
        mean, median, p25, p75, stderr = (float(parts[i]) for i in range(4, 9))
        censored = int(parts[9])
        rows.append(
            CellResult(
                n, r, ell, CellStats(runs, mean, median, p25, p75, stderr, censored)
            )
        )
    return rows


def read_table(path: str) -> tuple[list[str], list[list[float]]]:
    """Read any numeric CSV as (header, rows of floats) for plotting."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if len(lines) < 2:
        raise ValueError("table must have a header and at least one row")
    header = lines[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return header, rows


@dataclass(frozen=True)
class PlotSpec:
    """Chart description for emit_svg."""

    x: str = "ell"
    y: tuple[str, ...] = ("mean", "median")
    logx: bool = False
    logy: bool = False
    title: str = ""
    width: int = 640
    height: int = 440


_SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_MARGIN = 56.0


def _axis_ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        lo_e, hi_e = math.floor(lo), math.ceil(hi)
        if hi_e == lo_e:
            hi_e += 1
        return [float(e) for e in range(lo_e, hi_e + 1)]
    if hi == lo:
        return [lo]
    step = (hi - lo) / 4.0
    return [lo + i * step for i in range(5)]


def _tick_label(value: float, log: bool) -> str:
    if log:
        return f"1e{int(value)}" if value != int(value) else f"1e{int(value)}"
    return f"{value:.6g}"


def emit_svg(
    header: Sequence[str],
    rows: Sequence[Sequence[float]],
    spec: PlotSpec,
    path: str,
    series_labels: Optional[Sequence[str]] = None,
    groups: Optional[Sequence[int]] = None,
) -> None:
    """Render one line/scatter chart of the table columns as standalone SVG.

    Columns named in ``spec.y`` are drawn against ``spec.x``; ``groups``
    optionally splits rows into separate series (one polyline per group
    and y column).  Log axes drop nonpositive points.
    """
    if not rows:
        raise ValueError("refusing to plot an empty table")
    cols = {name: i for i, name in enumerate(header)}
    if spec.x not in cols:
        raise ValueError(f"x column {spec.x!r} not in header")
    for y in spec.y:
        if y not in cols:
            raise ValueError(f"y column {y!r} not in header")
    group_ids = list(groups) if groups is not None else [0] * len(rows)
    series: list[tuple[str, list[tuple[float, float]]]] = []
    for gi, gid in enumerate(sorted(set(group_ids))):
        chosen = [row for row, g in zip(rows, group_ids) if g == gid]
        for y in spec.y:
            pts = []
            for row in chosen:
                xv, yv = row[cols[spec.x]], row[cols[y]]
                if math.isnan(xv) or math.isnan(yv):
                    continue
                if spec.logx and xv <= 0 or spec.logy and yv <= 0:
                    continue
                pts.append(
                    (
                        math.log10(xv) if spec.logx else xv,
                        math.log10(yv) if spec.logy else yv,
                    )
                )
            if pts:
                label = y if groups is None else f"{y}[{gid}]"
                if series_labels is not None and len(series) < len(series_labels):
                    label = series_labels[len(series)]
                series.append((label, sorted(pts)))
    if not series:
        raise ValueError("nothing to plot after filtering")
    xs = [p[0] for _, pts in series for p in pts]
    ys = [p[1] for _, pts in series for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi += 1.0
    if y_hi == y_lo:
        y_hi += 1.0
    w, h = float(spec.width), float(spec.height)

    def px(x: float) -> float:
        return _MARGIN + (x - x_lo) / (x_hi - x_lo) * (w - 2 * _MARGIN)

    def py(y: float) -> float:
        return h - _MARGIN - (y - y_lo) / (y_hi - y_lo) * (h - 2 * _MARGIN)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect x="0" y="0" width="{spec.width}" height="{spec.height}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{h - _MARGIN}" x2="{w - _MARGIN}" '
        f'y2="{h - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{h - _MARGIN}" stroke="black"/>',
    ]
    for tick in _axis_ticks(x_lo, x_hi, spec.logx):
        if not x_lo <= tick <= x_hi:
            continue
        x = px(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{h - _MARGIN}" x2="{x:.2f}" '
            f'y2="{h - _MARGIN + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{h - _MARGIN + 18}" font-size="11" '
            f'text-anchor="middle">{escape(_tick_label(tick, spec.logx))}</text>'
        )
    for tick in _axis_ticks(y_lo, y_hi, spec.logy):
        if not y_lo <= tick <= y_hi:
            continue
        y = py(tick)
        parts.append(
            f'<line x1="{_MARGIN - 5}" y1="{y:.2f}" x2="{_MARGIN}" '
            f'y2="{y:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_MARGIN - 8}" y="{y + 4:.2f}" font-size="11" '
            f'text-anchor="end">{escape(_tick_label(tick, spec.logy))}</text>'
        )
    for si, (label, pts) in enumerate(series):
        color = _SERIES_COLORS[si % len(_SERIES_COLORS)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        if len(pts) > 1:
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                'stroke-width="1.5"/>'
            )
        for x, y in pts:
            parts.append(
                f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{w - _MARGIN + 4:.2f}" y="{_MARGIN + 14 * si:.2f}" '
            f'font-size="11" fill="{color}">{escape(label)}</text>'
        )
    if spec.title:
        parts.append(
            f'<text x="{w / 2:.2f}" y="20" font-size="13" '
            f'text-anchor="middle">{escape(spec.title)}</text>'
        )
    xlabel = f"log10 {spec.x}" if spec.logx else spec.x
    parts.append(
        f'<text x="{w / 2:.2f}" y="{h - 12:.2f}" font-size="12" '
        f'text-anchor="middle">{escape(xlabel)}</text>'
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def emit_sweep_svg(rows: Sequence[CellResult], path: str) -> None:
    """Mean and median run time against ell, one series group per n, log-log."""
    header = CSV_HEADER.split(",")
    table = []
    groups = []
    for row in rows:
        s = row.stats
        table.append(
            [
                float(row.n),
                float(row.r),
                float(row.ell),
                float(s.runs),
                s.mean,
                s.median,
                s.p25,
                s.p75,
                s.stderr,
                float(s.censored),
            ]
        )
        groups.append(row.n)
    multi = len(set(groups)) > 1
    spec = PlotSpec(
        x="ell",
        y=("mean", "median"),
        logx=True,
        logy=True,
        title="run time vs flip count",
    )
    emit_svg(header, table, spec, path, groups=groups if multi else None)


def load_config(path: str) -> dict[str, str]:
    """Read a flat key=value config file; section names are cosmetic."""
    if not os.path.exists(path):
        raise ValueError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)
    merged: dict[str, str] = {}
    for section in parser.sections():
        merged.update(dict(parser.items(section)))
    return merged
