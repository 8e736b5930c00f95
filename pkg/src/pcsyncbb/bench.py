"""Benchmark sweeps: run solvers over generated instances, average, chart.

Rows are averaged over repetitions.  Repetition ``r`` of a sweep point uses
seed ``base_seed + r`` for both the instance and the protocol, so the CSV is
reproducible bit for bit.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from pcsyncbb.baseline import brute_force, plaintext_syncbb
from pcsyncbb.engine import CutoffExceeded, RunConfig, run
from pcsyncbb.generators import generate
from pcsyncbb.simnet import REFERENCE_COMPARE_MS, CostModel, simulated_time

CSV_FIELDS = [
    "family", "n", "p1", "domain", "algo", "backend", "seed",
    "cost", "comparisons", "messages", "bytes", "paillier_ops", "sim_time_ms",
]
ALGOS = ("brute", "syncbb", "pc-syncbb")


def parse_range(text: str, cast=float) -> list:
    """``"a"``, ``"a,b,c"`` or an inclusive ``"start:stop:step"`` range."""
    text = text.strip()
    if "," in text:
        values = [cast(x) for x in text.split(",") if x.strip()]
    elif ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"empty or descending range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [cast(round(start + i * step, 10)) for i in range(count)]
    else:
        values = [cast(text)]
    if not values:
        raise ValueError(f"empty range {text!r}")
    return values


def interpolated_compare_ms(n: int) -> tuple[float, float]:
    """Per-comparison (offline, online) ms, linear between measured sizes."""
    known = sorted(REFERENCE_COMPARE_MS)
    if n in REFERENCE_COMPARE_MS:
        return REFERENCE_COMPARE_MS[n]
    lo = max([m for m in known if m < n], default=known[0])
    hi = min([m for m in known if m > n], default=known[-1])
    if lo == hi:
        lo, hi = (known[0], known[1]) if n < known[0] else (known[-2], known[-1])
    f = (n - lo) / (hi - lo)
    a, b = REFERENCE_COMPARE_MS[lo], REFERENCE_COMPARE_MS[hi]
    return tuple(max(0.0, a[i] + f * (b[i] - a[i])) for i in range(2))


def default_cost_model(n: int) -> CostModel:
    """LAN-like defaults: 10 us per message, 1 Gbit/s, 1 ms per Paillier op."""
    offline, online = interpolated_compare_ms(n)
    return CostModel(
        message_latency_ms=0.01,
        byte_latency_ms=8e-6,
        paillier_op_ms=1.0,
        compare_offline_ms=offline,
        compare_online_ms=online,
    )


@dataclass
class BenchConfig:
    family: str = "random"
    n: Sequence[int] = (7,)
    p1: Sequence[float] = (0.5,)
    domain: Sequence[int] = (3,)
    q: int = 100
    reps: int = 5
    seed: int = 0
    algos: Sequence[str] = ALGOS
    backend: str = "ideal"
    keybits: int = 2048
    cutoff_secs: float | None = None
    cost_model: CostModel | None = None
    jobs: int = 1
    attach: int = 2

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("repetitions must be at least 1")
        for name in ("n", "p1", "domain", "algos"):
            if not list(getattr(self, name)):
                raise ValueError(f"empty {name} range")
        for a in self.algos:
            if a not in ALGOS:
                raise ValueError(f"unknown algorithm {a!r}")

    def points(self):
        return list(itertools.product(self.n, self.p1, self.domain, self.algos))


@dataclass
class BenchRow:
    family: str
    n: int
    p1: float
    domain: int
    algo: str
    backend: str
    seed: int
    values: dict[str, float] = field(default_factory=dict)
    completed: int = 0
    cutoffs: int = 0

    def as_dict(self) -> dict[str, object]:
        d = {
            "family": self.family, "n": self.n, "p1": f"{self.p1:g}",
            "domain": self.domain, "algo": self.algo, "backend": self.backend,
            "seed": self.seed,
        }
        for k in CSV_FIELDS[7:]:
            v = self.values.get(k, float("nan"))
            d[k] = f"{v:.6g}"
        return d


def measure_once(cfg: BenchConfig, n: int, p1: float, domain: int, algo: str, seed: int):
    """Metrics dict for one (instance, algorithm) run, or ``None`` on cutoff."""
    inst = generate(cfg.family, n=n, p1=p1, domain=domain, q=cfg.q, seed=seed, attach=cfg.attach)
    model = cfg.cost_model or default_cost_model(n)
    if algo == "brute":
        res = brute_force(inst)
        return {"cost": res.cost, "comparisons": 0, "messages": 0, "bytes": 0,
                "paillier_ops": 0, "sim_time_ms": 0.0}
    if algo == "syncbb":
        res = plaintext_syncbb(inst)
        st = res.stats
        # plaintext messages carry no payload beyond the CPA itself; bounds
        # are compared locally, so only message latency applies
        return {"cost": res.cost, "comparisons": st.comparisons, "messages": st.messages,
                "bytes": 0, "paillier_ops": 0,
                "sim_time_ms": st.messages * model.message_latency_ms}
    config = RunConfig(backend=cfg.backend, keybits=cfg.keybits, seed=seed,
                       cutoff_secs=cfg.cutoff_secs, keep_payloads=False)
    try:
        out = run(inst, config)
    except CutoffExceeded:
        return None
    m = out.metrics
    return {"cost": out.result.cost, "comparisons": m.comparisons, "messages": m.messages,
            "bytes": m.bytes, "paillier_ops": m.paillier_ops,
            "sim_time_ms": simulated_time(out.trace, m, model)}


def _measure_point(args):
    cfg, (n, p1, domain, algo) = args
    row = BenchRow(cfg.family, n, p1, domain, algo,
                   cfg.backend if algo == "pc-syncbb" else "-", cfg.seed)
    sums: dict[str, float] = {}
    for r in range(cfg.reps):
        got = measure_once(cfg, n, p1, domain, algo, cfg.seed + r)
        if got is None:
            row.cutoffs += 1
            continue
        row.completed += 1
        for k, v in got.items():
            sums[k] = sums.get(k, 0.0) + v
    if row.completed:
        row.values = {k: v / row.completed for k, v in sums.items()}
    return row


def run_bench(cfg: BenchConfig) -> list[BenchRow]:
    tasks = [(cfg, pt) for pt in cfg.points()]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            rows = list(pool.map(_measure_point, tasks))
    else:
        rows = [_measure_point(t) for t in tasks]
    for row in rows:
        if row.cutoffs:
            print(f"warning: {row.cutoffs}/{cfg.reps} runs of {row.algo} at n={row.n} "
                  f"p1={row.p1:g} hit the cutoff and were left out of the average",
                  file=sys.stderr)
    return rows


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row.as_dict())
    return buf.getvalue()


def sweep_axis(cfg: BenchConfig) -> str:
    for name in ("p1", "n", "domain"):
        if len(list(getattr(cfg, name))) > 1:
            return name
    return "n"


# ---------------------------------------------------------------- SVG chart

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def svg_chart(rows: Sequence[BenchRow], x_axis: str, metric: str = "sim_time_ms",
              title: str = "", width: int = 640, height: int = 420) -> str:
    """Line chart with a log-scale y axis, one series per algorithm."""
    series: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        y = row.values.get(metric)
        if y is None or not y > 0 or math.isnan(y):
            continue
        series.setdefault(row.algo, []).append((float(getattr(row, x_axis)), y))
    left, right, top, bottom = 70, 130, 40, 50
    pw, ph = width - left - right, height - top - bottom
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>',
    ]
    pts = [p for s in series.values() for p in s]
    if not pts:
        out.append(f'<text x="{width / 2}" y="{height / 2}" text-anchor="middle">no data</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
    xs = sorted({p[0] for p in pts})
    x0, x1 = xs[0], xs[-1]
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1
    lo = math.floor(math.log10(min(p[1] for p in pts)))
    hi = math.ceil(math.log10(max(p[1] for p in pts)))
    if lo == hi:
        hi += 1

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (math.log10(y) - lo) / (hi - lo) * ph

    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for e in range(lo, hi + 1):
        y = py(10.0 ** e)
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">1e{e}</text>')
    for x in xs:
        out.append(f'<text x="{px(x):.1f}" y="{top + ph + 18}" text-anchor="middle">{x:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">{x_axis}</text>')
    out.append(
        f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2})">{_esc(metric)} (log)</text>'
    )
    for i, (algo, s) in enumerate(sorted(series.items())):
        color = _COLORS[i % len(_COLORS)]
        s.sort()
        path = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in s)
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in s:
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="{color}"/>')
        ly = top + 14 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}">{_esc(algo)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_outputs(rows: Sequence[BenchRow], cfg: BenchConfig, out: str | Path) -> list[Path]:
    """Write ``<out>.csv`` plus one log-scale SVG per metric of interest."""
    out = Path(out)
    base = out.with_suffix("") if out.suffix == ".csv" else out
    base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = base.with_suffix(".csv")
    csv_path.write_text(rows_to_csv(rows), encoding="utf-8")
    written.append(csv_path)
    axis = sweep_axis(cfg)
    for metric in ("sim_time_ms", "comparisons"):
        path = base.parent / f"{base.name}_{metric}.svg"
        title = f"{cfg.family}: {metric} vs {axis}"
        path.write_text(svg_chart(rows, axis, metric, title), encoding="utf-8")
        written.append(path)
    return written
