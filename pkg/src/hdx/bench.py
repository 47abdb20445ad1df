"""Space/time benchmark sweep over the truncation threshold and budget.

One row per ``(k, sigma)`` configuration on a fixed text: serialised section
sizes, build time, query latency, and the structural counters (leaf-list
length, visited nodes, output size) that the theory bounds.  Rows are
written as CSV; :func:`render_figures` plots the size, latency, and leaf
trends alongside.

With fixed seeds everything except the timing columns is deterministic.
"""

from __future__ import annotations

import csv
import random
import statistics
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

from .engine import build_index
from .storage import index_bytes
from .text import as_symbols

DEFAULT_SIGMAS = (1, 2, 4, 8, 16, 32, 64)


@dataclass
class BenchRow:
    """Measurements for one ``(k, sigma)`` configuration."""

    n: int
    k: int
    sigma: int
    queries: int
    index_bytes: int
    tree_bytes: int
    inversion_bytes: int
    max_lambda_leaves: int
    lambda_count: int
    build_seconds: float
    mean_query_us: float
    median_query_us: float
    mean_leaf_list: float
    mean_visited: float
    mean_routed: float
    mean_output: float


def generate_queries(text, count: int, k: int, seed: int = 0) -> list[tuple[int, ...]]:
    """Deterministic query workload: mutated substrings plus random noise."""
    symbols = as_symbols(text)
    alphabet = sorted(set(symbols))
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        m = rng.randint(2, min(24, len(symbols)))
        if rng.random() < 0.8:
            start = rng.randrange(len(symbols) - m + 1)
            q = list(symbols[start : start + m])
            for _ in range(rng.randint(0, k)):
                q[rng.randrange(m)] = rng.choice(alphabet)
        else:
            q = [rng.choice(alphabet) for _ in range(m)]
        out.append(tuple(q))
    return out


def run_bench(
    text,
    ks: Sequence[int] = (2,),
    sigmas: Sequence[int] = DEFAULT_SIGMAS,
    queries: int = 50,
    seed: int = 0,
    mode: str = "linear",
    tau: int = 8,
) -> list[BenchRow]:
    """Sweep ``ks`` × ``sigmas`` on one text; one row per configuration."""
    symbols = as_symbols(text)
    rows = []
    for k in ks:
        workload = generate_queries(symbols, queries, k, seed=seed)
        for sigma in sigmas:
            t0 = time.perf_counter()
            idx = build_index(symbols, k, sigma=sigma, mode=mode, tau=tau, seed=seed)
            build_seconds = time.perf_counter() - t0
            _, sizes = index_bytes(idx)

            micros, lsizes, visited, routed, outputs = [], [], [], [], []
            for i, q in enumerate(workload):
                r = i % (k + 1)
                t1 = time.perf_counter()
                hits, st = idx.query_with_stats(q, r)
                micros.append((time.perf_counter() - t1) * 1e6)
                lsizes.append(st.leaf_list)
                visited.append(st.routed + st.zero_cases + st.dfs)
                routed.append(st.routed)
                outputs.append(len(hits))

            rep = idx.report
            rows.append(
                BenchRow(
                    n=idx.n,
                    k=k,
                    sigma=sigma,
                    queries=len(workload),
                    index_bytes=sizes["total"],
                    tree_bytes=sizes["tree"],
                    inversion_bytes=sizes["inversions"],
                    max_lambda_leaves=max(rep.lambda_leaves.values(), default=0),
                    lambda_count=len(rep.lambda_leaves),
                    build_seconds=build_seconds,
                    mean_query_us=statistics.fmean(micros),
                    median_query_us=statistics.median(micros),
                    mean_leaf_list=statistics.fmean(lsizes),
                    mean_visited=statistics.fmean(visited),
                    mean_routed=statistics.fmean(routed),
                    mean_output=statistics.fmean(outputs),
                )
            )
    return rows


def write_csv(rows: Sequence[BenchRow], path) -> None:
    names = [f.name for f in fields(BenchRow)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in rows:
            writer.writerow([getattr(row, name) for name in names])


def render_figures(rows: Sequence[BenchRow], directory) -> list[Path]:
    """Plot size, latency, and leaf-count trends against sigma; returns paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    by_k: dict[int, list[BenchRow]] = {}
    for row in rows:
        by_k.setdefault(row.k, []).append(row)
    for group in by_k.values():
        group.sort(key=lambda row: row.sigma)

    plots = [
        (
            "bench_size.png",
            "bytes",
            "index size vs truncation threshold",
            [("tree+labels", "tree_bytes"), ("total file", "index_bytes")],
        ),
        (
            "bench_query_time.png",
            "microseconds",
            "query latency vs truncation threshold",
            [("mean", "mean_query_us"), ("median", "median_query_us")],
        ),
        (
            "bench_leaves.png",
            "leaves",
            "largest per-path leaf count vs truncation threshold",
            [("max per-path leaves", "max_lambda_leaves")],
        ),
    ]
    written = []
    for filename, ylabel, title, series in plots:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for k, group in sorted(by_k.items()):
            xs = [row.sigma for row in group]
            for label, attr in series:
                ax.plot(
                    xs,
                    [getattr(row, attr) for row in group],
                    marker="o",
                    label=f"k={k} {label}",
                )
        ax.set_xscale("log", base=2)
        ax.set_xlabel("sigma")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        out = directory / filename
        fig.savefig(out, dpi=120)
        plt.close(fig)
        written.append(out)
    return written
