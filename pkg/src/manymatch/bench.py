"""Benchmark harness: approximation ratios against the exact oracle and scaling runs.

A suite is a dict::

    {"eps": 0.5, "p": 2, "mode": "certified", "cap": 22,
     "cases": [{"n": 20, "d": 2, "colors": 3, "distribution": "uniform", "seed": 1}, ...]}

Cases may override ``eps``, ``p`` and ``mode``. The exact cost is computed
only for cases with ``n <= cap``.
"""

from __future__ import annotations

import time

from .driver import SolveConfig, solve
from .exact_oracle import DEFAULT_CAP, exact_mmm
from .instances import InstanceSpec, gen_instance

SCALING_SIZES = (10_000, 20_000, 40_000, 80_000)


def ratio_suite(count: int = 200, seed: int = 0, n_max: int = 22) -> dict:
    """Small cases cycling through dimensions, color counts, norms and eps values."""
    cases = []
    for i in range(count):
        cases.append({
            "n": 4 + (i * 7 + seed) % (n_max - 3),
            "d": 1 + i % 2,
            "colors": 2 + (i // 2) % 3,
            "p": (1.0, 2.0)[(i // 6) % 2],
            "eps": (0.5, 1.0)[(i // 12) % 2],
            "distribution": "uniform",
            "seed": seed * 100_003 + i,
        })
    return {"mode": "certified", "cap": n_max, "cases": cases}


def scaling_suite(sizes=SCALING_SIZES, seed: int = 0, colors: int = 3) -> dict:
    cases = [{"n": n, "d": 2, "colors": colors, "distribution": "uniform", "seed": seed} for n in sizes]
    return {"eps": 0.5, "mode": "fast", "cap": 0, "cases": cases}


def run_case(case: dict, suite: dict) -> dict:
    eps = float(case.get("eps", suite.get("eps", 0.5)))
    p = float(case.get("p", suite.get("p", 2.0)))
    mode = case.get("mode", suite.get("mode", "certified"))
    cap = int(suite.get("cap", DEFAULT_CAP))
    spec = InstanceSpec(int(case["n"]), int(case.get("d", 2)), int(case.get("colors", 2)),
                        case.get("distribution", "uniform"), int(case.get("seed", 0)))
    S = gen_instance(spec)
    cfg = SolveConfig(eps=eps, p=p, mode=mode, seed=int(case.get("seed", 0)))
    sol = solve(S, cfg)
    exact_cost, exact_time = None, None
    if S.n <= cap:
        t = time.perf_counter()
        exact_cost = exact_mmm(S, cfg.metric, cap=cap).cost
        exact_time = time.perf_counter() - t
    if exact_cost is None:
        ratio = None
    elif exact_cost > 0:
        ratio = sol.cost / exact_cost
    else:
        ratio = 1.0 if sol.cost == 0 else float("inf")
    elapsed = dict(sol.stats["elapsed"])
    if exact_time is not None:
        elapsed["exact"] = exact_time
    return {
        "n": S.n, "d": S.dim, "colors": spec.colors, "p": p, "eps": eps, "mode": mode,
        "seed": spec.seed, "distribution": spec.distribution,
        "approxCost": sol.cost, "exactCost": exact_cost, "ratio": ratio,
        "covered": sol.covered, "elapsed": elapsed,
    }


def _aggregate(rows: list[dict]) -> dict:
    ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
    if not rows:
        return {}
    agg = {"instances": len(rows), "compared": len(ratios)}
    if ratios:
        agg["maxRatio"] = max(ratios)
        agg["meanRatio"] = sum(ratios) / len(ratios)
        agg["withinBound"] = all(r["ratio"] <= 1 + r["eps"] + 1e-9 for r in rows if r["ratio"] is not None)
    return agg


def _scaling(rows: list[dict]) -> list[dict]:
    by_n: dict[int, list[float]] = {}
    for r in rows:
        by_n.setdefault(r["n"], []).append(r["elapsed"]["total"])
    table, prev = [], None
    for n in sorted(by_n):
        t = sum(by_n[n]) / len(by_n[n])
        table.append({"n": n, "seconds": t, "growth": None if prev is None else t / prev})
        prev = t
    return table


def bench(suite: dict, progress=None) -> dict:
    rows = []
    for case in suite.get("cases", []):
        rows.append(run_case(case, suite))
        if progress is not None:
            progress(rows[-1])
    if not rows:
        return {"rows": [], "aggregate": {}, "scaling": []}
    return {"rows": rows, "aggregate": _aggregate(rows), "scaling": _scaling(rows)}
