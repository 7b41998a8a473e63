"""Build, plan and verify a small parameter grid; one CSV row per point.

Rows with exact=True are exhaustive verdicts; the rest are sampled within the budget.
"""
import argparse
import csv
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from densetest import bounds
from densetest.constructions import build, plan
from densetest.errors import Unconstructible
from densetest.verify import Grid, is_tester


@dataclass
class GridConfig:
    qs: tuple = (3, 4, 5, 7)
    ds: tuple = (1, 2)
    ts: tuple = (2, 3)
    eps: tuple = (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(17, 18))
    n: int = 1
    budget: int = 10 ** 7


def run(cfg: GridConfig, out=sys.stdout):
    w = csv.writer(out)
    w.writerow(["q", "d", "t", "eps", "route", "size", "lower_bound", "declared", "worst", "exact", "ok", "seconds"])
    for q in cfg.qs:
        for d in cfg.ds:
            for t in cfg.ts:
                for e in cfg.eps:
                    p = plan(q, d, t, e)
                    if not p.constructive:
                        w.writerow([q, d, t, e, f"{p.route}:{p.reason}"] + [""] * 7)
                        continue
                    s = time.perf_counter()
                    try:
                        L, _ = build(q, t, d, e)
                    except Unconstructible as exc:
                        w.writerow([q, d, t, e, f"failed:{exc.reason}"] + [""] * 7)
                        continue
                    rep = is_tester(L, Grid(n=cfg.n, budget=cfg.budget))
                    lb = bounds.size_lower_bound(q, d, t, L.epsilon).value
                    w.writerow([q, d, t, e, p.route, L.size, lb, L.epsilon, rep.worst_failure, rep.exact,
                                rep.verdict and L.size >= lb, f"{time.perf_counter() - s:.2f}"])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--budget", type=int, default=10 ** 7)
    a = ap.parse_args()
    run(GridConfig(n=a.n, budget=a.budget))


if __name__ == "__main__":
    main()
