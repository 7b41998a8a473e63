"""Per-entry access time of composed evaluation testers as the size grows.

    python3 scripts/locality_sweep.py --q 1009 --sizes 20x50,100x100,1000x1000
"""
import argparse
import random
import time
from dataclasses import dataclass, field

from densetest.constructions import evaluation_tester
from densetest.gf import canonical_field, extension_field
from densetest.tester import compose


@dataclass
class SweepConfig:
    q: int = 1009
    shapes: list = field(default_factory=lambda: [(20, 50), (100, 100), (1000, 1000)])
    reps: int = 2000
    seed: int = 5


def per_entry(L, reps, seed):
    rng = random.Random(seed)
    idx = [rng.randrange(L.size) for _ in range(reps)]
    xs = [rng.randrange(L.source.order) for _ in range(reps)]
    start = time.perf_counter()
    for i, x in zip(idx, xs):
        L.map_at(i)[0].apply(x)
    return (time.perf_counter() - start) / reps


def run(cfg: SweepConfig):
    F = canonical_field(cfg.q)
    F2 = extension_field(F, 2)
    print("r_inner,r_outer,size,build_s,entry_us")
    for r_in, r_out in cfg.shapes:
        s = time.perf_counter()
        L = compose(evaluation_tester(F2, 2, 1, r_in), evaluation_tester(F, 2, 1, r_out))
        built = time.perf_counter() - s
        per_entry(L, 100, cfg.seed)
        print(f"{r_in},{r_out},{L.size},{built:.3f},{per_entry(L, cfg.reps, cfg.seed) * 1e6:.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=SweepConfig.q)
    ap.add_argument("--sizes", default=None, help="comma list of RINxROUT")
    ap.add_argument("--reps", type=int, default=SweepConfig.reps)
    a = ap.parse_args()
    cfg = SweepConfig(q=a.q, reps=a.reps)
    if a.sizes:
        cfg.shapes = [tuple(int(x) for x in s.split("x")) for s in a.sizes.split(",")]
    run(cfg)


if __name__ == "__main__":
    main()
