"""Table of c_q and of the small-q pipeline constants for a few d."""
import argparse

from densetest import bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qs", default="2,3,4,5,7")
    ap.add_argument("--ds", default="2,3,10,100")
    a = ap.parse_args()
    qs = [int(x) for x in a.qs.split(",")]
    print("q  c_q")
    for q in qs:
        print(f"{q:<3}{float(bounds.cq_constant(q).value):.9f}")
    print()
    print("q  d    r  c_{q,eps}     pi_{q,eps}    declared eps")
    for q in qs:
        for d in (int(x) for x in a.ds.split(",")):
            if q >= d + 1:
                continue
            c = bounds.c_pi_of_eps_vector(q, d, bounds.preset_eps_vector(q, d))
            print(f"{q:<3}{d:<5}{c.r:<3}{float(c.c):<14.9f}{float(c.pi):<14.9f}{float(c.epsilon):.9f}")


if __name__ == "__main__":
    main()
