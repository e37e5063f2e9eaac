"""Two degree-one vortices in the disk under a perturbed degree-two boundary datum:
locate the critical point of W, certify degrees, and follow the stationary points for p -> 2."""
import argparse

import numpy as np

from vortexlab.geometry import BoundaryDatum, ComponentPhase, Domain
from vortexlab.stationary import MeshParams, Setup, continuation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitude", type=float, default=0.3, help="coefficient of -sin(2 theta) in the phase")
    ap.add_argument("--start", type=float, default=0.5)
    ap.add_argument("--trust", type=float, default=0.05)
    ap.add_argument("--p", type=float, nargs="+", default=[1.9, 1.95, 1.975])
    args = ap.parse_args()
    datum = BoundaryDatum((ComponentPhase(2, sin=(0.0, -args.amplitude)),))
    x0 = [(args.start, 0.0), (-args.start, 0.0)]
    setup = Setup(Domain.disk(), datum, [1, 1], x0, MeshParams(0.05, 0.005))
    res = continuation(setup, args.p, x0, args.trust)
    print(f"status: {res.status}")
    for m in res.messages:
        print(f"  {m}")
    if res.x_star is not None:
        print("x* =", np.array2string(res.x_star.ravel(), precision=5))
    for cert in (res.certificate_W, res.certificate_c):
        if cert is not None:
            print(cert)
    for p, x, cn, ev, d in zip(res.p_schedule, res.xs, res.c_norms, res.evals, res.distances):
        print(f"p = {p:<6g} |c| = {cn:.2e}  evals = {ev}  |x - x*| = {d:.3e}  x = {np.round(x.ravel(), 5)}")


if __name__ == "__main__":
    main()
