#!/usr/bin/env python3
"""Benchmark harness: simultaneous vs screened-simultaneous selection.

Screening first drops clearly unpromising columns on a held-out slice,
then mirrors only the survivors.  On designs where many coefficients
are weak this concentrates the network's capacity and usually buys
power at the same FDR target.
"""

import mirrorselect.simulate as ms
from mirrorselect.neuralnet import NetConfig
from mirrorselect.rng import RngSeed
from mirrorselect.selection import ScreenOptions


def main():
    design = ms.DesignSpec(300, 50, "toeplitz_pc", rho=0.5)
    model = ms.ModelSpec(kind="linear", k_signals=10)
    net = NetConfig(hidden_sizes=(32, 16), epochs=300, learning_rate=5e-3)

    print(f"n={design.n} p={design.p} toeplitz rho={design.rho}, "
          f"k={model.k_signals}, q=0.2, 10 reps\n")
    print("method    mean fdp        mean power      mean selected")
    for method, opts in [("sngm", None),
                         ("s_sngm", ScreenOptions(m_keep=25))]:
        out = ms.run_benchmark(design, model, method=method, q=0.2,
                               reps=10, rng=RngSeed(5), net=net,
                               screen_opts=opts)
        sel = sum(r.n_selected for r in out.rows) / len(out.rows)
        print(f"{method:8s}  {out.mean_fdp:.3f} +- {out.se_fdp:.3f}  "
              f"{out.mean_power:.3f} +- {out.se_power:.3f}  {sel:6.1f}")

    print("\nper-rep records for the screened run:")
    out = ms.run_benchmark(design, model, method="s_sngm", q=0.2, reps=5,
                           rng=RngSeed(5), net=net,
                           screen_opts=ScreenOptions(m_keep=25))
    for r in out.rows:
        print(f"  rep {r.rep}: fdp={r.fdp:.2f} power={r.power:.2f} "
              f"selected={r.n_selected:2d} threshold={r.threshold:.3f}")


if __name__ == "__main__":
    main()
