# Calibration probe: find desk-scale configs for the acceptance campaigns.
import statistics
import sys
import time
from dataclasses import replace

import parrot_net as pn
from parrot_net import Scenario, Vec3


def mci(vals):
    m = statistics.mean(vals)
    s = statistics.stdev(vals) if len(vals) > 1 else 0
    return m, 1.96 * s / len(vals) ** 0.5


def cell(sc, n, tag):
    return [pn.run(replace(sc, seed=pn.stable_seed(tag, r))) for r in range(n)]


def report(label, ms):
    m, ci = mci([x.pdr for x in ms])
    b = statistics.mean(x.optimal_bound for x in ms)
    print(f"{label}: pdr={m:.3f}±{ci:.3f} bound={b:.3f}", flush=True)
    return m, ci


def sweep67():
    n = 12
    for box in (425.0, 500.0):
        for kmh in (50, 70, 90):
            base = Scenario(
                nodes=10, box=Vec3(box, box, box / 2), speed=kmh / 3.6,
                duration=150.0, warmup=30.0, cbr_rate=112000,
            )
            tag = f"c{box:.0f}v{kmh}"
            report(f"box={box:.0f} v={kmh} parrot t2.5", cell(base, n, tag))
            sc0 = replace(
                base,
                mobility=replace(base.mobility, tau=0.0),
                routing=replace(base.routing, tau=0.0),
            )
            report(f"box={box:.0f} v={kmh} parrot t0.0", cell(sc0, n, tag))
            report(f"box={box:.0f} v={kmh} greedy", cell(replace(base, protocol="greedy"), n, tag))


def sweep8():
    n = 12
    base = Scenario(
        nodes=10, box=Vec3(350, 350, 175), speed=90 / 3.6,
        duration=100.0, warmup=20.0, cbr_rate=112000, channel="urban",
    )
    for alpha in (0.05, 0.5, 1.0):
        sc = replace(base, routing=replace(base.routing, alpha=alpha))
        report(f"urban alpha={alpha}", cell(sc, n, "u"))


if __name__ == "__main__":
    t0 = time.time()
    which = sys.argv[1] if len(sys.argv) > 1 else "67"
    if which == "67":
        sweep67()
    else:
        sweep8()
    print("elapsed", round(time.time() - t0, 1), flush=True)
