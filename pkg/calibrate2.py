# Longer-run calibration for the tau-benefit and protocol-ordering campaigns.
import statistics
import time
from dataclasses import replace

import parrot_net as pn
from parrot_net import Scenario, Vec3


def mci(vals):
    m = statistics.mean(vals)
    s = statistics.stdev(vals) if len(vals) > 1 else 0
    return m, 1.96 * s / len(vals) ** 0.5


def report(label, ms):
    m, ci = mci([x.pdr for x in ms])
    print(f"{label}: pdr={m:.3f}±{ci:.3f}", flush=True)


if __name__ == "__main__":
    t0 = time.time()
    n = 12
    for kmh in (50, 70):
        base = Scenario(
            nodes=10, box=Vec3(425, 425, 212.5), speed=kmh / 3.6,
            duration=250.0, warmup=30.0, cbr_rate=112000,
        )
        tag = f"L{kmh}"
        arms = {
            "parrot t2.5": base,
            "parrot t0.0": replace(
                base,
                mobility=replace(base.mobility, tau=0.0),
                routing=replace(base.routing, tau=0.0),
            ),
            "greedy": replace(base, protocol="greedy"),
        }
        for name, sc in arms.items():
            ms = [pn.run(replace(sc, seed=pn.stable_seed(tag, r))) for r in range(n)]
            report(f"v={kmh} {name}", ms)
    print("elapsed", round(time.time() - t0, 1), flush=True)
