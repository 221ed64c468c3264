# Joint search for the shared criterion 6/7 campaign config.
import statistics
import time
from dataclasses import replace

import parrot_net as pn
from parrot_net import Scenario, Vec3


def mci(vals):
    m = statistics.mean(vals)
    s = statistics.stdev(vals) if len(vals) > 1 else 0
    return m, 1.96 * s / len(vals) ** 0.5, s


if __name__ == "__main__":
    t0 = time.time()
    n = 12
    for box in (375.0, 400.0):
        for kmh in (90, 110, 130):
            base = Scenario(
                nodes=10, box=Vec3(box, box, box / 2), speed=kmh / 3.6,
                duration=150.0, warmup=30.0, cbr_rate=224000,
            )
            tag = f"m{box:.0f}v{kmh}"
            arms = {
                "t2.5": base,
                "t0.0": replace(
                    base,
                    mobility=replace(base.mobility, tau=0.0),
                    routing=replace(base.routing, tau=0.0),
                ),
                "greed": replace(base, protocol="greedy"),
            }
            out = {}
            for name, sc in arms.items():
                ms = [pn.run(replace(sc, seed=pn.stable_seed(tag, r))) for r in range(n)]
                m, ci, s = mci([x.pdr for x in ms])
                bm = statistics.mean(x.optimal_bound for x in ms)
                bs = statistics.stdev(x.optimal_bound for x in ms)
                out[name] = (m, ci, s)
                print(f"box={box:.0f} v={kmh} {name}: pdr={m:.3f}±{ci:.3f} (s={s:.3f}) "
                      f"bound={bm:.3f}(s={bs:.3f})", flush=True)
            gap = out["t2.5"][0] - out["t0.0"][0]
            # Predicted CI separation margin at 25 runs.
            ci25 = 1.96 * (out["t2.5"][2] + out["t0.0"][2]) / 5.0
            margin7 = out["t2.5"][0] - out["greed"][0]
            print(f"  -> tau gap {gap:+.3f}, ci25 sum {ci25:.3f}, "
                  f"sep {gap - ci25:+.3f}, greedy margin {margin7:+.3f}", flush=True)
    print("elapsed", round(time.time() - t0, 1), flush=True)
