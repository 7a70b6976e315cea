#!/usr/bin/env python3
"""Regenerate the bundled synthetic daily-incidence series.

Each series comes from the normalized feedback model

    I' = (S~ b - gamma) I
    b' = -alpha (b - K / (1 + u I))
    y  = S~ b I        (daily new cases, S~ = rescaled population)

integrated with classic RK4 at dt = 0.25 day and sampled at integer
days. The clean curve is then degraded into reported case counts:

    cases[d] = round(y(d) * exp(sigma z_d) * w[weekday(d)]),  z_d ~ N(0,1)

with sigma = 0.05 and a weekday reporting pattern w normalized to
geometric mean 1 (weekend under-reporting, midweek catch-up). The RNG
is Python's Mersenne Twister with a fixed per-series seed, so rerunning
this script reproduces the files byte for byte.

Ground truth for every series is written to regions.json; fitting these
files therefore has a known answer, unlike real surveillance data.
"""

import csv
import datetime
import json
import math
import os
import random

# name, S~, gamma, alpha, K, u, I0, b0, start date, days, seed
REGIONS = [
    ("ny",      19.45, 0.0710, 0.0575, 0.0104, 0.8e-4, 400.0, 0.0104, "2020-03-01", 320, 11),
    ("nj",       8.88, 0.0710, 0.0453, 0.0154, 1.4e-4, 250.0, 0.0154, "2020-03-05", 320, 12),
    ("germany", 83.20, 0.1073, 0.0613, 0.0061, 3.4e-4, 600.0, 0.0061, "2020-02-24", 320, 13),
]

SIGMA = 0.05
# Mon..Sun multiplicative reporting factors, normalized below.
WEEKDAY_RAW = [1.05, 1.09, 1.06, 1.01, 0.97, 0.88, 0.85]


def weekday_factors():
    g = math.exp(sum(math.log(w) for w in WEEKDAY_RAW) / 7.0)
    return [w / g for w in WEEKDAY_RAW]


def clean_curve(s_tilde, gamma, alpha, K, u, I0, b0, days, dt=0.25):
    def rhs(I, b):
        return ((s_tilde * b - gamma) * I,
                -alpha * (b - K / (1.0 + u * I)))

    I, b = I0, b0
    out = [s_tilde * b * I]
    steps_per_day = int(round(1.0 / dt))
    for _ in range(days):
        for _ in range(steps_per_day):
            k1 = rhs(I, b)
            k2 = rhs(I + 0.5 * dt * k1[0], b + 0.5 * dt * k1[1])
            k3 = rhs(I + 0.5 * dt * k2[0], b + 0.5 * dt * k2[1])
            k4 = rhs(I + dt * k3[0], b + dt * k3[1])
            I += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            b += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        out.append(s_tilde * b * I)
    return out


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    wf = weekday_factors()
    manifest = {}
    for name, s_tilde, gamma, alpha, K, u, I0, b0, start, days, seed in REGIONS:
        y = clean_curve(s_tilde, gamma, alpha, K, u, I0, b0, days)
        rng = random.Random(seed)
        d0 = datetime.date.fromisoformat(start)
        path = os.path.join(here, name + ".csv")
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["date", "cases"])
            for d in range(days + 1):
                date = d0 + datetime.timedelta(days=d)
                noisy = y[d] * math.exp(SIGMA * rng.gauss(0.0, 1.0)) * wf[date.weekday()]
                w.writerow([date.isoformat(), max(0, int(round(noisy)))])
        manifest[name] = {
            "population_rescaled": s_tilde,
            "start_date": start,
            "days": days,
            "noise_sigma": SIGMA,
            "seed": seed,
            "truth": {"gamma": gamma, "alpha": alpha, "K": K, "u": u,
                      "I0": I0, "beta0": b0},
        }
        print(f"{name}: peak {max(y):.0f}/day, final {y[-1]:.0f}/day")
    with open(os.path.join(here, "regions.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
