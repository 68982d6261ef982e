#!/usr/bin/env python3
"""Regenerate the bundled offline snapshots (src/qregress/fixtures/*.csv).

The original live data source is long gone, so the bundled files are
synthetic but structurally faithful: daily cumulative counters from
2020-01-30 through 2020-07-01 (154 days), logistic growth that levels off
well before the tail, deaths tightly coupled to confirmed counts, and small
multiplicative day-to-day reporting jitter (which occasionally produces
negative daily differences, as real corrections do).

Deterministic: fixed per-country seeds, integer outputs.  Run from the repo
root:

    python3 scripts/make_fixtures.py
"""

import csv
from datetime import date, timedelta
from pathlib import Path

import numpy as np

START = date(2020, 1, 30)
END = date(2020, 7, 1)
N_DAYS = (END - START).days + 1  # 154

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "src" / "qregress" / "fixtures"

COUNTRIES = {
    "india": dict(
        seed=1351,
        plateau=180_000.0,     # confirmed ceiling
        midpoint=57.0,         # logistic midpoint (day index)
        steepness=0.16,
        cfr=0.028,             # deaths as a fraction of confirmed
        recovered_cap=0.90,    # eventual recovered fraction of confirmed
        recovered_midpoint=74.0,
        recovered_steepness=0.096,
        confirmed_jitter=0.004,
        deaths_jitter=0.002,
        # June 2020 reconciliations: death counts get much noisier late on.
        late_deaths_jitter=0.08,
        late_from="2020-06-01",
        recovered_jitter=0.004,
    ),
    "usa": dict(
        seed=7789,
        plateau=2_600_000.0,
        midpoint=55.0,
        steepness=0.13,
        cfr=0.049,
        recovered_cap=0.45,
        recovered_midpoint=75.0,
        recovered_steepness=0.07,
        confirmed_jitter=0.007,
        deaths_jitter=0.005,
        recovered_jitter=0.006,
    ),
}


def logistic(t, plateau, midpoint, steepness):
    return plateau / (1.0 + np.exp(-steepness * (t - midpoint)))


def build_country(params):
    rng = np.random.default_rng(params["seed"])
    t = np.arange(N_DAYS, dtype=float)

    base = logistic(t, params["plateau"], params["midpoint"], params["steepness"])
    confirmed = base * (1.0 + params["confirmed_jitter"] * rng.standard_normal(N_DAYS))
    # Deaths ride on the *jittered* confirmed counts so the shared reporting
    # shocks stay visible to a model that reads confirmed as a feature.
    # Death-count reporting got markedly noisier late in the window (mass
    # reconciliations of earlier under-counts, as happened in June 2020), so
    # the jitter is allowed to step up from a given date onward.
    sigma_d = np.full(N_DAYS, params["deaths_jitter"])
    if "late_deaths_jitter" in params:
        late_from = (date.fromisoformat(params["late_from"]) - START).days
        sigma_d[late_from:] = params["late_deaths_jitter"]
    deaths = params["cfr"] * confirmed * (
        1.0 + sigma_d * rng.standard_normal(N_DAYS)
    )
    recovered_frac = logistic(
        t, params["recovered_cap"], params["recovered_midpoint"], params["recovered_steepness"]
    )
    recovered = recovered_frac * confirmed * (
        1.0 + params["recovered_jitter"] * rng.standard_normal(N_DAYS)
    )

    confirmed = np.maximum(np.rint(confirmed), 1).astype(int)
    deaths = np.maximum(np.rint(deaths), 0).astype(int)
    recovered = np.maximum(np.rint(recovered), 0).astype(int)
    # Keep the counters consistent (deaths + recovered <= confirmed).
    recovered = np.minimum(recovered, confirmed - deaths)
    return confirmed, deaths, recovered


def main():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    for name, params in COUNTRIES.items():
        confirmed, deaths, recovered = build_country(params)
        path = FIXTURE_DIR / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["date", "confirmed", "deaths", "recovered"])
            for i in range(N_DAYS):
                day = START + timedelta(days=i)
                writer.writerow([day.isoformat(), confirmed[i], deaths[i], recovered[i]])
        print(f"wrote {path} ({N_DAYS} days, final confirmed {confirmed[-1]})")


if __name__ == "__main__":
    main()
