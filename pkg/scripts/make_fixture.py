#!/usr/bin/env python3
"""Generate the bundled 50-station synthetic fixture under tests/fixtures/.

Deterministic: same seed, same bytes.  Stations are scattered over the
default region boxes with a small synthetic Köppen-Geiger grid; a few
stations are deliberately defective (missing month, short record, constant
series, off-grid location) to exercise the skip and unclassified paths.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

FIRST_YEAR = 1970
LAST_YEAR = 2014
MISSING = "-9999"


def monthly_values(rng, n_years, base, season_amp, peak_month, trend, noise_sd,
                   ar=0.3):
    n = n_years * 12
    t = np.arange(n)
    seasonal = season_amp * np.cos(2 * math.pi * (t % 12 - peak_month) / 12.0)
    drift = trend * t / 12.0
    eps = np.empty(n)
    e = 0.0
    for i in range(n):
        e = ar * e + rng.normal(0.0, noise_sd)
        eps[i] = e
    return base + seasonal + drift + eps


# (station_id, lat, lon, class_code, region_hint, quirk)
# quirk: None | "missing_month" | "short" | "constant" | "ring" | "nogrid"
STATIONS = {
    "temperature": [
        ("T%03d" % i, 40.25 + 0.5 * i, -100.25, "Dfb", "T1", None)
        for i in range(5)
    ] + [
        ("T%03d" % (5 + i), 36.25 + 0.5 * i, -95.25, "Cfb", "T1", None)
        for i in range(3)
    ] + [
        ("T%03d" % (8 + i), 48.25, 5.25 + 0.5 * i, "Cfb", "T2", None)
        for i in range(4)
    ] + [
        ("T012", 67.25, 20.25, "ET", "T2", None),
        ("T013", 67.75, 20.25, "ET", "T2", None),
        ("T014", 40.25, 110.25, "BWh", "T3", None),
        ("T015", 41.25, 111.25, "BWh", "T3", "missing_month"),
        ("T016", -80.25, 10.25, None, None, "nogrid"),
    ],
    "precipitation": [
        ("P%03d" % i, 33.25 + 0.5 * i, -90.25, "Cfa", "P1", None)
        for i in range(4)
    ] + [
        ("P%03d" % (4 + i), -10.25 - 0.5 * i, -60.25, "Aw", "P2", None)
        for i in range(3)
    ] + [
        ("P%03d" % (7 + i), 50.25 + 0.5 * i, 10.75, "Cfb", "P3", None)
        for i in range(3)
    ] + [
        ("P%03d" % (10 + i), -2.25, 20.25 + 0.5 * i, "Af", "P4", None)
        for i in range(4)
    ] + [
        ("P014", -25.25, 135.25, "BSh", "P7", None),
        ("P015", -26.25, 136.25, "BSh", "P7", "ring"),
        ("P016", -27.25, 137.25, "BSh", "P7", "short"),
    ],
    "river_flow": [
        ("R%03d" % i, 45.25 + 0.5 * i, -80.25, "Dfa", "R1", None)
        for i in range(6)
    ] + [
        ("R%03d" % (6 + i), 47.25, 7.25 + 0.5 * i, "Cfb", "R2", None)
        for i in range(6)
    ] + [
        ("R%03d" % (12 + i), -33.25, 146.25 + 0.5 * i, "Cfb", "R3", None)
        for i in range(3)
    ] + [
        ("R015", -34.25, 148.25, "Cfb", "R3", "constant"),
    ],
}

PROFILES = {
    # per class code: base, seasonal amp, trend per year, noise sd
    "Dfb": (8.0, 12.0, 0.01, 2.0),
    "Dfa": (10.0, 11.0, 0.008, 2.2),
    "Cfb": (11.0, 7.0, 0.012, 1.5),
    "Cfa": (16.0, 8.0, 0.01, 1.8),
    "ET": (-4.0, 10.0, 0.03, 2.5),
    "BWh": (22.0, 9.0, 0.02, 1.2),
    "BSh": (24.0, 5.0, 0.005, 1.6),
    "Af": (26.0, 1.5, 0.004, 1.0),
    "Aw": (25.0, 3.0, 0.006, 1.4),
    None: (5.0, 9.0, 0.0, 2.0),
}


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(990331)
    grid_cells: dict[tuple[float, float], str] = {}

    for kind, stations in STATIONS.items():
        rows = []
        for sid, lat, lon, code, _region, quirk in stations:
            base, amp, trend, sd = PROFILES[code]
            first, last = FIRST_YEAR, LAST_YEAR
            if quirk == "short":
                first = LAST_YEAR - 19
            n_years = last - first + 1
            values = monthly_values(rng, n_years, base, amp, 1.0, trend, sd)
            if quirk == "constant":
                values = np.full(n_years * 12, base)
            if quirk == "missing_month":
                values[(1990 - first) * 12 + 2] = np.nan  # March 1990
            if code is not None:
                cell = (lat, lon) if quirk != "ring" else (lat, lon + 0.5)
                existing = grid_cells.get(cell)
                assert existing in (None, code), f"grid conflict at {cell}"
                grid_cells[cell] = code
            for yi in range(n_years):
                months = values[yi * 12:(yi + 1) * 12]
                cells = [MISSING if np.isnan(v) else repr(round(float(v), 3))
                         for v in months]
                rows.append([sid, repr(lat), repr(lon), first + yi] + cells)
        path = FIXTURES / f"monthly_{kind}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["station_id", "lat", "lon", "year"]
                            + [f"m{m:02d}" for m in range(1, 13)])
            writer.writerows(rows)
        print(f"wrote {path} ({len(stations)} stations)")

    grid_path = FIXTURES / "climate_grid.csv"
    with open(grid_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lat", "lon", "class"])
        for (lat, lon), code in sorted(grid_cells.items()):
            writer.writerow([repr(lat), repr(lon), code])
    print(f"wrote {grid_path} ({len(grid_cells)} cells)")

    config_path = FIXTURES / "pipeline.yaml"
    config_path.write_text(
        "inputs:\n"
        "  temperature: monthly_temperature.csv\n"
        "  precipitation: monthly_precipitation.csv\n"
        "  river_flow: monthly_river_flow.csv\n"
        "climate_grid: climate_grid.csv\n"
        "region_config: ../../configs/regions_default.yaml\n"
        "output_dir: out\n"
        "seed: 20240817\n"
        "min_group_size: 5\n"
        "forest:\n"
        "  n_trees: 200\n",
        encoding="utf-8",
    )
    print(f"wrote {config_path}")


if __name__ == "__main__":
    main()
