#!/usr/bin/env python3
"""Convert fixed-width monthly station archives to the canonical CSV layout.

Handles the common GHCN-M style layout: a data file with one record per
station-year-element

    columns 1-11   station id
    columns 12-15  year
    columns 16-19  element code (e.g. TAVG, PRCP)
    then 12 groups of value(5) + three flag characters

and a metadata ("inventory") file with

    columns 1-11   station id
    columns 13-20  latitude (decimal degrees)
    columns 22-30  longitude (decimal degrees)

Values are scaled (GHCN-M v4 TAVG is hundredths of a degree, so
``--scale 0.01``); the archive missing code -9999 maps to the canonical
missing code.  Output is ``station_id,lat,lon,year,m01..m12`` suitable for
the pipeline's ``inputs`` section.

Example::

    python3 scripts/adapt_fixed_width_monthly.py \
        --data ghcnm.tavg.v4.dat --metadata ghcnm.tavg.v4.inv \
        --element TAVG --scale 0.01 --out monthly_temperature.csv
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

log = logging.getLogger("adapt_fixed_width_monthly")

ARCHIVE_MISSING = -9999
CANONICAL_MISSING = "-9999"


def read_metadata(path: str) -> dict[str, tuple[float, float]]:
    coords: dict[str, tuple[float, float]] = {}
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            if len(line) < 30:
                continue
            sid = line[0:11].strip()
            try:
                lat = float(line[12:20])
                lon = float(line[21:30])
            except ValueError:
                log.warning("unparseable metadata line for %r", sid)
                continue
            coords[sid] = (lat, lon)
    return coords


def convert(data_path: str, coords: dict[str, tuple[float, float]],
            element: str, scale: float, writer: csv.writer) -> tuple[int, int]:
    written = skipped = 0
    with open(data_path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            if len(line) < 19 + 12 * 8:
                continue
            if line[15:19].strip() != element:
                continue
            sid = line[0:11].strip()
            if sid not in coords:
                skipped += 1
                continue
            try:
                year = int(line[11:15])
            except ValueError:
                skipped += 1
                continue
            lat, lon = coords[sid]
            cells = []
            for m in range(12):
                raw = line[19 + m * 8: 24 + m * 8]
                try:
                    value = int(raw)
                except ValueError:
                    value = ARCHIVE_MISSING
                cells.append(CANONICAL_MISSING if value == ARCHIVE_MISSING
                             else repr(round(value * scale, 6)))
            writer.writerow([sid, repr(lat), repr(lon), year] + cells)
            written += 1
    return written, skipped


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--data", required=True, help="fixed-width data file")
    parser.add_argument("--metadata", required=True,
                        help="station inventory with coordinates")
    parser.add_argument("--element", required=True,
                        help="element code to extract (e.g. TAVG, PRCP)")
    parser.add_argument("--scale", type=float, default=1.0,
                        help="multiplier applied to raw integer values")
    parser.add_argument("--out", required=True, help="canonical CSV to write")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")

    coords = read_metadata(args.metadata)
    log.info("%d stations in metadata", len(coords))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["station_id", "lat", "lon", "year"]
                        + [f"m{m:02d}" for m in range(1, 13)])
        written, skipped = convert(args.data, coords, args.element,
                                   args.scale, writer)
    log.info("wrote %d station-years to %s (%d records skipped)",
             written, args.out, skipped)
    return 0


if __name__ == "__main__":
    sys.exit(main())
