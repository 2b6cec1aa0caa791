#!/usr/bin/env python3
"""Regenerates sample_500.csv: two stations, daily rows, labels derived
from the same breakpoint bands the library ships, ~4% missing cells."""

import random

EDGES = {
    "PM10": [0, 50, 100, 250, 350, 430, 510],
    "PM2.5": [0, 30, 60, 90, 120, 250, 380],
    "NO2": [0, 40, 80, 180, 280, 400, 520],
    "O3": [0, 50, 100, 168, 208, 748, 1288],
    "CO": [0, 1.0, 2.0, 10, 17, 34, 51],
    "SO2": [0, 40, 80, 380, 800, 1600, 2400],
    "NH3": [0, 200, 400, 800, 1200, 1800, 2400],
}
AQI_LO = [0, 51, 101, 201, 301, 401]
AQI_HI = [50, 100, 200, 300, 400, 500]
BUCKETS = ["Good", "Satisfactory", "Moderate", "Poor", "Very Poor", "Severe"]


def rows(p):
    step = 0.1 if p == "CO" else 1.0
    lo = EDGES[p][0]
    out = []
    for k in range(6):
        out.append((lo, EDGES[p][k + 1], AQI_LO[k], AQI_HI[k]))
        lo = EDGES[p][k + 1] + step
    return out


def sub_index(p, c):
    rs = rows(p)
    k = 0
    while k + 1 < len(rs) and c >= rs[k + 1][0]:
        k += 1
    lo, hi, alo, ahi = rs[k]
    v = alo + (ahi - alo) * (c - lo) / (hi - lo)
    return min(max(v, alo), ahi)


def next_date(y, m, d):
    days = [31, 29 if y % 4 == 0 and (y % 100 != 0 or y % 400 == 0) else 28,
            31, 30, 31, 30, 31, 31, 30, 31, 30, 31]
    d += 1
    if d > days[m - 1]:
        d, m = 1, m + 1
        if m > 12:
            m, y = 1, y + 1
    return y, m, d


def main():
    rng = random.Random(20150101)
    header = ["City", "Date", "PM2.5", "PM10", "NO", "NO2", "NOx", "NH3",
              "CO", "SO2", "O3", "Benzene", "Toluene", "AQI", "AQI_Bucket"]
    lines = [",".join(header)]
    for city in ["Aizawl", "Brajrajnagar"]:
        y, m, d = 2015, 1, 1
        for _ in range(250):
            level = rng.random() ** 1.6
            conc = {
                "PM2.5": level * 380 * rng.uniform(0.5, 1.0),
                "PM10": level * 510 * rng.uniform(0.5, 1.0),
                "NO": level * 120 * rng.uniform(0.2, 1.0),
                "NO2": level * 300 * rng.uniform(0.3, 1.0),
                "NOx": level * 200 * rng.uniform(0.3, 1.0),
                "NH3": level * 250 * rng.uniform(0.2, 1.0),
                "CO": level * 20 * rng.uniform(0.2, 1.0),
                "SO2": level * 150 * rng.uniform(0.2, 1.0),
                "O3": level * 200 * rng.uniform(0.3, 1.0),
            }
            aqi = max(sub_index(p, conc[p]) for p in EDGES)
            bucket = next(BUCKETS[k] for k in range(6)
                          if AQI_LO[k] <= int(aqi + 0.5) <= AQI_HI[k])
            fields = [city, f"{y:04d}-{m:02d}-{d:02d}"]
            for p in ["PM2.5", "PM10", "NO", "NO2", "NOx", "NH3", "CO", "SO2", "O3"]:
                fields.append("" if rng.random() < 0.04 else f"{conc[p]:.2f}")
            fields.append(f"{level * 12 * rng.uniform(0.3, 1.0):.2f}")
            fields.append(f"{level * 30 * rng.uniform(0.3, 1.0):.2f}")
            if rng.random() < 0.02:
                fields += ["", ""]
            else:
                fields += [f"{aqi:.2f}", bucket]
            lines.append(",".join(fields))
            y, m, d = next_date(y, m, d)
    with open("sample_500.csv", "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
