"""Spreadsheet-style recomputation of the fuel-only side of the mini feed.

Reads the raw GTFS text files and geo caches directly (no shared code with
the Rust crate) and writes expected_diesel.csv. Everything here is
independent of the surrogate model, so it pins bus counts, VKT, speed,
fuel economy, diesel CO2, PM2.5 health cost and diesel TCO.

Run from this directory: python3 oracle.py
"""
import csv
import math
from collections import defaultdict

# Boston profile.
C_V = 0.621371
FUEL, FUEL_G = 2.546, 0.007
DBUS, OM_D, RESID, RD, YEARS = 485_000.0, 0.88, 0.15, 0.035, 12
EF_W2T, EF_T2W, EF_PM = 310.0, 10.21, 0.583
IF_PPM, FF, VSL = 25.8, 260.110, 6.267
DAY_SERVICE = "WK"  # every weekday runs WK only; SA never does

def secs(t):
    h, m, s = map(int, t.split(":"))
    return h * 3600 + m * 60 + s

rows = lambda f: list(csv.DictReader(open(f"gtfs/{f}")))
trips = {r["trip_id"]: r for r in rows("trips.txt")}
routes = {r["route_id"]: r for r in rows("routes.txt")}
events = defaultdict(list)
for r in rows("stop_times.txt"):
    events[r["trip_id"]].append((int(r["stop_sequence"]), r["stop_id"], secs(r["arrival_time"])))
for v in events.values():
    v.sort()
dist = {(r["from_stop"], r["to_stop"]): float(r["distance_km"]) for r in csv.DictReader(open("geo/distances.csv"))}

def served(ev):
    # Consecutive identical arrival times: only the first stop is served.
    out = []
    for e in ev:
        if out and out[-1][2] == e[2]:
            continue
        out.append(e)
    return out

def buses(trip_ids):
    if not trip_ids:
        return 0
    at = defaultdict(list)
    for t in trip_ids:
        ev = events[t]
        cyc = ev[-1][2] - ev[0][2]
        for _, s, a in ev:
            at[s].append((a, cyc))
    need = 1
    for lst in at.values():
        lst.sort()
        for (a0, _), (a1, c1) in zip(lst, lst[1:]):
            if a1 > a0:
                need = max(need, -(-c1 // (a1 - a0)))
    return need

out = []
for rid in [l.split("#")[0].strip() for l in open("allow_list.txt")]:
    if not rid or routes[rid]["route_type"] != "3":
        continue
    mine = [t for t in trips if trips[t]["route_id"] == rid]
    day = [t for t in mine if trips[t]["service_id"] == DAY_SERVICE]
    b_in = buses([t for t in day if trips[t]["direction_id"] == "1"])
    b_out = buses([t for t in day if trips[t]["direction_id"] == "0"])
    n = b_in + b_out

    clusters = defaultdict(list)
    for t in mine:
        seq = tuple(s for _, s, _ in served(events[t]))
        clusters[(trips[t]["direction_id"], seq)].append(t)
    speeds, vkt = [], 0.0
    for (_, seq), ts in clusters.items():
        d = sum(dist[(a, b)] for a, b in zip(seq, seq[1:]))
        cyc = sum((events[t][-1][2] - events[t][0][2]) / 60 for t in ts) / len(ts)
        speeds.append(d / cyc * 60)
        vkt += d * sum(1 for t in ts if t in day) * 365
    speed = sum(speeds) / len(speeds)

    mph = C_V * speed
    fe = -0.0032 * mph ** 2 + 0.2143 * mph + 0.9726
    gal = vkt * C_V / fe
    co2 = vkt * EF_W2T / 1e6 + gal * EF_T2W / 1000
    pm = vkt * EF_PM
    hi = IF_PPM * 1e-6 * pm / 1000 * FF * VSL * 1e6
    annuity = ((1 + RD) ** YEARS - 1) / (RD * (1 + RD) ** YEARS)
    fuel = sum(FUEL * (1 + FUEL_G) ** y * gal for y in range(1, YEARS + 1))
    om = OM_D * n * C_V * vkt * annuity
    salvage = -RESID * DBUS * n / (1 + RD) ** YEARS
    tco = DBUS * n + fuel + om + salvage
    out.append([rid, b_in, b_out, n, len(clusters), repr(vkt), repr(speed), repr(fe), repr(co2), repr(hi), repr(tco)])

with open("expected_diesel.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["route_id", "buses_inbound", "buses_outbound", "buses_total", "clusters", "annual_vkt_km",
                "route_speed_kmh", "fuel_economy_mpg", "diesel_co2_t_yr", "diesel_health_usd_yr", "diesel_tco_npv_usd"])
    w.writerows(out)
