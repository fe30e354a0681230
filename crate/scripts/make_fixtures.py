#!/usr/bin/env python3
"""Writes the bundled case fixtures under crates/core/fixtures.

Network and generator data follow the public IEEE RTS-24 system, with units of
the same type at a bus aggregated into one. Profiles are synthetic.
"""

import json
import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"

# Residential shape: morning shoulder, evening peak.
LOAD_SHAPE = [
    0.62, 0.58, 0.56, 0.55, 0.56, 0.62, 0.80, 0.95, 0.93, 0.85, 0.82, 0.80,
    0.79, 0.78, 0.80, 0.84, 0.88, 0.92, 0.98, 1.00, 0.95, 0.86, 0.75, 0.66,
]
WIND_SHAPE = [
    0.78, 0.82, 0.85, 0.84, 0.80, 0.74, 0.62, 0.50, 0.42, 0.36, 0.32, 0.30,
    0.28, 0.30, 0.34, 0.40, 0.46, 0.52, 0.58, 0.62, 0.66, 0.70, 0.74, 0.76,
]
TEMPERATURE = [
    14.0, 13.2, 12.6, 12.1, 11.8, 12.0, 13.5, 15.8, 18.4, 21.0, 23.3, 25.1,
    26.6, 27.5, 27.9, 27.6, 26.5, 24.7, 22.4, 20.3, 18.7, 17.2, 15.9, 14.9,
]


def solar_shape():
    return [round(max(0.0, math.sin(math.pi * (t + 0.5 - 6.5) / 13.0)) ** 1.3, 4) for t in range(24)]


RTS_LOAD = {
    1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 125, 8: 171, 9: 175,
    10: 195, 13: 265, 14: 194, 15: 317, 16: 100, 18: 333, 19: 181, 20: 128,
}

# (from, to, reactance p.u., rating MW)
RTS_BRANCHES = [
    (1, 2, 0.0139, 175), (1, 3, 0.2112, 175), (1, 5, 0.0845, 175),
    (2, 4, 0.1267, 175), (2, 6, 0.1920, 175), (3, 9, 0.1190, 175),
    (3, 24, 0.0839, 400), (4, 9, 0.1037, 175), (5, 10, 0.0883, 175),
    (6, 10, 0.0605, 175), (7, 8, 0.0614, 175), (8, 9, 0.1651, 175),
    (8, 10, 0.1651, 175), (9, 11, 0.0839, 400), (9, 12, 0.0839, 400),
    (10, 11, 0.0839, 400), (10, 12, 0.0839, 400), (11, 13, 0.0476, 500),
    (11, 14, 0.0418, 500), (12, 13, 0.0476, 500), (12, 23, 0.0966, 500),
    (13, 23, 0.0865, 500), (14, 16, 0.0389, 500), (15, 16, 0.0173, 500),
    (15, 21, 0.0490, 500), (15, 21, 0.0490, 500), (15, 24, 0.0519, 500),
    (16, 17, 0.0259, 500), (16, 19, 0.0231, 500), (17, 18, 0.0144, 500),
    (17, 22, 0.1053, 500), (18, 21, 0.0259, 500), (18, 21, 0.0259, 500),
    (19, 20, 0.0396, 500), (19, 20, 0.0396, 500), (20, 23, 0.0216, 500),
    (20, 23, 0.0216, 500), (21, 22, 0.0678, 500),
]

# Tightened rating on the corridor feeding bus 14 so it binds at peak only.
BUS14_LIMITS = {(14, 16): 455}

# (name, bus, units, unit MW, unit min MW, ramp MW/h per unit, $/MWh, no-load $/h per unit, startup $ per unit)
RTS_UNITS = [
    ("u20_b1", 1, 2, 20, 16, 20, 130.0, 40.0, 50.0),
    ("u76_b1", 1, 2, 76, 15.2, 40, 16.0, 120.0, 700.0),
    ("u20_b2", 2, 2, 20, 16, 20, 130.0, 40.0, 50.0),
    ("u76_b2", 2, 2, 76, 15.2, 40, 16.0, 120.0, 700.0),
    ("u100_b7", 7, 3, 100, 25, 70, 43.0, 180.0, 1000.0),
    ("u197_b13", 13, 3, 197, 69, 180, 48.0, 260.0, 1500.0),
    ("u12_b15", 15, 5, 12, 2.4, 12, 56.0, 30.0, 40.0),
    ("u155_b15", 15, 1, 155, 54.3, 90, 13.0, 200.0, 1200.0),
    ("u155_b16", 16, 1, 155, 54.3, 90, 13.0, 200.0, 1200.0),
    ("u400_b18", 18, 1, 400, 100, 400, 5.0, 300.0, 0.0),
    ("u400_b21", 21, 1, 400, 100, 400, 5.0, 300.0, 0.0),
    ("u50_b22", 22, 6, 50, 10, 50, 2.0, 0.0, 0.0),
    ("u155_b23", 23, 2, 155, 54.3, 90, 13.0, 200.0, 1200.0),
    ("u350_b23", 23, 1, 350, 140, 140, 12.0, 280.0, 2000.0),
    # Replaces the bus-14 synchronous condenser with a small peaker so the
    # bus stays feasible when its corridors saturate.
    ("ct_b14", 14, 1, 120, 0, 120, 95.0, 60.0, 300.0),
]

LOAD_SCALE = 0.9

# (bus, energy MWh, power MW, initial SOC)
FLEET = [(21, 50, 20, 0.4), (22, 10, 4, 0.4), (7, 10, 4, 0.4), (14, 200, 100, 0.4), (9, 30, 10, 0.5)]
WIND_FARMS = [(3, 120), (5, 60), (16, 100), (19, 140), (20, 80)]


def bess(name, bus, energy, power, soc, kilo=False):
    scale = 1000.0 if kilo else 1.0
    capital = 200.0 * 1000.0 * energy / scale  # 200 $/kWh
    return {
        "name": name,
        "bus": bus,
        "energy_max": energy,
        "energy_min": 0.0,
        "energy_initial": round(energy * soc, 6),
        "p_max": power,
        "p_min": 0.0,
        "eta_charge": 0.9,
        "eta_discharge": 0.9,
        "capital_cost": capital,
        "salvage_value": 0.1 * capital,
        "soh_eol": 0.8,
        "soh_now": 1.0,
    }


def ieee24():
    buses = list(range(1, 25))
    lines = []
    for k, (f, t, x, rate) in enumerate(RTS_BRANCHES, start=1):
        limit = BUS14_LIMITS.get((f, t), rate)
        lines.append({"name": f"l{k}_{f}_{t}", "from": f, "to": t, "susceptance": round(1.0 / x, 6), "limit": limit})
    gens = []
    for name, bus, n, pmax, pmin, ramp, cost, nl, su in RTS_UNITS:
        gens.append({
            "name": name,
            "bus": bus,
            "p_min": round(n * pmin, 6) if name != "ct_b14" else 0.0,
            "p_max": n * pmax,
            "ramp": n * ramp,
            "cost": cost,
            "no_load_cost": n * nl,
            "startup_cost": n * su,
            "initial_on": cost <= 16.0,
        })
    loads = [
        {"bus": b, "demand": [round(LOAD_SCALE * p * s, 3) for s in LOAD_SHAPE]}
        for b, p in sorted(RTS_LOAD.items())
    ]
    wind = [
        {"name": f"wind_b{b}", "bus": b, "kind": "wind", "output": [round(cap * s, 3) for s in WIND_SHAPE]}
        for b, cap in WIND_FARMS
    ]
    fleet = [bess(f"bess{i}", b, e, p, s) for i, (b, e, p, s) in enumerate(FLEET, start=1)]
    return {
        "name": "ieee24-5bess",
        "units": "MW",
        "base_mva": 100.0,
        "buses": buses,
        "reference_bus": 13,
        "generators": gens,
        "lines": lines,
        "bess": fleet,
        "renewables": wind,
        "loads": loads,
        "temperature": TEMPERATURE,
    }


# $/MWh, day-ahead shape with an evening spike.
BUY_PRICE = [
    22.0, 20.5, 19.8, 19.5, 20.1, 23.0, 29.0, 36.0, 34.0, 31.0, 30.0, 31.5,
    33.0, 35.0, 38.0, 44.0, 55.0, 72.0, 85.0, 78.0, 58.0, 42.0, 32.0, 26.0,
]


def microgrid():
    houses = 1000
    per_house_kw = [0.9 * s * 1.6 for s in LOAD_SHAPE]
    load = [round(houses * k, 1) for k in per_house_kw]
    solar = [round(1500.0 * s, 1) for s in solar_shape()]
    wind = [round(1000.0 * s, 1) for s in WIND_SHAPE]
    return {
        "name": "microgrid-1bess",
        "units": "kW",
        "generators": [{
            "name": "diesel",
            "p_min": 0.0,
            "p_max": 180.0,
            "ramp": 180.0,
            "cost": 120.0,
            "no_load_cost": 4.0,
            "startup_cost": 10.0,
            "initial_on": False,
        }],
        "bess": [bess("bess", 1, 300.0, 100.0, 0.5, kilo=True)],
        "renewables": [
            {"name": "wind", "kind": "wind", "output": wind},
            {"name": "solar", "kind": "solar", "output": solar},
        ],
        "load": load,
        "temperature": TEMPERATURE,
        "buy_price": BUY_PRICE,
        "sell_price": [round(0.9 * p, 3) for p in BUY_PRICE],
        "grid_limit": 2000.0,
        "reserve_ratio": 0.1,
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for case in (ieee24(), microgrid()):
        path = OUT / f"{case['name']}.json"
        path.write_text(json.dumps(case, indent=1) + "\n")
        print(path)


if __name__ == "__main__":
    main()
