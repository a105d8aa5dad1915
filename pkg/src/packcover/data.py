"""File formats and ingestion.

A data directory holds UTF-8 CSV files with a header row:

``sites.csv``       site_id, lat, lon [, demand] [, cost_cents]
``demand.csv``      site_id, h00 .. h23  (mean energy per hour, kWh)
``poi.csv``         poi_id, category, lat, lon
``traffic.csv``     junction_id, lat, lon, density
``interests.csv``   interest_id, lat, lon  (optional; default: the sites)
``distances.csv``   interest_id, site_id, km  (optional; default: haversine)
``instance.json``   {"budget_cents": int, "radius_km": float}  (optional)

Money is written as integer cents.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .costing import LandCostModel, PoiRecord, haversine_km

log = logging.getLogger(__name__)

__all__ = [
    "ParseError",
    "SchemaError",
    "DataBundle",
    "Views",
    "read_csv",
    "write_csv",
    "ingest",
    "build_views",
    "to_cents",
    "from_cents",
    "HOURS",
    "synth_city",
    "warn_unscored",
]

HOURS = tuple(f"h{h:02d}" for h in range(24))


class ParseError(ValueError):
    def __init__(self, path, line, column, value):
        self.path, self.line, self.column, self.value = str(path), line, column, value
        super().__init__(f"{path}:{line}: column {column!r} has non-numeric value {value!r}")


class SchemaError(ValueError):
    def __init__(self, path, column):
        self.path, self.column = str(path), column
        super().__init__(f"{path}: missing required column {column!r}")


def to_cents(x: float) -> int:
    return int(round(x * 100))


def from_cents(c) -> float:
    return int(c) / 100.0


def read_csv(path, required=(), numeric=()) -> list[dict]:
    """Read a CSV into dicts, checking required columns and parsing numeric ones."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(path, col)
        rows = []
        for line, row in enumerate(reader, start=2):
            for col in numeric:
                if col in row and row[col] not in (None, ""):
                    try:
                        row[col] = float(row[col])
                    except ValueError:
                        raise ParseError(path, line, col, row[col]) from None
                    if not math.isfinite(row[col]):
                        raise ParseError(path, line, col, row[col])
            rows.append(row)
    return rows


def write_csv(path, header, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


@dataclass
class DataBundle:
    site_ids: list
    coords: np.ndarray  # sites x (lat, lon)
    interest_ids: list
    dist: np.ndarray  # interest x site, km
    site_demand: Optional[np.ndarray] = None  # from sites.csv demand column
    site_cost: Optional[np.ndarray] = None  # dollars, from cost_cents column
    history: dict = field(default_factory=dict)  # site_id -> 24 hourly values
    pois: list = field(default_factory=list)  # (PoiRecord, id)
    traffic: Optional[np.ndarray] = None  # junction x (lat, lon, density)
    meta: dict = field(default_factory=dict)

    @property
    def site_count(self) -> int:
        return len(self.site_ids)

    def index(self, site_id) -> int:
        return self.site_ids.index(site_id)


def ingest(data_dir) -> DataBundle:
    """Load a data directory; see the module docstring for the layout."""
    d = Path(data_dir)
    sites = read_csv(d / "sites.csv", ("site_id", "lat", "lon"), ("lat", "lon", "demand", "cost_cents"))
    site_ids = [r["site_id"] for r in sites]
    if len(set(site_ids)) != len(site_ids):
        raise ValueError(f"{d / 'sites.csv'}: duplicate site_id")
    coords = np.array([[r["lat"], r["lon"]] for r in sites], dtype=float).reshape(-1, 2)
    site_demand = None
    if sites and all(isinstance(r.get("demand"), float) for r in sites):
        site_demand = np.array([r["demand"] for r in sites])
    site_cost = None
    if sites and all(isinstance(r.get("cost_cents"), float) for r in sites):
        site_cost = np.array([r["cost_cents"] / 100.0 for r in sites])

    if (d / "interests.csv").exists():
        irows = read_csv(d / "interests.csv", ("interest_id", "lat", "lon"), ("lat", "lon"))
        interest_ids = [r["interest_id"] for r in irows]
        icoords = np.array([[r["lat"], r["lon"]] for r in irows], dtype=float).reshape(-1, 2)
    else:
        interest_ids, icoords = list(site_ids), coords

    if (d / "distances.csv").exists():
        drows = read_csv(d / "distances.csv", ("interest_id", "site_id", "km"), ("km",))
        dist = np.full((len(interest_ids), len(site_ids)), np.inf)
        ipos = {k: j for j, k in enumerate(interest_ids)}
        spos = {k: j for j, k in enumerate(site_ids)}
        for line, r in enumerate(drows, start=2):
            if r["interest_id"] not in ipos or r["site_id"] not in spos:
                raise ValueError(f"{d / 'distances.csv'}:{line}: unknown interest or site id")
            dist[ipos[r["interest_id"]], spos[r["site_id"]]] = r["km"]
    else:
        dist = haversine_km(icoords[:, None, 0], icoords[:, None, 1], coords[None, :, 0], coords[None, :, 1])

    history = {}
    if (d / "demand.csv").exists():
        for r in read_csv(d / "demand.csv", ("site_id",) + HOURS, HOURS):
            history[r["site_id"]] = np.array([r[h] for h in HOURS])

    pois = []
    if (d / "poi.csv").exists():
        for r in read_csv(d / "poi.csv", ("poi_id", "category", "lat", "lon"), ("lat", "lon")):
            pois.append((PoiRecord(r["category"], r["lat"], r["lon"]), r["poi_id"]))

    traffic = None
    if (d / "traffic.csv").exists():
        rows = read_csv(d / "traffic.csv", ("junction_id", "lat", "lon", "density"), ("lat", "lon", "density"))
        traffic = np.array([[r["lat"], r["lon"], r["density"]] for r in rows], dtype=float).reshape(-1, 3)

    meta = json.loads((d / "instance.json").read_text()) if (d / "instance.json").exists() else {}
    return DataBundle(site_ids, coords, interest_ids, dist, site_demand, site_cost, history, pois, traffic, meta)


def warn_unscored(bundle: DataBundle, model: LandCostModel) -> list[str]:
    missing = sorted({p.category for p, _ in bundle.pois} - set(model.score_table))
    for cat in missing:
        log.warning("PoI category %r has no score; using default %s", cat, model.default_score)
    return missing


@dataclass
class Views:
    """Per-site feature views; rows follow ``site_ids``."""

    site_ids: list
    poi: np.ndarray  # counts per category within the PoI radius
    traffic: np.ndarray  # densities at the k nearest junctions
    neighbors: np.ndarray  # daily demand of the k nearest sites with history
    categories: list
    target: Optional[np.ndarray] = None  # filtered hourly demand, history sites only
    hours: tuple = ()


def _nearest_k(dist_row, k):
    order = np.argsort(dist_row, kind="stable")[:k]
    return order


def build_views(bundle: DataBundle, poi_radius_km: float = 0.5, k_traffic: int = 5, k_neighbors: int = 5,
                hour_window: tuple = (7, 23)) -> Views:
    """Feature views for every site, plus the hourly target for sites with history.

    ``hour_window`` is a half-open ``[start, end)`` range of hours kept in the
    target.  Missing traffic or too few neighbours are padded with zeros.
    """
    lat, lon = bundle.coords[:, 0], bundle.coords[:, 1]
    categories = sorted({p.category for p, _ in bundle.pois})
    poi = np.zeros((bundle.site_count, len(categories)))
    if bundle.pois:
        plat = np.array([p.lat for p, _ in bundle.pois])
        plon = np.array([p.lon for p, _ in bundle.pois])
        pcat = np.array([categories.index(p.category) for p, _ in bundle.pois])
        dd = haversine_km(lat[:, None], lon[:, None], plat[None, :], plon[None, :])
        for i in range(bundle.site_count):
            np.add.at(poi[i], pcat[dd[i] <= poi_radius_km], 1.0)

    traffic = np.zeros((bundle.site_count, k_traffic))
    if bundle.traffic is not None and len(bundle.traffic):
        dd = haversine_km(lat[:, None], lon[:, None], bundle.traffic[None, :, 0], bundle.traffic[None, :, 1])
        for i in range(bundle.site_count):
            near = _nearest_k(dd[i], k_traffic)
            traffic[i, : len(near)] = bundle.traffic[near, 2]

    hist_ids = [s for s in bundle.site_ids if s in bundle.history]
    neighbors = np.zeros((bundle.site_count, k_neighbors))
    if hist_ids:
        hidx = np.array([bundle.index(s) for s in hist_ids])
        daily = np.array([bundle.history[s].sum() for s in hist_ids])
        dd = haversine_km(lat[:, None], lon[:, None], lat[None, hidx], lon[None, hidx])
        for i in range(bundle.site_count):
            row = dd[i].copy()
            row[hidx == i] = np.inf  # a site is not its own neighbour
            near = [j for j in _nearest_k(row, k_neighbors) if np.isfinite(row[j])]
            neighbors[i, : len(near)] = daily[near]

    start, end = hour_window
    hours = tuple(HOURS[start:end])
    target = None
    if hist_ids:
        target = np.array([bundle.history[s][start:end] for s in hist_ids])
    return Views(list(bundle.site_ids), poi, traffic, neighbors, categories, target, hours)


def synth_city(out_dir, site_count: int = 40, history_fraction: float = 0.6, poi_count: int = 120,
               junction_count: int = 60, extent_km: float = 6.0, seed: int = 0) -> Path:
    """Write a seeded synthetic city: sites, PoIs, traffic and partial hourly history.

    Hourly demand at a site is a daily shape scaled by a linear mix of nearby
    PoI counts and traffic density, plus noise, so the feature views carry
    real signal.  Only the first ``history_fraction`` of sites get a row in
    ``demand.csv``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lat0, lon0 = 55.0, -1.6
    kx = 1 / (111.32 * math.cos(math.radians(lat0)))

    def place(n):
        xy = rng.uniform(0, extent_km, size=(n, 2))
        return lat0 + xy[:, 1] / 111.32, lon0 + xy[:, 0] * kx

    slat, slon = place(site_count)
    cats = ["airport", "hospital", "railway_station", "restaurant", "school", "supermarket"]
    plat, plon = place(poi_count)
    pcat = rng.choice(len(cats), size=poi_count, p=[0.02, 0.08, 0.05, 0.45, 0.2, 0.2])
    jlat, jlon = place(junction_count)
    density = rng.gamma(2.0, 50.0, size=junction_count)

    near_poi = haversine_km(slat[:, None], slon[:, None], plat[None], plon[None]) <= 0.5
    counts = np.stack([(near_poi & (pcat == c)).sum(axis=1) for c in range(len(cats))], axis=1)
    dj = haversine_km(slat[:, None], slon[:, None], jlat[None], jlon[None])
    traffic = density[np.argsort(dj, axis=1)[:, :5]].mean(axis=1)
    level = 5 + counts @ np.array([8, 3, 6, 1.5, 1, 1]) + 0.05 * traffic
    shape = 0.3 + np.exp(-0.5 * ((np.arange(24) - 9) / 2.5) ** 2) + np.exp(-0.5 * ((np.arange(24) - 18) / 3) ** 2)
    hist = np.maximum(level[:, None] * shape[None] * rng.lognormal(0, 0.15, size=(site_count, 24)), 0)

    ids = [f"s{i:03d}" for i in range(site_count)]
    write_csv(out / "sites.csv", ["site_id", "lat", "lon"], [(s, repr(a), repr(b)) for s, a, b in
                                                              zip(ids, slat.tolist(), slon.tolist())])
    write_csv(out / "poi.csv", ["poi_id", "category", "lat", "lon"],
              [(f"p{k}", cats[c], repr(a), repr(b)) for k, (c, a, b) in
               enumerate(zip(pcat.tolist(), plat.tolist(), plon.tolist()))])
    write_csv(out / "traffic.csv", ["junction_id", "lat", "lon", "density"],
              [(f"j{k}", repr(a), repr(b), repr(d)) for k, (a, b, d) in
               enumerate(zip(jlat.tolist(), jlon.tolist(), density.tolist()))])
    known = int(round(history_fraction * site_count))
    write_csv(out / "demand.csv", ["site_id", *HOURS],
              [(ids[i], *map(repr, hist[i].tolist())) for i in range(known)])
    return out
