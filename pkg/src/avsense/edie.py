"""Ground-truth traffic states from full trajectories.

Per lane and per time-space cell, flow = sum(d)/sum(a), density =
sum(t)/sum(a), speed = sum(d)/sum(t), where d/t are the distance/time a
vehicle spends inside the cell and a is its headway band clipped to the
cell. Cells where sum(a) or sum(t) is zero are masked undefined.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DataError
from .trajectory import Grid, TrackSet, VehicleTrack


@dataclass
class CellField:
    """One lane's matrix of a traffic quantity with a defined-mask.

    Rows index road segments s (ascending), columns index time intervals h.
    """

    lane: int
    quantity: str  # "density" | "speed" | "flow"
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.values.shape != self.mask.shape:
            raise ValueError("values and mask shapes differ")

    @property
    def shape(self):
        return self.values.shape

    def defined_values(self) -> np.ndarray:
        return self.values[self.mask]

    def to_csv(self, path) -> None:
        """Matrix CSV: rows = segments ascending, masked cells empty."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for s in range(self.values.shape[0]):
                row = [
                    repr(float(self.values[s, h])) if self.mask[s, h] else ""
                    for h in range(self.values.shape[1])
                ]
                w.writerow(row)

    @classmethod
    def from_csv(cls, path, lane: int, quantity: str) -> "CellField":
        rows = []
        with open(path, newline="") as fh:
            for line in csv.reader(fh):
                rows.append(line)
        n_s = len(rows)
        n_h = len(rows[0]) if rows else 0
        values = np.zeros((n_s, n_h))
        mask = np.zeros((n_s, n_h), dtype=bool)
        for s, line in enumerate(rows):
            for h, cellv in enumerate(line):
                if cellv != "":
                    values[s, h] = float(cellv)
                    mask[s, h] = True
        return cls(lane=lane, quantity=quantity, values=values, mask=mask)


@dataclass
class CellContribution:
    """One vehicle's distance/time/headway-area inside one cell."""

    vehicle_id: str
    lane: int
    h: int
    s: int
    d: float
    t: float
    a: float


@dataclass
class HeadwayBand:
    """The region between a vehicle's trajectory and its leader's position.

    Stored as per-sample-interval convex strips (t0, t1, xlo0, xlo1,
    xup0, xup1); the polygon is their union.
    """

    vehicle_id: str
    lane: int
    strips: np.ndarray

    def polygon(self) -> list[tuple[float, float]]:
        """Outline: lower boundary forward, upper boundary backward."""
        if len(self.strips) == 0:
            return []
        lower = [(s[0], s[2]) for s in self.strips] + [(self.strips[-1][1], self.strips[-1][3])]
        upper = [(self.strips[-1][1], self.strips[-1][5])] + [
            (s[0], s[4]) for s in self.strips[::-1]
        ]
        return lower + upper


def track_strips(tr: VehicleTrack, x_len: float):
    """Per-interval strips of one track: (n-1, 6) array plus per-strip lane.

    Interval k spans samples k..k+1 and carries the lane of its left
    endpoint (a lane change splits contributions at the sample boundary).
    Upper boundary is position + headway, truncated at the road end;
    non-finite where the vehicle has no leader (no band there).
    """
    if tr.headway is None:
        raise DataError(f"headways not derived for vehicle {tr.vehicle_id}")
    if tr.n_points < 2:
        return np.empty((0, 6)), np.empty(0, dtype=np.int64)
    t0 = tr.time[:-1]
    t1 = tr.time[1:]
    xl0 = tr.x[:-1]
    xl1 = tr.x[1:]
    h0 = tr.headway[:-1]
    h1 = tr.headway[1:]
    same_lane = tr.lane[1:] == tr.lane[:-1]
    h_right = np.where(same_lane & np.isfinite(h1), h1, h0)
    has_band = np.isfinite(h0)
    with np.errstate(invalid="ignore"):
        xu0 = np.where(has_band, np.minimum(xl0 + h0, x_len), np.nan)
        xu1 = np.where(has_band, np.minimum(xl1 + h_right, x_len), np.nan)
    strips = np.column_stack([t0, t1, xl0, xl1, xu0, xu1])
    return strips, tr.lane[:-1].copy()


def headway_bands(ts: TrackSet, vehicle_id: str) -> list[HeadwayBand]:
    """Bands of one vehicle, one per contiguous same-lane leader-present run."""
    tr = ts.track_by_id(vehicle_id)
    strips, lanes = track_strips(tr, ts.grid.x_len)
    bands = []
    n = len(strips)
    start = None
    for k in range(n + 1):
        live = k < n and np.isfinite(strips[k, 4])
        if live and start is None:
            start = k
        elif start is not None and (not live or lanes[k] != lanes[start]):
            bands.append(
                HeadwayBand(
                    vehicle_id=vehicle_id, lane=int(lanes[start]), strips=strips[start:k].copy()
                )
            )
            start = k if live else None
    return bands


def clip_band_to_cell(band: HeadwayBand, cell) -> float:
    """Area (m*s) of band ∩ axis-aligned cell rectangle (t0, t1, x0, x1)."""
    t_lo, t_hi, x_lo, x_hi = cell
    total = 0.0
    for s in band.strips:
        quad = [(s[0], s[2]), (s[1], s[3]), (s[1], s[5]), (s[0], s[4])]
        total += kernels.clip_polygon_rect(quad, t_lo, t_hi, x_lo, x_hi)
    return total


def sums_from_strips(strips_by_lane: dict, grid: Grid, backend=None) -> dict:
    """Accumulate (d, t, a) matrices per lane from prebuilt strip arrays."""
    accumulate = backend or kernels.accumulate_strips
    out = {}
    for lane, strips in strips_by_lane.items():
        d = np.zeros((grid.n_s, grid.n_h))
        t = np.zeros((grid.n_s, grid.n_h))
        a = np.zeros((grid.n_s, grid.n_h))
        if len(strips):
            accumulate(strips, grid.n_h, grid.n_s, grid.dt, grid.dx, d, t, a)
        out[lane] = (d, t, a)
    return out


def edie_sums(ts: TrackSet, vehicles=None, backend=None) -> dict:
    """Per-lane (d, t, a) sum matrices over a vehicle subset (default: all)."""
    grid = ts.grid
    chunks = {lane: [] for lane in grid.lanes}
    for tr in ts.tracks:
        if vehicles is not None and tr.vehicle_id not in vehicles:
            continue
        strips, lanes = track_strips(tr, grid.x_len)
        if not len(strips):
            continue
        for lane in np.unique(lanes):
            chunks[int(lane)].append(strips[lanes == lane])
    merged = {
        lane: (np.concatenate(parts) if parts else np.empty((0, 6)))
        for lane, parts in chunks.items()
    }
    return sums_from_strips(merged, grid, backend=backend)


def cell_contributions(ts: TrackSet, vehicles=None) -> list[CellContribution]:
    """Per-vehicle, per-cell d/t/a records (zero cells omitted)."""
    grid = ts.grid
    out = []
    d = np.zeros((grid.n_s, grid.n_h))
    t = np.zeros((grid.n_s, grid.n_h))
    a = np.zeros((grid.n_s, grid.n_h))
    for tr in ts.tracks:
        if vehicles is not None and tr.vehicle_id not in vehicles:
            continue
        strips, lanes = track_strips(tr, grid.x_len)
        if not len(strips):
            continue
        for lane in np.unique(lanes):
            d[:] = 0.0
            t[:] = 0.0
            a[:] = 0.0
            kernels.accumulate_strips(
                strips[lanes == lane], grid.n_h, grid.n_s, grid.dt, grid.dx, d, t, a
            )
            ss, hs = np.nonzero((d > 0) | (t > 0) | (a > 0))
            for s_i, h_i in zip(ss, hs):
                out.append(
                    CellContribution(
                        vehicle_id=tr.vehicle_id,
                        lane=int(lane),
                        h=int(h_i),
                        s=int(s_i),
                        d=float(d[s_i, h_i]),
                        t=float(t[s_i, h_i]),
                        a=float(a[s_i, h_i]),
                    )
                )
    return out


def fields_from_sums(sums: dict, quantity_prefix: str = "") -> dict:
    """Turn per-lane (d, t, a) sums into density/speed/flow CellFields."""
    fields = {"density": {}, "speed": {}, "flow": {}}
    for lane, (d, t, a) in sums.items():
        mask = (a > 0.0) & (t > 0.0)
        k = np.zeros_like(t)
        v = np.zeros_like(t)
        q = np.zeros_like(t)
        np.divide(t, a, out=k, where=mask)
        np.divide(d, t, out=v, where=mask)
        np.divide(d, a, out=q, where=mask)
        fields["density"][lane] = CellField(lane, "density", k, mask.copy())
        fields["speed"][lane] = CellField(lane, "speed", v, mask.copy())
        fields["flow"][lane] = CellField(lane, "flow", q, mask.copy())
    return fields


def ground_truth(ts: TrackSet, backend=None) -> dict:
    """Per-lane ground-truth {density, speed, flow} CellFields."""
    return fields_from_sums(edie_sums(ts, backend=backend))
