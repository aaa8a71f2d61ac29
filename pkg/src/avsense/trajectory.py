"""Trajectory ingestion, the time-space grid, and synthetic scenarios.

All internal units are SI (meters, seconds). Feet-based sources are
converted at ingestion. Vehicle tracks are stored as per-track numpy
arrays sampled at a fixed resolution ``dt_data`` (0.1 s for NGSIM-style
data); a vehicle that leaves and re-enters the road becomes a new track.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
import pandas as pd

from .errors import BoundsError, ConfigError, DataError, SchemaError

FEET_TO_M = 0.3048

# canonical name -> source column name
NGSIM_SCHEMA = {
    "vehicle_id": "Vehicle_ID",
    "frame_id": "Frame_ID",
    "lane": "Lane_ID",
    "x": "Local_Y",
    "speed": "v_Vel",
    "space_headway": "Space_Headway",
}
PLAIN_SCHEMA = {
    "vehicle_id": "vehicle_id",
    "time_s": "time_s",
    "lane": "lane",
    "x": "x",
    "speed": "speed",
    "space_headway": "space_headway",
}
SCHEMAS = {"ngsim": NGSIM_SCHEMA, "plain": PLAIN_SCHEMA}


class TrackPoint(NamedTuple):
    time: float
    x: float
    lane: int
    speed: float
    space_headway: float | None


@dataclass
class VehicleTrack:
    """One contiguous presence of a vehicle, sampled at fixed resolution."""

    vehicle_id: str
    time: np.ndarray
    x: np.ndarray
    lane: np.ndarray
    speed: np.ndarray
    headway: np.ndarray | None = None  # +inf = no preceding vehicle

    @property
    def entry_time(self) -> float:
        return float(self.time[0])

    @property
    def exit_time(self) -> float:
        return float(self.time[-1])

    @property
    def n_points(self) -> int:
        return len(self.time)

    def point(self, i: int) -> TrackPoint:
        hw = None if self.headway is None else float(self.headway[i])
        return TrackPoint(
            float(self.time[i]), float(self.x[i]), int(self.lane[i]), float(self.speed[i]), hw
        )


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of the study region into |H| x |S| cells per lane."""

    t_len: float
    x_len: float
    n_h: int
    n_s: int
    lanes: tuple[int, ...]
    lane_width: float = 3.7

    def __post_init__(self):
        if self.t_len <= 0 or self.x_len <= 0 or self.n_h < 1 or self.n_s < 1:
            raise ConfigError("grid extents and cell counts must be positive")

    @property
    def dt(self) -> float:
        return self.t_len / self.n_h

    @property
    def dx(self) -> float:
        return self.x_len / self.n_s

    def cell_of(self, t: float, x: float) -> tuple[int, int]:
        return cell_of(self, t, x)


def cell_of(grid: Grid, t: float, x: float) -> tuple[int, int]:
    """Map a (t, x) point to its (h, s) cell; boundary points clamp inward."""
    if not (0.0 <= t <= grid.t_len):
        raise BoundsError(f"t={t} outside [0, {grid.t_len}]")
    if not (0.0 <= x <= grid.x_len):
        raise BoundsError(f"x={x} outside [0, {grid.x_len}]")
    h = min(int(t / grid.dt), grid.n_h - 1)
    s = min(int(x / grid.dx), grid.n_s - 1)
    return h, s


@dataclass
class TrackSet:
    """All tracks of a study period plus the grid they are evaluated on."""

    tracks: list[VehicleTrack]
    grid: Grid
    dt_data: float = 0.1
    units: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.tracks)

    def __len__(self):
        return len(self.tracks)

    def track_by_id(self, vehicle_id: str) -> VehicleTrack:
        for tr in self.tracks:
            if tr.vehicle_id == vehicle_id:
                return tr
        raise KeyError(vehicle_id)


class FrameIndex:
    """All track points bucketed by (frame, lane) and sorted by position.

    Shared by headway derivation and the fleet simulator; frame = round(t / dt_data).
    """

    def __init__(self, ts: TrackSet):
        lanes = ts.grid.lanes
        self.lane_pos = {lane: i for i, lane in enumerate(lanes)}
        n_lanes = len(lanes)
        frames, lane_ps, xs, speeds, track_rows, point_rows = [], [], [], [], [], []
        for ti, tr in enumerate(ts.tracks):
            f = np.rint(tr.time / ts.dt_data).astype(np.int64)
            frames.append(f)
            lane_ps.append(np.array([self.lane_pos[int(l)] for l in tr.lane], dtype=np.int64))
            xs.append(tr.x)
            speeds.append(tr.speed)
            track_rows.append(np.full(len(f), ti, dtype=np.int64))
            point_rows.append(np.arange(len(f), dtype=np.int64))
        if frames:
            frame = np.concatenate(frames)
            lane_p = np.concatenate(lane_ps)
            x = np.concatenate(xs)
            speed = np.concatenate(speeds)
            track_row = np.concatenate(track_rows)
            point_row = np.concatenate(point_rows)
        else:
            frame = lane_p = track_row = point_row = np.empty(0, dtype=np.int64)
            x = speed = np.empty(0)
        key = frame * n_lanes + lane_p
        order = np.lexsort((x, key))
        self.key = key[order]
        self.frame = frame[order]
        self.lane_p = lane_p[order]
        self.x = x[order]
        self.speed = speed[order]
        self.track_row = track_row[order]
        self.point_row = point_row[order]
        self.n_lanes = n_lanes

    def group(self, frame: int, lane: int) -> slice:
        """Index slice of points on `lane` at `frame`, sorted by x."""
        pos = self.lane_pos.get(lane)
        if pos is None:
            return slice(0, 0)
        k = frame * self.n_lanes + pos
        lo = np.searchsorted(self.key, k, side="left")
        hi = np.searchsorted(self.key, k, side="right")
        return slice(int(lo), int(hi))


def _central_diff_speed(x: np.ndarray, dt: float) -> np.ndarray:
    n = len(x)
    v = np.empty(n)
    if n == 1:
        v[0] = 0.0
        return v
    v[1:-1] = (x[2:] - x[:-2]) / (2.0 * dt)
    v[0] = (x[1] - x[0]) / dt
    v[-1] = (x[-1] - x[-2]) / dt
    return np.maximum(v, 0.0)


def _split_contiguous(time: np.ndarray, dt_data: float) -> list[np.ndarray]:
    """Index runs of consecutive samples (gap == dt_data within tolerance)."""
    if len(time) == 0:
        return []
    gaps = np.diff(time)
    breaks = np.nonzero(gaps > dt_data * 1.5)[0] + 1
    pieces = np.split(np.arange(len(time)), breaks)
    return [p for p in pieces if len(p) > 0]


def parse_trajectories(
    path,
    schema="plain",
    unit_mode: str = "metric",
    grid: Grid | None = None,
    n_h: int = 90,
    n_s: int = 60,
    lane_width: float = 3.7,
    dt_data: float | None = None,
) -> TrackSet:
    """Read a trajectory CSV into a TrackSet.

    `schema` is "plain", "ngsim", or a canonical-name -> column-name mapping.
    Required canonical columns: vehicle_id, time_s or frame_id, lane, x.
    With unit_mode="feet", x / speed / space_headway are converted to SI.
    When `grid` is omitted, one is built from the data extent with the given
    cell counts. Tracks are clipped to [0, x_len]; a clipped-out or absent
    stretch splits the vehicle into separate tracks.
    """
    if isinstance(schema, str):
        try:
            schema = SCHEMAS[schema]
        except KeyError:
            raise SchemaError(f"unknown schema name: {schema!r}") from None
    df = pd.read_csv(path)

    for canon in ("vehicle_id", "lane", "x"):
        col = schema.get(canon, canon)
        if col not in df.columns:
            raise SchemaError(f"missing required column: {canon} (expected {col!r})")
    time_col = schema.get("time_s")
    frame_col = schema.get("frame_id")
    if time_col in df.columns:
        time = df[time_col].to_numpy(dtype=float)
    elif frame_col in df.columns:
        time = df[frame_col].to_numpy(dtype=float) * 0.1
    else:
        raise SchemaError("missing required column: time_s or frame_id")

    scale = FEET_TO_M if unit_mode == "feet" else 1.0
    x = df[schema.get("x", "x")].to_numpy(dtype=float) * scale
    lane = df[schema.get("lane", "lane")].to_numpy(dtype=np.int64)
    vid = df[schema.get("vehicle_id", "vehicle_id")].astype(str).to_numpy()

    speed_col = schema.get("speed")
    speed = None
    if speed_col is not None and speed_col in df.columns:
        speed = df[speed_col].to_numpy(dtype=float) * scale
    hw_col = schema.get("space_headway")
    headway = None
    if hw_col is not None and hw_col in df.columns:
        headway = df[hw_col].to_numpy(dtype=float) * scale
        headway = np.where(np.isnan(headway) | (headway <= 0), np.inf, headway)

    t_offset = float(np.min(time)) if len(time) else 0.0
    time = time - t_offset

    units = {
        "unit_mode": unit_mode,
        "time_offset_s": t_offset,
        "x_scale": scale,
        "clipped_points": 0,
        "negative_speeds_clamped": 0,
    }

    if grid is None:
        x_len = float(np.max(x)) if len(x) else 1.0
        t_len = float(np.max(time)) if len(time) else 1.0
        lanes = tuple(sorted(int(l) for l in np.unique(lane)))
        grid = Grid(t_len=t_len, x_len=x_len, n_h=n_h, n_s=n_s, lanes=lanes, lane_width=lane_width)

    if dt_data is None:
        dt_candidates = []
        for _, g in pd.DataFrame({"vid": vid, "t": time}).groupby("vid", sort=False):
            tv = g["t"].to_numpy()
            if len(tv) > 1:
                dt_candidates.append(np.median(np.diff(np.sort(tv))))
        dt_data = float(np.median(dt_candidates)) if dt_candidates else 0.1

    tracks: list[VehicleTrack] = []
    order = pd.DataFrame({"vid": vid}).groupby("vid", sort=False).indices
    for v, idx in order.items():
        tt = time[idx]
        if np.any(np.diff(tt) <= 0):
            raise DataError(f"non-monotone time for vehicle {v}")
        keep = (x[idx] >= 0.0) & (x[idx] <= grid.x_len)
        units["clipped_points"] += int(np.sum(~keep))
        idx = idx[keep]
        if len(idx) == 0:
            continue
        pieces = _split_contiguous(time[idx], dt_data)
        for pi, piece in enumerate(pieces):
            rows = idx[piece]
            if np.any(np.abs(np.diff(time[rows]) - dt_data) > 1e-6):
                raise DataError(f"non-uniform sampling for vehicle {v}")
            tr_x = x[rows]
            if speed is not None:
                tr_v = speed[rows]
                neg = tr_v < 0
                units["negative_speeds_clamped"] += int(np.sum(neg))
                tr_v = np.maximum(tr_v, 0.0)
            else:
                tr_v = _central_diff_speed(tr_x, dt_data)
            tr_hw = headway[rows].copy() if headway is not None else None
            track_id = str(v) if pi == 0 else f"{v}:{pi}"
            tracks.append(
                VehicleTrack(
                    vehicle_id=track_id,
                    time=time[rows].copy(),
                    x=tr_x.copy(),
                    lane=lane[rows].copy(),
                    speed=tr_v,
                    headway=tr_hw,
                )
            )
    return TrackSet(tracks=tracks, grid=grid, dt_data=dt_data, units=units)


def write_trajectories(ts: TrackSet, path) -> None:
    """Serialize a TrackSet to CSV in the plain schema (round-trip safe)."""
    cols = {"vehicle_id": [], "time_s": [], "lane": [], "x": [], "speed": [], "space_headway": []}
    for tr in ts.tracks:
        n = tr.n_points
        cols["vehicle_id"].extend([tr.vehicle_id] * n)
        cols["time_s"].extend(tr.time.tolist())
        cols["lane"].extend(int(l) for l in tr.lane)
        cols["x"].extend(tr.x.tolist())
        cols["speed"].extend(tr.speed.tolist())
        if tr.headway is None:
            cols["space_headway"].extend([""] * n)
        else:
            cols["space_headway"].extend(
                "" if not math.isfinite(h) else repr(float(h)) for h in tr.headway
            )
    df = pd.DataFrame(cols)
    df.to_csv(path, index=False, float_format=None)


def derive_headways(ts: TrackSet) -> TrackSet:
    """Recompute space headways from positions (idempotent).

    Headway of a point = distance to the nearest vehicle ahead on the same
    lane at the same timestamp; lane leaders get +inf and contribute no
    headway band downstream.
    """
    idx = FrameIndex(ts)
    per_track = [np.full(tr.n_points, np.inf) for tr in ts.tracks]
    key = idx.key
    n = len(key)
    if n:
        same_next = np.empty(n, dtype=bool)
        same_next[:-1] = key[:-1] == key[1:]
        same_next[-1] = False
        gaps = np.full(n, np.inf)
        gaps[same_next] = idx.x[1:][same_next[:-1]] - idx.x[:-1][same_next[:-1]]
        for i in range(n):
            per_track[idx.track_row[i]][idx.point_row[i]] = gaps[i]
    new_tracks = [replace(tr, headway=hw) for tr, hw in zip(ts.tracks, per_track)]
    return TrackSet(tracks=new_tracks, grid=ts.grid, dt_data=ts.dt_data, units=dict(ts.units))


DEFAULT_SCENARIO = {
    "lanes": 1,
    "vehicles_per_lane": 30,
    "free_speed": 10.0,
    "entry_spacing": 20.0,
    "headway_jitter": 0.0,
    "road_length": 600.0,
    "duration": 120.0,
    "dt": 0.1,
    "n_h": 90,
    "n_s": 60,
    "lane_width": 3.7,
}


def synth_platoon(cfg: dict, seed: int = 0) -> TrackSet:
    """Generate a kinematically consistent platoon scenario.

    Followers run a simplified car-following rule: each trajectory is the
    minimum of its own free-flow curve and its leader's curve shifted by the
    entry time gap, so uniform configs produce exact time-shifted copies.
    ``cfg["slowdown"]`` = {start_s, duration_s, speed, x_start, x_end}
    imposes a reduced-speed region; the queue it causes propagates through
    the shift rule. Deterministic for a fixed seed.
    """
    c = dict(DEFAULT_SCENARIO)
    c.update(cfg or {})
    n_lanes = int(c["lanes"])
    n_veh = int(c["vehicles_per_lane"])
    v_free = float(c["free_speed"])
    dt = float(c["dt"])
    road = float(c["road_length"])
    duration = float(c["duration"])
    jitter = float(c["headway_jitter"])

    if "entry_headway_s" in c:
        base_tau = float(c["entry_headway_s"])
    else:
        if v_free <= 0:
            raise ConfigError("free_speed must be positive")
        base_tau = float(c["entry_spacing"]) / v_free
    if base_tau <= 0 or v_free <= 0:
        raise ConfigError("entry spacing implies non-positive headway")
    if jitter >= 1.0:
        raise ConfigError("headway_jitter must be < 1")

    slow = c.get("slowdown")
    if slow:
        sl_t0 = float(slow["start_s"])
        sl_t1 = sl_t0 + float(slow["duration_s"])
        sl_v = float(slow["speed"])
        sl_x0 = float(slow["x_start"])
        sl_x1 = float(slow["x_end"])
        if sl_v <= 0:
            raise ConfigError("slowdown speed must be positive")

    def field_speed(t, x):
        if slow and sl_t0 <= t <= sl_t1 and sl_x0 <= x <= sl_x1:
            return sl_v
        return v_free

    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0xA55E)))
    n_steps = int(round(duration / dt))
    tracks: list[VehicleTrack] = []
    for li in range(n_lanes):
        lane_id = li + 1
        prev_path = None  # full-horizon positions from t=0, np.nan before entry
        prev_entry_step = 0
        for vi in range(n_veh):
            if vi == 0:
                entry_step = 0 if li == 0 else int(round(rng.uniform(0, base_tau) / dt))
                tau_steps = 0
            else:
                tau = base_tau * (1.0 + rng.uniform(-jitter, jitter))
                tau_steps = max(1, int(round(tau / dt)))
                entry_step = prev_entry_step + tau_steps
            if v_free * (tau_steps * dt) <= 0 and vi > 0:
                raise ConfigError("non-positive entry spacing")
            path = np.full(n_steps + 1, np.nan)
            pos = 0.0
            path[entry_step] = 0.0
            for k in range(entry_step, n_steps):
                pos = pos + field_speed(k * dt, pos) * dt
                own = pos
                if prev_path is not None and k + 1 - tau_steps >= 0:
                    lead = prev_path[k + 1 - tau_steps]
                    if not np.isnan(lead) and lead < own:
                        own = lead
                pos = own
                if pos > road:
                    break
                path[k + 1] = pos
            valid = np.nonzero(~np.isnan(path))[0]
            if len(valid) == 0:
                continue
            k0, k1 = valid[0], valid[-1]
            ttime = np.arange(k0, k1 + 1) * dt
            xx = path[k0 : k1 + 1]
            tracks.append(
                VehicleTrack(
                    vehicle_id=f"{lane_id}-{vi}",
                    time=ttime,
                    x=xx,
                    lane=np.full(len(xx), lane_id, dtype=np.int64),
                    speed=_central_diff_speed(xx, dt),
                )
            )
            prev_path = path
            prev_entry_step = entry_step

    grid = Grid(
        t_len=duration,
        x_len=road,
        n_h=int(c["n_h"]),
        n_s=int(c["n_s"]),
        lanes=tuple(range(1, n_lanes + 1)),
        lane_width=float(c["lane_width"]),
    )
    units = {"unit_mode": "metric", "source": "synthetic", "seed": int(seed)}
    return TrackSet(tracks=tracks, grid=grid, dt_data=dt, units=units)
