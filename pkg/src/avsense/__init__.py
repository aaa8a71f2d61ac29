"""avsense: lane-level traffic state estimation from AV fleet sensing.

Pipeline stages: trajectory ingestion -> ground truth (generalized
flow/density/speed over a time-space grid) -> simulated AV detections ->
data-center aggregation -> matrix completion / regression estimation ->
error metrics.
"""

__version__ = "0.1.0"

from .trajectory import Grid, TrackSet, VehicleTrack, cell_of

__all__ = ["Grid", "TrackSet", "VehicleTrack", "cell_of", "__version__"]
