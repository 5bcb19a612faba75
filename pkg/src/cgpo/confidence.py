"""Confidence-trace analytics: threshold calibration and step segmentation.

A "step" here is non-human-like: step boundaries are the tokens whose
sampling-time confidence falls strictly below a threshold drawn from the
dataset-wide confidence distribution, not readable anchors like newlines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .errors import EmptyCalibrationSet


@dataclass(frozen=True)
class Thresholds:
    """Split/stop thresholds plus the quantiles and pool size behind them.

    q_split delimits steps when locating the branch point; q_stop terminates
    branch rollouts. Both default to the same quantile but are independently
    configurable because the stopping threshold is swept in analysis runs.
    """

    q_split: float
    q_stop: float
    tau_split: float
    tau_stop: float
    calibration_size: int

    def to_json(self, model_id: str = "") -> str:
        d = asdict(self)
        d["model_id"] = model_id
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Thresholds":
        d = json.loads(text)
        return cls(q_split=d["q_split"], q_stop=d["q_stop"],
                   tau_split=d["tau_split"], tau_stop=d["tau_stop"],
                   calibration_size=d["calibration_size"])


def calibrate_threshold(all_confidences, q: float) -> float:
    """Lower empirical quantile: ascending-sort element at floor(q*(N-1)).

    No interpolation, so the returned threshold is always a member of the
    calibration multiset and |{c < tau}| <= q*N.
    """

    values = np.asarray(all_confidences, dtype=np.float64)
    if values.size == 0:
        raise EmptyCalibrationSet("calibration multiset is empty")
    if not (0.0 < q < 1.0):
        raise ValueError(f"quantile must lie in (0, 1), got {q}")
    order = np.sort(values)
    return float(order[int(np.floor(q * (values.size - 1)))])


def calibrate(all_confidences, q_split: float, q_stop: float) -> Thresholds:
    values = np.asarray(all_confidences, dtype=np.float64)
    return Thresholds(
        q_split=q_split,
        q_stop=q_stop,
        tau_split=calibrate_threshold(values, q_split),
        tau_stop=calibrate_threshold(values, q_stop),
        calibration_size=int(values.size),
    )


def segment_steps(trace, tau: float) -> list[int]:
    """Step-start indices: 0 plus every t with confidence strictly below tau."""

    values = np.asarray(trace, dtype=np.float64)
    if values.size == 0:
        raise ValueError("confidence trace is empty")
    starts = np.flatnonzero(values < tau).tolist()
    if not starts or starts[0] != 0:
        starts = [0] + starts
    return starts


def min_confidence_index(trace) -> int:
    """Earliest index attaining the global minimum confidence."""

    values = np.asarray(trace, dtype=np.float64)
    if values.size == 0:
        raise ValueError("confidence trace is empty")
    return int(np.argmin(values))
