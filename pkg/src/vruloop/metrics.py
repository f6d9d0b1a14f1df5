"""Stability metrics over logged sensing runs.

Three families of measurements, computed per run and compared across
the rw/cp domain pair:

* detection reliability: counts of missed frames (subject visible but
  not detected) and of frames reporting extra people;
* relative distance stability: the hip-to-vehicle distance series is
  smoothed (moving mean, then a cubic smoothing spline) and the
  absolute raw-minus-smooth deviation is aggregated per 1 m distance
  bin over the 5..24 m band;
* joint stability: temporal standard deviation of each joint's
  distance to the hip anchor, computed on the residual after the same
  smoothing treatment (a raw mode without smoothing exists for oracle
  tests).

All functions are pure; logs are never mutated.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.linalg import solveh_banded

from .perception import TRUE_VRU
from .skeleton import Joint, joint_distance_to_anchor

if TYPE_CHECKING:
    from .harness import FrameRecord, RunLog

RW_DENOM = "rw"
CP_DENOM = "cp"

DIST_BIN_MIN_M = 5.0
DIST_BIN_MAX_M = 24.0

DEFAULT_WINDOW = 11
DEFAULT_STIFFNESS = 1.0
DEFAULT_BIN_WIDTH_M = 1.0

# Joints whose stability is tabulated in the rw/cp comparison: hands,
# ankles, shoulders. Ankles are the lowest reliably tracked leg joints.
COMPARISON_JOINTS = (
    int(Joint.LEFT_HAND),
    int(Joint.RIGHT_HAND),
    int(Joint.LEFT_ANKLE),
    int(Joint.RIGHT_ANKLE),
    int(Joint.LEFT_SHOULDER),
    int(Joint.RIGHT_SHOULDER),
)


def moving_mean(series: Sequence[float], window: int) -> np.ndarray:
    """Centered moving average with shrunken symmetric edge windows.

    Near the edges the window shrinks symmetrically so the output stays
    centered and the same length as the input.
    """
    y = np.asarray(series, dtype=float)
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd count >= 1")
    if window > len(y):
        raise ValueError("window exceeds series length")
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(y)])
    out = np.empty_like(y)
    for i in range(len(y)):
        k = min(half, i, len(y) - 1 - i)
        out[i] = (csum[i + k + 1] - csum[i - k]) / (2 * k + 1)
    return out


def spline_smooth(
    t: Sequence[float], series: Sequence[float], stiffness: float = DEFAULT_STIFFNESS
) -> np.ndarray:
    """Natural cubic smoothing spline evaluated at the sample times.

    Minimizes sum((y_i - f(t_i))^2) + stiffness * integral(f'')^2 over
    natural cubic splines f, solved in the standard banded form: with
    second-divided-difference matrix Q and curvature Gram matrix R,
    solve (R + stiffness * Q^T Q) gamma = Q^T y and evaluate
    f = y - stiffness * Q gamma.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(series, dtype=float)
    if len(y) < 4:
        raise ValueError("need at least 4 samples to smooth")
    if t.shape != y.shape:
        raise ValueError("time and value series must have equal length")
    if stiffness < 0.0:
        raise ValueError("stiffness must be >= 0")
    h = np.diff(t)
    if np.any(h <= 0.0):
        raise ValueError("timestamps must be strictly increasing")
    if stiffness == 0.0:
        return y.copy()

    n = len(y)
    q0 = 1.0 / h[:-1]
    q2 = 1.0 / h[1:]
    q1 = -(q0 + q2)

    # A = R + stiffness * Q^T Q, symmetric pentadiagonal, in the upper
    # banded layout solveh_banded expects.
    diag = (h[:-1] + h[1:]) / 3.0 + stiffness * (q0 * q0 + q1 * q1 + q2 * q2)
    off1 = h[1:-1] / 6.0 + stiffness * (q1[:-1] * q0[1:] + q2[:-1] * q1[1:])
    off2 = stiffness * q2[:-2] * q0[2:]
    ab = np.zeros((3, n - 2))
    ab[2] = diag
    ab[1, 1:] = off1
    ab[0, 2:] = off2

    rhs = q0 * y[:-2] + q1 * y[1:-1] + q2 * y[2:]
    gamma = solveh_banded(ab, rhs)

    correction = np.zeros(n)
    correction[:-2] += q0 * gamma
    correction[1:-1] += q1 * gamma
    correction[2:] += q2 * gamma
    return y - stiffness * correction


def local_variability(raw: Sequence[float], smoothed: Sequence[float]) -> np.ndarray:
    """Elementwise absolute deviation between a raw series and its
    smoothed version."""
    a = np.asarray(raw, dtype=float)
    b = np.asarray(smoothed, dtype=float)
    if a.shape != b.shape:
        raise ValueError("raw and smoothed series must have equal length")
    return np.abs(a - b)


def smooth_series(
    t: np.ndarray,
    y: np.ndarray,
    window: int = DEFAULT_WINDOW,
    stiffness: float = DEFAULT_STIFFNESS,
) -> np.ndarray:
    """The shared two-stage treatment: moving mean, then spline."""
    return spline_smooth(t, moving_mean(y, window), stiffness)


@dataclass(frozen=True)
class DistanceBin:
    """Variability aggregated over one distance band."""

    lower_m: float
    upper_m: float
    max_dev_m: float
    p95_dev_m: float
    samples: int

    def to_dict(self) -> dict:
        return {
            "lower_m": self.lower_m,
            "upper_m": self.upper_m,
            "max_dev_m": self.max_dev_m,
            "p95_dev_m": self.p95_dev_m,
            "samples": self.samples,
        }


@dataclass(frozen=True)
class StabilityReport:
    no_detects: int
    false_detects: int
    distance_variability: tuple[DistanceBin, ...]
    joint_sd: dict[int, float]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.no_detects < 0 or self.false_detects < 0:
            raise ValueError("detect counts must be >= 0")
        if any(sd < 0.0 for sd in self.joint_sd.values()):
            raise ValueError("joint SDs must be >= 0")

    def bin_at(self, distance_m: float) -> DistanceBin | None:
        """The occupied bin whose band contains the given distance."""
        for b in self.distance_variability:
            if b.lower_m <= distance_m < b.upper_m:
                return b
        return None

    def to_dict(self) -> dict:
        return {
            "no_detects": self.no_detects,
            "false_detects": self.false_detects,
            "distance_variability": [b.to_dict() for b in self.distance_variability],
            "joint_sd": {str(j): sd for j, sd in self.joint_sd.items()},
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StabilityReport":
        return cls(
            no_detects=data["no_detects"],
            false_detects=data["false_detects"],
            distance_variability=tuple(
                DistanceBin(**b) for b in data["distance_variability"]
            ),
            joint_sd={int(j): sd for j, sd in data["joint_sd"].items()},
            metadata=dict(data["metadata"]),
        )


@dataclass(frozen=True)
class ComparisonRow:
    joint: int
    perspective: str
    sd_rw: float
    sd_cp: float
    relative_error_pct: float


@dataclass(frozen=True)
class ComparisonTable:
    vru: str
    perspective: str
    denominator: str
    rows: tuple[ComparisonRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["joint", "perspective", "sd_rw_m", "sd_cp_m", "re_pct"])
        for r in self.rows:
            writer.writerow(
                [r.joint, r.perspective, repr(r.sd_rw), repr(r.sd_cp), repr(r.relative_error_pct)]
            )
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [
            f"{self.vru} / perspective {self.perspective} "
            f"(denominator: {self.denominator})",
            f"{'joint':>5} {'sd_rw':>10} {'sd_cp':>10} {'re_pct':>8}",
        ]
        for r in self.rows:
            lines.append(
                f"{r.joint:>5} {r.sd_rw:>10.4f} {r.sd_cp:>10.4f} "
                f"{r.relative_error_pct:>8.1f}"
            )
        return "\n".join(lines) + "\n"


def _true_detection(record: "FrameRecord"):
    for det in record.detections:
        if det.source == TRUE_VRU:
            return det
    return None


def count_no_detects(log: "RunLog") -> int:
    """Frames where the subject was visible but no true detection was
    reported."""
    count = 0
    for record in log.frames:
        if record.visible is None:
            raise ValueError("log lacks ground-truth visibility flags")
        if record.visible and _true_detection(record) is None:
            count += 1
    return count


def count_false_detects(log: "RunLog") -> int:
    """Frames reporting more than one person."""
    return sum(1 for record in log.frames if len(record.detections) > 1)


def hip_distance_series(log: "RunLog") -> tuple[np.ndarray, np.ndarray]:
    """Timestamps and estimated planar hip distance, over the frames
    with a true detection."""
    ts, ds = [], []
    for record in log.frames:
        det = _true_detection(record)
        if det is None:
            continue
        hip = det.skeleton.joints[int(Joint.PELVIS)]
        ts.append(record.t)
        ds.append(math.hypot(float(hip[0]), float(hip[1])))
    return np.asarray(ts), np.asarray(ds)


def anchor_distance_series(log: "RunLog", joint: int) -> tuple[np.ndarray, np.ndarray]:
    """Timestamps and the joint's distance to the hip anchor, over the
    frames with a true detection."""
    ts, ds = [], []
    for record in log.frames:
        det = _true_detection(record)
        if det is None:
            continue
        ts.append(record.t)
        ds.append(joint_distance_to_anchor(det.skeleton, joint))
    return np.asarray(ts), np.asarray(ds)


def distance_stability(
    log: "RunLog",
    bin_width: float = DEFAULT_BIN_WIDTH_M,
    window: int = DEFAULT_WINDOW,
    stiffness: float = DEFAULT_STIFFNESS,
) -> tuple[DistanceBin, ...]:
    """Per-distance-bin local variability of the hip distance series.

    The raw series is smoothed, deviations |raw - smooth| are assigned
    to 1 m (by default) bins of the smoothed distance over the
    5..24 m band, and each occupied bin reports its maximum and 95th
    percentile. Empty bins are omitted.
    """
    if bin_width <= 0.0:
        raise ValueError("bin_width must be positive")
    t, raw = hip_distance_series(log)
    if len(raw) < 4:
        raise ValueError("too few detected frames for distance stability")
    smooth = smooth_series(t, raw, window, stiffness)
    dev = local_variability(raw, smooth)

    n_bins = int(math.ceil((DIST_BIN_MAX_M - DIST_BIN_MIN_M) / bin_width - 1e-9))
    grouped: dict[int, list[float]] = {}
    for s, d in zip(smooth, dev):
        idx = int(math.floor((s - DIST_BIN_MIN_M) / bin_width))
        if 0 <= idx < n_bins:
            grouped.setdefault(idx, []).append(d)

    bins = []
    for idx in sorted(grouped):
        devs = np.asarray(grouped[idx])
        bins.append(
            DistanceBin(
                lower_m=DIST_BIN_MIN_M + idx * bin_width,
                upper_m=DIST_BIN_MIN_M + (idx + 1) * bin_width,
                max_dev_m=float(devs.max()),
                p95_dev_m=float(np.percentile(devs, 95.0)),
                samples=len(devs),
            )
        )
    return tuple(bins)


def joint_stability_sd(
    log: "RunLog",
    joint: int,
    mode: str = "residual",
    window: int = DEFAULT_WINDOW,
    stiffness: float = DEFAULT_STIFFNESS,
) -> float:
    """Temporal standard deviation of a joint's anchor distance.

    In the default "residual" mode the series first gets the shared
    smoothing treatment and the SD is taken over raw minus smooth,
    so slow range changes do not count as instability. The "raw" mode
    takes the SD of the bare series (used by oracle tests). Sample
    (n-1) estimator in both modes.
    """
    if mode not in ("residual", "raw"):
        raise ValueError("mode must be 'residual' or 'raw'")
    t, series = anchor_distance_series(log, joint)
    if len(series) < 2:
        raise ValueError("need at least 2 detected frames")
    if mode == "raw":
        return float(np.std(series, ddof=1))
    residual = series - smooth_series(t, series, window, stiffness)
    return float(np.std(residual, ddof=1))


def relative_error(sd_rw: float, sd_cp: float, denominator: str = RW_DENOM) -> float:
    """Percent disagreement between paired stability values.

    |sd_rw - sd_cp| over the chosen domain's value. Both denominator
    conventions are supported because published comparisons are
    ambiguous about which side normalizes.
    """
    if denominator not in (RW_DENOM, CP_DENOM):
        raise ValueError("denominator must be 'rw' or 'cp'")
    denom = sd_rw if denominator == RW_DENOM else sd_cp
    if denom == 0.0:
        raise ValueError("denominator stability value is zero")
    return abs(sd_rw - sd_cp) / denom * 100.0


def build_comparison(
    rw: StabilityReport,
    cp: StabilityReport,
    denominator: str = RW_DENOM,
    joints: Sequence[int] = COMPARISON_JOINTS,
) -> ComparisonTable:
    """Tabulate joint stability side by side for one rw/cp twin pair."""
    if rw.metadata.get("domain") != "rw" or cp.metadata.get("domain") != "cp":
        raise ValueError("reports must come from the rw and cp domains respectively")
    for key in ("vru", "perspective"):
        if rw.metadata.get(key) != cp.metadata.get(key):
            raise ValueError(
                f"mismatched scenarios: {key} differs "
                f"({rw.metadata.get(key)!r} vs {cp.metadata.get(key)!r})"
            )
    perspective = rw.metadata.get("perspective", "?")
    rows = []
    for j in joints:
        if j not in rw.joint_sd or j not in cp.joint_sd:
            raise ValueError(f"joint {j} missing from a report")
        rows.append(
            ComparisonRow(
                joint=j,
                perspective=perspective,
                sd_rw=rw.joint_sd[j],
                sd_cp=cp.joint_sd[j],
                relative_error_pct=relative_error(
                    rw.joint_sd[j], cp.joint_sd[j], denominator
                ),
            )
        )
    return ComparisonTable(
        vru=rw.metadata.get("vru", "?"),
        perspective=perspective,
        denominator=denominator,
        rows=tuple(rows),
    )


def analyze_log(
    log: "RunLog",
    bin_width: float = DEFAULT_BIN_WIDTH_M,
    window: int = DEFAULT_WINDOW,
    stiffness: float = DEFAULT_STIFFNESS,
    sd_mode: str = "residual",
) -> StabilityReport:
    """Full stability report for one run."""
    joint_sd = {
        j: joint_stability_sd(log, j, sd_mode, window, stiffness)
        for j in range(1, 24)
    }
    return StabilityReport(
        no_detects=count_no_detects(log),
        false_detects=count_false_detects(log),
        distance_variability=distance_stability(log, bin_width, window, stiffness),
        joint_sd=joint_sd,
        metadata={
            **log.metadata,
            "bin_width": bin_width,
            "window": window,
            "stiffness": stiffness,
            "sd_mode": sd_mode,
        },
    )
