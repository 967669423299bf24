"""Frame-wise visual features and their per-movie aggregation.

Each sampled frame yields 52 features laid out as:

    0-7   R histogram          32-36  RGB-ratio histogram
    8-15  G histogram          37-44  saturation histogram
    16-23 B histogram          45     mean absolute gray difference
    24-31 gray-value histogram 46     face count
    46-47 faces                47     mean face-box area ratio
    48    PTPT confidence      49     mean flow magnitude
    50    std of flow magnitudes     51  enclosing shot length (s)

A movie is the 208-vector of four statistics (mean, std, std/mean, mean of
the top 10%) per feature, feature-major.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .flow import FlowField, flow_features, grid_points, lucas_kanade

N_FRAME_FEATURES = 52

R_HIST = slice(0, 8)
G_HIST = slice(8, 16)
B_HIST = slice(16, 24)
V_HIST = slice(24, 32)
RATIO_HIST = slice(32, 37)
S_HIST = slice(37, 45)
GRAY_DIFF = 45
N_FACES = 46
PER_FACES = 47
PTPT = 48
FLOW_MEAN = 49
FLOW_STD = 50
SHOT_LENGTH = 51


class UnreadableImageError(ValueError):
    """Image bytes could not be decoded."""


class DimensionMismatchError(ValueError):
    """Two frames that must share dimensions do not."""


@dataclass
class Frame:
    rgb: np.ndarray          # (h, w, 3) uint8
    timestamp_s: float = 0.0

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def height(self) -> int:
        return self.rgb.shape[0]


# --------------------------------------------------------------------------
# PNM (P6) I/O and preprocessing
# --------------------------------------------------------------------------

def read_ppm(path: str | Path) -> np.ndarray:
    """Read a binary P6 PPM with maxval 255 into an (h, w, 3) uint8 array."""
    data = Path(path).read_bytes()
    try:
        if not data.startswith(b"P6"):
            raise ValueError("not a P6 PPM")
        fields: list[int] = []
        pos = 2
        while len(fields) < 3:
            while pos < len(data) and data[pos : pos + 1].isspace():
                pos += 1
            if data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos] != 0x0A:
                    pos += 1
                continue
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            fields.append(int(data[start:pos]))
        pos += 1  # single whitespace after maxval
        width, height, maxval = fields
        if maxval != 255:
            raise ValueError(f"unsupported maxval {maxval}")
        pixels = np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=pos)
        return pixels.reshape(height, width, 3).copy()
    except (ValueError, IndexError) as exc:
        raise UnreadableImageError(f"cannot decode {path}: {exc}") from exc


def write_ppm(path: str | Path, rgb: np.ndarray) -> None:
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())


def resize_bilinear(rgb: np.ndarray, out_width: int, out_height: int) -> np.ndarray:
    h, w = rgb.shape[:2]
    xs = np.clip((np.arange(out_width) + 0.5) * (w / out_width) - 0.5, 0, w - 1)
    ys = np.clip((np.arange(out_height) + 0.5) * (h / out_height) - 0.5, 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(np.int64), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(ys).astype(np.int64), 0, max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[None, :, None]
    fy = (ys - y0)[:, None, None]
    img = rgb.astype(np.float64)
    top = img[np.ix_(y0, x0)] * (1 - fx) + img[np.ix_(y0, x1)] * fx
    bottom = img[np.ix_(y1, x0)] * (1 - fx) + img[np.ix_(y1, x1)] * fx
    out = top * (1 - fy) + bottom * fy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def preprocess(rgb: np.ndarray, target_width: int = 500, timestamp_s: float = 0.0) -> Frame:
    """Resize to the target width, preserving aspect ratio."""
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[1] < 1:
        raise UnreadableImageError(f"expected (h, w, 3) image, got shape {rgb.shape}")
    h, w = rgb.shape[:2]
    if w == target_width:
        return Frame(rgb.astype(np.uint8), timestamp_s)
    out_h = max(1, round(h * target_width / w))
    return Frame(resize_bilinear(rgb, target_width, out_h), timestamp_s)


# --------------------------------------------------------------------------
# Per-frame features
# --------------------------------------------------------------------------

def gray_values(rgb: np.ndarray) -> np.ndarray:
    """Rounded luma: round(0.299 R + 0.587 G + 0.114 B) as uint8."""
    values = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


def gray_float(rgb: np.ndarray) -> np.ndarray:
    """Unrounded luma for sub-pixel work (optical flow)."""
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def color_features(frame: Frame, ratio_range: tuple[float, float] = (1.0, 3.0)) -> np.ndarray:
    """Indices 0-44: color and illumination histograms.

    R/G/B and gray-value histograms use 8 uniform bins over [0, 256); the
    RGB-ratio (max/mean per pixel, zero-mean pixels skipped) is clamped to
    ratio_range and binned into 5; saturation (max-min)/max into 8 bins over
    [0, 1].  All groups are normalized by the frame's pixel count, so the
    ratio histogram mass equals the fraction of non-black pixels.
    """
    rgb = frame.rgb
    n_pixels = rgb.shape[0] * rgb.shape[1]
    out = np.zeros(45)

    for sl, channel in ((R_HIST, 0), (G_HIST, 1), (B_HIST, 2)):
        out[sl] = np.bincount(rgb[..., channel].ravel() >> 5, minlength=8) / n_pixels

    gray = gray_values(rgb)
    out[V_HIST] = np.bincount(gray.ravel() >> 5, minlength=8) / n_pixels

    channels = rgb.astype(np.float64)
    maxc = channels.max(axis=2)
    minc = channels.min(axis=2)
    meanc = channels.mean(axis=2)

    lo, hi = ratio_range
    nonzero = meanc > 0
    ratio = np.clip(maxc[nonzero] / meanc[nonzero], lo, hi)
    bins = np.clip(((ratio - lo) / (hi - lo) * 5).astype(np.int64), 0, 4)
    out[RATIO_HIST] = np.bincount(bins, minlength=5) / n_pixels

    saturation = np.where(maxc > 0, (maxc - minc) / np.where(maxc > 0, maxc, 1.0), 0.0)
    s_bins = np.clip((saturation.ravel() * 8).astype(np.int64), 0, 7)
    out[S_HIST] = np.bincount(s_bins, minlength=8) / n_pixels
    return out


def gray_diff(prev: Frame, cur: Frame) -> float:
    """Index 45: mean absolute gray difference between successive frames."""
    if prev.rgb.shape != cur.rgb.shape:
        raise DimensionMismatchError(
            f"frame shapes differ: {prev.rgb.shape} vs {cur.rgb.shape}"
        )
    a = gray_values(prev.rgb).astype(np.int16)
    b = gray_values(cur.rgb).astype(np.int16)
    return float(np.abs(b - a).mean())


def face_features(boxes: list[tuple[int, int, int, int]], frame: Frame) -> tuple[float, float]:
    """Indices 46-47: face count and mean face-box area ratio."""
    if not boxes:
        return 0.0, 0.0
    frame_area = frame.width * frame.height
    ratios = [w * h / frame_area for _, _, w, h in boxes]
    return float(len(boxes)), float(np.mean(ratios))


def optical_flow(
    prev: Frame,
    cur: Frame,
    grid: int = 16,
    levels: int = 3,
    window: int = 11,
    iters: int = 10,
    eps: float = 0.01,
) -> FlowField:
    """Pyramidal Lucas-Kanade flow on a uniform grid between two frames."""
    if prev.rgb.shape != cur.rgb.shape:
        raise DimensionMismatchError(
            f"frame shapes differ: {prev.rgb.shape} vs {cur.rgb.shape}"
        )
    points = grid_points(prev.width, prev.height, n=grid, margin=window)
    return lucas_kanade(
        gray_float(prev.rgb),
        gray_float(cur.rgb),
        points,
        levels=levels,
        window=window,
        iters=iters,
        eps=eps,
    )


# --------------------------------------------------------------------------
# Shot boundary detection
# --------------------------------------------------------------------------

def shot_signals(prev: Frame, cur: Frame) -> tuple[float, float]:
    """(fraction of pixels with |gray delta| > 30, 32-bin gray-hist L1 distance)."""
    a = gray_values(prev.rgb).astype(np.int16)
    b = gray_values(cur.rgb).astype(np.int16)
    changed = float((np.abs(b - a) > 30).mean())
    hist_a = np.bincount((a >> 3).ravel(), minlength=32) / a.size
    hist_b = np.bincount((b >> 3).ravel(), minlength=32) / b.size
    return changed, float(np.abs(hist_b - hist_a).sum())


@dataclass
class ShotThresholds:
    pixel_change_fraction: float = 0.45
    mean_flow_magnitude: float = 6.0
    hist_l1_distance: float = 0.6
    merge_window_s: float = 0.5


def detect_shots(
    changed_fraction: np.ndarray,
    mean_flow_magnitude: np.ndarray,
    hist_l1: np.ndarray,
    fps: float,
    thresholds: ShotThresholds | None = None,
) -> tuple[list[int], list[tuple[int, int]], np.ndarray]:
    """Two-of-three voting over the per-frame change signals.

    A cut is declared at frame t when at least two rules fire; cuts closer
    than merge_window_s are merged into the earlier one.  Returns the cut
    frame indices, the shot spans [start, end), and per-frame shot length
    in seconds (index 51).  A movie with no cuts is one full-length shot.
    """
    if thresholds is None:
        thresholds = ShotThresholds()
    n_frames = len(changed_fraction)
    votes = (
        (np.asarray(changed_fraction) > thresholds.pixel_change_fraction).astype(int)
        + (np.asarray(mean_flow_magnitude) > thresholds.mean_flow_magnitude).astype(int)
        + (np.asarray(hist_l1) > thresholds.hist_l1_distance).astype(int)
    )
    cuts: list[int] = []
    for t in range(1, n_frames):
        if votes[t] >= 2:
            if cuts and (t - cuts[-1]) / fps < thresholds.merge_window_s:
                continue
            cuts.append(t)

    boundaries = [0] + cuts + [n_frames]
    spans = [(boundaries[i], boundaries[i + 1]) for i in range(len(boundaries) - 1)]
    lengths = np.empty(n_frames)
    for start, end in spans:
        lengths[start:end] = (end - start) / fps
    return cuts, spans, lengths


# --------------------------------------------------------------------------
# Movie-level assembly
# --------------------------------------------------------------------------

def extract_frame_features(
    frames: list[Frame],
    face_boxes: list[list[tuple[int, int, int, int]]],
    fps: float = 2.0,
    flow_grid: int = 16,
    flow_levels: int = 3,
    flow_window: int = 11,
    flow_iters: int = 10,
    flow_eps: float = 0.01,
    shot_thresholds: ShotThresholds | None = None,
) -> np.ndarray:
    """The n_frames x 52 feature matrix for one movie's sampled frames."""
    if not frames:
        raise ValueError("need at least one frame")
    if len(face_boxes) != len(frames):
        raise DimensionMismatchError(
            f"{len(face_boxes)} face entries for {len(frames)} frames"
        )
    n_frames = len(frames)
    rows = np.zeros((n_frames, N_FRAME_FEATURES))
    changed = np.zeros(n_frames)
    hist_l1 = np.zeros(n_frames)

    for t, frame in enumerate(frames):
        rows[t, :45] = color_features(frame)
        rows[t, N_FACES], rows[t, PER_FACES] = face_features(face_boxes[t], frame)
        if t == 0:
            continue
        prev = frames[t - 1]
        rows[t, GRAY_DIFF] = gray_diff(prev, frame)
        field = optical_flow(
            prev, frame,
            grid=flow_grid, levels=flow_levels,
            window=flow_window, iters=flow_iters, eps=flow_eps,
        )
        rows[t, PTPT], rows[t, FLOW_MEAN], rows[t, FLOW_STD] = flow_features(field)
        changed[t], hist_l1[t] = shot_signals(prev, frame)

    _, _, lengths = detect_shots(changed, rows[:, FLOW_MEAN], hist_l1, fps, shot_thresholds)
    rows[:, SHOT_LENGTH] = lengths
    return rows


def aggregate(rows: np.ndarray) -> np.ndarray:
    """208 statistics: per feature mean, std, std/mean and top-10% mean."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 1:
        raise ValueError("need an n_frames x n_features matrix with n_frames >= 1")
    n = rows.shape[0]
    # statistics are computed over sorted columns so that any frame
    # permutation yields bitwise-identical output
    ordered = np.sort(rows, axis=0)[::-1]
    mean = ordered.mean(axis=0)
    std = ordered.std(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mean == 0, 0.0, std / mean)
    top_count = math.ceil(0.1 * n)
    top_mean = ordered[:top_count].mean(axis=0)
    return np.stack([mean, std, ratio, top_mean], axis=1).ravel()
