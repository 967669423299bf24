"""Sparse pyramidal Lucas-Kanade optical flow on a fixed point grid.

Tracks a uniform grid of points between two grayscale frames, coarse to
fine over an image pyramid, and reduces the surviving flow vectors to the
camera-movement features: the pan-tilt-pedestal-truck confidence ratio and
the mean / standard deviation of the vector magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FlowField:
    points: np.ndarray   # (P, 2) tracked grid positions (x, y)
    vectors: np.ndarray  # (P, 2) displacements (dx, dy) in px/frame

    def __len__(self) -> int:
        return len(self.points)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.hypot(self.vectors[:, 0], self.vectors[:, 1])

    @property
    def angles(self) -> np.ndarray:
        return np.arctan2(self.vectors[:, 1], self.vectors[:, 0])


def grid_points(width: int, height: int, n: int = 16, margin: int = 11) -> np.ndarray:
    """n x n uniform grid inset by a window-sized margin."""
    xs = np.linspace(margin, width - 1 - margin, n)
    ys = np.linspace(margin, height - 1 - margin, n)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def _downsample(img: np.ndarray) -> np.ndarray:
    """Blur with the 1-4-6-4-1 binomial kernel, then subsample by 2."""
    kernel = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
    padded = np.pad(img, 2, mode="edge")
    rows = sum(kernel[i] * padded[i : i + img.shape[0], 2:-2] for i in range(5))
    cols = np.pad(rows, ((0, 0), (2, 2)), mode="edge")
    blurred = sum(kernel[i] * cols[:, i : i + img.shape[1]] for i in range(5))
    return blurred[::2, ::2]


def build_pyramid(gray: np.ndarray, levels: int) -> list[np.ndarray]:
    pyramid = [gray.astype(np.float64)]
    for _ in range(levels - 1):
        if min(pyramid[-1].shape) < 8:
            break
        pyramid.append(_downsample(pyramid[-1]))
    return pyramid


def _bilinear(img: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    h, w = img.shape
    x = np.clip(x, 0.0, w - 1.0)
    y = np.clip(y, 0.0, h - 1.0)
    x0 = np.clip(np.floor(x).astype(np.int64), 0, w - 2) if w > 1 else np.zeros_like(x, np.int64)
    y0 = np.clip(np.floor(y).astype(np.int64), 0, h - 2) if h > 1 else np.zeros_like(y, np.int64)
    fx = x - x0
    fy = y - y0
    top = img[y0, x0] * (1 - fx) + img[y0, x0 + 1] * fx
    bottom = img[y0 + 1, x0] * (1 - fx) + img[y0 + 1, x0 + 1] * fx
    return top * (1 - fy) + bottom * fy


def lucas_kanade(
    prev_gray: np.ndarray,
    cur_gray: np.ndarray,
    points: np.ndarray,
    levels: int = 3,
    window: int = 11,
    iters: int = 10,
    eps: float = 0.01,
    min_eigen: float = 1e-3,
    max_residual: float = 25.0,
) -> FlowField:
    """Track points from prev_gray to cur_gray.

    Points on texture-free patches (smallest gradient eigenvalue below
    min_eigen per window pixel), points leaving the frame, and points whose
    final mean absolute residual exceeds max_residual are dropped.
    """
    if prev_gray.shape != cur_gray.shape:
        raise ValueError("frames must share dimensions")
    if points.size == 0:
        return FlowField(points.reshape(0, 2), np.zeros((0, 2)))

    pyr_prev = build_pyramid(prev_gray, levels)
    pyr_cur = build_pyramid(cur_gray, levels)
    n_levels = len(pyr_prev)

    half = window // 2
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    ox, oy = np.meshgrid(offsets, offsets)
    ox = ox.ravel()
    oy = oy.ravel()
    window_px = window * window

    n_points = len(points)
    flow = np.zeros((n_points, 2))
    valid = np.ones(n_points, dtype=bool)
    residual = np.zeros(n_points)

    for level in range(n_levels - 1, -1, -1):
        img_prev = pyr_prev[level]
        img_cur = pyr_cur[level]
        h, w = img_prev.shape
        grad_y, grad_x = np.gradient(img_prev)

        scale = 2.0**level
        px = points[:, 0] / scale
        py = points[:, 1] / scale
        wx = px[:, None] + ox[None, :]
        wy = py[:, None] + oy[None, :]

        i_window = _bilinear(img_prev, wx, wy)
        ix = _bilinear(grad_x, wx, wy)
        iy = _bilinear(grad_y, wx, wy)

        gxx = (ix * ix).sum(axis=1)
        gxy = (ix * iy).sum(axis=1)
        gyy = (iy * iy).sum(axis=1)
        trace = gxx + gyy
        disc = np.sqrt(np.maximum((gxx - gyy) ** 2 + 4 * gxy * gxy, 0.0))
        lambda_min = (trace - disc) / 2.0
        det = gxx * gyy - gxy * gxy
        valid &= lambda_min / window_px >= min_eigen
        valid &= det > 0

        velocity = np.zeros((n_points, 2))
        for _ in range(iters):
            jx = wx + (flow[:, 0] + velocity[:, 0])[:, None]
            jy = wy + (flow[:, 1] + velocity[:, 1])[:, None]
            diff = i_window - _bilinear(img_cur, jx, jy)
            bx = (diff * ix).sum(axis=1)
            by = (diff * iy).sum(axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                step_x = np.where(det > 0, (gyy * bx - gxy * by) / det, 0.0)
                step_y = np.where(det > 0, (gxx * by - gxy * bx) / det, 0.0)
            velocity[:, 0] += step_x
            velocity[:, 1] += step_y
            if np.all(np.hypot(step_x, step_y)[valid] < eps):
                break

        # out-of-frame tracking positions are lost
        end_x = px + flow[:, 0] + velocity[:, 0]
        end_y = py + flow[:, 1] + velocity[:, 1]
        valid &= (end_x >= 0) & (end_x <= w - 1) & (end_y >= 0) & (end_y <= h - 1)

        flow = flow + velocity
        if level > 0:
            flow = flow * 2.0
        else:
            jx = wx + flow[:, 0][:, None]
            jy = wy + flow[:, 1][:, None]
            residual = np.abs(i_window - _bilinear(img_cur, jx, jy)).mean(axis=1)

    valid &= residual <= max_residual
    return FlowField(points[valid].copy(), flow[valid])


# --------------------------------------------------------------------------
# Flow statistics
# --------------------------------------------------------------------------

def circular_mean(angles: np.ndarray) -> float:
    return float(np.arctan2(np.sin(angles).sum(), np.cos(angles).sum()))


def angular_difference(a: np.ndarray, b: float) -> np.ndarray:
    """Wrapped absolute angle difference in [0, pi]."""
    d = np.mod(a - b + np.pi, 2 * np.pi) - np.pi
    return np.abs(d)


def flow_features(field: FlowField, eps: float = 1e-4) -> tuple[float, float, float]:
    """(PTPT confidence, mean magnitude, std of magnitudes).

    PTPT = sum(F_i) / max(sum(delta(phi_i, phi_bar)^2), eps) with phi_bar the
    circular mean angle; an empty field yields all zeros.
    """
    if len(field) == 0:
        return 0.0, 0.0, 0.0
    magnitudes = field.magnitudes
    angles = field.angles
    deviation = angular_difference(angles, circular_mean(angles))
    denominator = max(float((deviation**2).sum()), eps)
    ptpt = float(magnitudes.sum()) / denominator
    return ptpt, float(magnitudes.mean()), float(magnitudes.std())
