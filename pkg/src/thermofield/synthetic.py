"""Synthetic RAW scenes for tests, benchmarks and demos."""
from __future__ import annotations

import numpy as np


def hot_block_scene(rng: np.random.Generator, height: int = 512, width: int = 640,
                    background: float = 3000.0, noise: float = 100.0,
                    hot: float = 12000.0, max_fraction: float = 0.05) -> np.ndarray:
    """Noisy flat background with one hot rectangle covering at most ``max_fraction`` of the frame.

    The background carries a gentle gradient plus uniform noise of
    amplitude ``noise`` so there is texture for a rescaler to preserve.
    """
    yy, xx = np.mgrid[0:height, 0:width]
    base = background + 0.5 * noise * (xx / width - 0.5) + 0.5 * noise * (yy / height - 0.5)
    frame = base + rng.uniform(-noise, noise, size=(height, width))
    area = rng.uniform(0.01, max_fraction) * height * width
    aspect = rng.uniform(0.5, 2.0)
    bh = int(min(height, max(1, np.sqrt(area / aspect))))
    bw = int(min(width, max(1, area // bh)))
    y0 = int(rng.integers(0, height - bh + 1))
    x0 = int(rng.integers(0, width - bw + 1))
    frame[y0:y0 + bh, x0:x0 + bw] = hot + rng.uniform(-noise, noise, size=(bh, bw))
    return np.clip(np.rint(frame), 0, 16383).astype(np.uint16)


def random_frame(rng: np.random.Generator, height: int, width: int,
                 lo: int = 0, hi: int = 16383) -> np.ndarray:
    """Uniform random RAW counts in ``[lo, hi]``; guaranteed non-constant when possible."""
    frame = rng.integers(lo, hi + 1, size=(height, width), dtype=np.uint16)
    if frame.size > 1 and hi > lo and frame.min() == frame.max():
        frame.flat[0] = lo if frame.flat[0] != lo else hi
    return frame


def thermal_scene(rng: np.random.Generator, height: int = 512, width: int = 640) -> np.ndarray:
    """Smoothly varying scene with a cold band, warm blobs and sensor noise."""
    yy, xx = np.mgrid[0:height, 0:width] / max(height, width)
    frame = 7000 + 800 * np.sin(3 * xx + rng.uniform(0, 6)) * np.cos(2 * yy)
    frame[: height // 4] -= 1500  # cold sky
    for _ in range(int(rng.integers(2, 6))):
        cy, cx = rng.uniform(0, 1, 2) * (height / max(height, width), width / max(height, width))
        r = rng.uniform(0.02, 0.08)
        frame += rng.uniform(500, 4000) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r * r))
    frame += rng.normal(0, 25, size=frame.shape)
    return np.clip(np.rint(frame), 0, 16383).astype(np.uint16)
