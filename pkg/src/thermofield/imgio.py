"""Reading RAW frames, writing 8-bit outputs, dataset scanning and field dumps."""
from __future__ import annotations

import functools
import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .errors import LoadError, ParameterError
from .fieldcore import Role

log = logging.getLogger(__name__)

RAW_SUFFIXES = {".png", ".tif", ".tiff"}
FIELD_MAGIC = b"TFLD"
_FIELD_HEADER = struct.Struct("<4sIII")


def _read(path: Path) -> np.ndarray:
    if not path.is_file():
        raise LoadError(f"{path}: no such file")
    if path.suffix.lower() not in RAW_SUFFIXES:
        raise LoadError(f"{path}: unsupported format {path.suffix or '(none)'}")
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise LoadError(f"{path}: unsupported format or corrupt file")
    return img


def _check_channels(path: Path, img: np.ndarray) -> None:
    if img.ndim == 3 and img.shape[2] != 1:
        raise LoadError(f"{path}: expected single channel, got {img.shape[2]}")


def load_raw(path: str | Path) -> np.ndarray:
    """Decode a 16-bit single-channel PNG or TIFF; counts pass through unchanged."""
    path = Path(path)
    img = _read(path)
    _check_channels(path, img)
    if img.dtype != np.uint16:
        bits = img.dtype.itemsize * 8
        if np.issubdtype(img.dtype, np.floating):
            raise LoadError(f"{path}: unsupported sample type {img.dtype}")
        raise LoadError(f"{path}: unsupported bit depth {bits}")
    return np.ascontiguousarray(img.reshape(img.shape[:2]))


def load_image8(path: str | Path) -> np.ndarray:
    path = Path(path)
    img = _read(path)
    _check_channels(path, img)
    if img.dtype != np.uint8:
        raise LoadError(f"{path}: expected 8-bit image, got {img.dtype.itemsize * 8}-bit")
    return np.ascontiguousarray(img.reshape(img.shape[:2]))


def _write(path: Path, img: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        ok = cv2.imwrite(str(path), img)
    except cv2.error as exc:
        raise OSError(f"{path}: write failed ({exc})") from exc
    if not ok:
        raise OSError(f"{path}: write failed")


def save_image8(img: np.ndarray, path: str | Path) -> None:
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 2:
        raise ParameterError(f"expected a 2D uint8 image, got {img.dtype} {img.shape}")
    path = Path(path)
    if path.suffix.lower() != ".png":
        path = path.with_suffix(".png")
    _write(path, img)


def save_raw(frame: np.ndarray, path: str | Path) -> None:
    """Write a 16-bit single-channel PNG or TIFF (chosen by suffix)."""
    frame = np.asarray(frame)
    if frame.dtype != np.uint16 or frame.ndim != 2:
        raise ParameterError(f"expected a 2D uint16 frame, got {frame.dtype} {frame.shape}")
    path = Path(path)
    if path.suffix.lower() not in RAW_SUFFIXES:
        raise ParameterError(f"{path}: RAW frames are written as .png or .tif")
    _write(path, frame)


@dataclass
class DatasetEntry:
    path: Path
    frame_index: int

    @functools.cached_property
    def raw(self) -> np.ndarray:
        return load_raw(self.path)


def scan_sequence(directory: str | Path, pattern: str = "*.png") -> list[DatasetEntry]:
    """Files in ``directory`` matching ``pattern``, sorted by file name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ParameterError(f"{directory}: not a directory")
    names = sorted(p.name for p in directory.glob(pattern) if p.is_file())
    if not names:
        log.warning("no files matching %r in %s", pattern, directory)
    return [DatasetEntry(directory / n, i) for i, n in enumerate(names)]


def scan_raw(directory: str | Path) -> list[DatasetEntry]:
    """All PNG/TIFF files in ``directory`` sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ParameterError(f"{directory}: not a directory")
    names = sorted(p.name for p in directory.iterdir()
                   if p.is_file() and p.suffix.lower() in RAW_SUFFIXES)
    if not names:
        log.warning("no PNG/TIFF frames in %s", directory)
    return [DatasetEntry(directory / n, i) for i, n in enumerate(names)]


def write_field_dump(field: np.ndarray, role: Role, path: str | Path) -> None:
    """Binary field dump: ``TFLD`` magic, u32 width, height, role, then
    little-endian float32 samples in row-major order."""
    field = np.asarray(field)
    h, w = field.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_FIELD_HEADER.pack(FIELD_MAGIC, w, h, int(Role(role))))
        f.write(field.astype("<f4").tobytes(order="C"))


def read_field_dump(path: str | Path) -> tuple[np.ndarray, Role]:
    data = Path(path).read_bytes()
    if len(data) < _FIELD_HEADER.size:
        raise LoadError(f"{path}: truncated field dump")
    magic, w, h, role = _FIELD_HEADER.unpack_from(data)
    if magic != FIELD_MAGIC:
        raise LoadError(f"{path}: bad magic {magic!r}")
    body = data[_FIELD_HEADER.size:]
    if len(body) != 4 * w * h:
        raise LoadError(f"{path}: expected {w * h} samples, found {len(body) // 4}")
    return np.frombuffer(body, dtype="<f4").reshape(h, w).astype(np.float32), Role(role)


def normalize8(values: np.ndarray) -> np.ndarray:
    """Min/max stretch to uint8 for visual inspection."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return np.zeros(v.shape, dtype=np.uint8)
    return np.floor(255.0 * (v - lo) / (hi - lo) + 0.5).astype(np.uint8)


def montage(panels: list[np.ndarray], gap: int = 4) -> np.ndarray:
    """Side-by-side strip of equally tall uint8 panels, separated by white gaps."""
    h = panels[0].shape[0]
    parts = []
    for i, p in enumerate(panels):
        if p.shape[0] != h:
            raise ParameterError("montage panels must share a height")
        if i:
            parts.append(np.full((h, gap), 255, dtype=np.uint8))
        parts.append(p)
    return np.hstack(parts)
