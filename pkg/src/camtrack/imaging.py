"""Image containers, sequence ingestion, and integer color conversion.

All pixel math is integer-only so that conversions are bit-exact across
platforms. YCbCr input is interleaved 4:2:2 (Y0 Cb Y1 Cr), limited range,
with chroma upsampled by sample replication. Hue is quantized to 8 bits
([0, 255] circular) and achromatic pixels are canonicalized to H = 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence as Seq

import numpy as np

from .errors import EmptyRegionError, MalformedFrameError, SequenceError

# Q8 fixed-point coefficients for limited-range YCbCr -> RGB:
# (luma, r_cr, g_cb, g_cr, b_cb), output = (sum + 128) >> 8.
_YCBCR_MATRICES = {
    "bt601": (298, 409, -100, -208, 516),
    "bt709": (298, 459, -55, -136, 541),
}

_IMAGE_SUFFIXES = (".ppm", ".pgm", ".pnm", ".png")


def _round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


def normalize_matrix_id(matrix: str) -> str:
    """Accept 'bt709', 'BT709-limited', etc.; return the canonical id."""
    key = matrix.strip().lower().replace("_", "-")
    if key.endswith("-limited"):
        key = key[: -len("-limited")]
    if key not in _YCBCR_MATRICES:
        raise ValueError(
            f"unknown color matrix {matrix!r}; expected one of "
            f"{sorted(_YCBCR_MATRICES)} (limited range)"
        )
    return key


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel rectangle: left/top corner plus size.

    Covers the half-open pixel span [x, x+w) x [y, y+h).
    """

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"rect size must be >= 1x1, got {self.w}x{self.h}")

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @classmethod
    def from_center(cls, cx: float, cy: float, w: int, h: int) -> "Rect":
        return cls(_round_half_up(cx - w / 2.0), _round_half_up(cy - h / 2.0), w, h)

    def shifted(self, dx: int, dy: int) -> "Rect":
        return Rect(self.x + dx, self.y + dy, self.w, self.h)

    def intersect(self, other: "Rect") -> Optional["Rect"]:
        x0 = max(self.x, other.x)
        y0 = max(self.y, other.y)
        x1 = min(self.right, other.right)
        y1 = min(self.bottom, other.bottom)
        if x1 <= x0 or y1 <= y0:
            return None
        return Rect(x0, y0, x1 - x0, y1 - y0)

    def clamp_to(self, width: int, height: int) -> "Rect":
        """Clip to a width x height frame; error if nothing remains."""
        clipped = self.intersect(Rect(0, 0, width, height))
        if clipped is None:
            raise EmptyRegionError(
                f"rect {self} lies outside the {width}x{height} frame"
            )
        return clipped

    def move_inside(self, width: int, height: int) -> "Rect":
        """Translate (and clip if oversized) so the rect fits the frame."""
        w = min(self.w, width)
        h = min(self.h, height)
        x = min(max(self.x, 0), width - w)
        y = min(max(self.y, 0), height - h)
        return Rect(x, y, w, h)


def _as_plane(data, height: int, row_len: int, what: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.uint8)
    if arr.size != height * row_len:
        raise MalformedFrameError(
            f"{what}: expected {height * row_len} bytes, got {arr.size}"
        )
    return np.ascontiguousarray(arr.reshape(height, row_len))


@dataclass(eq=False)
class Ycbcr422Frame:
    """Interleaved 4:2:2 frame; 2 bytes per pixel, Y0 Cb Y1 Cr per pair."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise MalformedFrameError("frame dimensions must be positive")
        if self.width % 2 != 0:
            raise MalformedFrameError(
                f"4:2:2 width must be even, got {self.width}"
            )
        self.data = _as_plane(self.data, self.height, 2 * self.width, "ycbcr422")


@dataclass(eq=False)
class RgbFrame:
    """8-bit RGB frame stored as a (height, width, 3) array."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise MalformedFrameError("frame dimensions must be positive")
        arr = _as_plane(self.data, self.height, 3 * self.width, "rgb")
        self.data = arr.reshape(self.height, self.width, 3)


@dataclass(eq=False)
class HsvFrame:
    """8-bit HSV frame; H is circular over [0, 255], achromatic pixels H=0."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise MalformedFrameError("frame dimensions must be positive")
        arr = _as_plane(self.data, self.height, 3 * self.width, "hsv")
        arr = arr.reshape(self.height, self.width, 3)
        if np.any(arr[:, :, 0][arr[:, :, 1] == 0] != 0):
            raise MalformedFrameError("achromatic pixels (S=0) must carry H=0")
        self.data = arr


def ycbcr422_to_rgb(src: Ycbcr422Frame, matrix: str = "bt709") -> RgbFrame:
    """Convert an interleaved 4:2:2 frame to RGB with Q8 integer math.

    Chroma is upsampled by replication (each Cb/Cr sample covers its pixel
    pair). Outputs are clamped to [0, 255]. The conversion is a pure
    function of the bytes and the matrix id.
    """
    kl, rv, gu, gv, bu = _YCBCR_MATRICES[normalize_matrix_id(matrix)]
    raw = src.data.astype(np.int32)
    y = raw[:, 0::2] - 16
    cb = np.repeat(raw[:, 1::4] - 128, 2, axis=1)
    cr = np.repeat(raw[:, 3::4] - 128, 2, axis=1)
    luma = kl * y + 128
    r = (luma + rv * cr) >> 8
    g = (luma + gu * cb + gv * cr) >> 8
    b = (luma + bu * cb) >> 8
    rgb = np.stack([r, g, b], axis=-1)
    np.clip(rgb, 0, 255, out=rgb)
    return RgbFrame(src.width, src.height, rgb.astype(np.uint8))


def rgb_to_hsv(src: RgbFrame) -> HsvFrame:
    """Convert RGB to 8-bit HSV: H = floor(256*deg/360) mod 256, V = max,
    S = floor(255*(max-min)/max) with S=0 (and H=0) when max is 0.
    """
    rgb = src.data.astype(np.int32)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = mx - mn

    v = mx
    s = np.zeros_like(mx)
    np.floor_divide(255 * delta, mx, out=s, where=mx > 0)

    # Sector selection with R > G > B priority on ties.
    is_r = r == mx
    is_g = (g == mx) & ~is_r
    numer = np.where(is_r, g - b, np.where(is_g, b - r, r - g))
    base = np.where(is_r, 0, np.where(is_g, 2, 4))
    span = 6 * delta
    chromatic = delta > 0
    t = np.mod(base * delta + numer, np.where(chromatic, span, 1))
    h = np.zeros_like(mx)
    np.floor_divide(256 * t, span, out=h, where=chromatic)

    hsv = np.stack([h, s, v], axis=-1).astype(np.uint8)
    return HsvFrame(src.width, src.height, hsv)


# ---------------------------------------------------------------------------
# Portable pixel formats (PPM/PGM read+write, PBM write, PNG read)
# ---------------------------------------------------------------------------


def _read_pnm_tokens(blob: bytes, count: int) -> tuple[list[int], int]:
    """Read `count` whitespace/comment-separated header integers."""
    tokens: list[int] = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(blob):
            raise SequenceError("truncated PNM header")
        ch = blob[pos : pos + 1]
        if ch == b"#":
            pos = blob.find(b"\n", pos)
            if pos < 0:
                raise SequenceError("truncated PNM comment")
            pos += 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(blob) and not blob[end : end + 1].isspace():
                end += 1
            tokens.append(int(blob[pos:end]))
            pos = end
    return tokens, pos + 1  # header ends with one whitespace byte


def read_ppm(path) -> np.ndarray:
    """Read an 8-bit PPM/PGM (P2/P3/P5/P6) as a (h, w, 3) uint8 array."""
    blob = Path(path).read_bytes()
    magic = blob[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise SequenceError(f"{path}: unsupported PNM magic {magic!r}")
    channels = 3 if magic in (b"P3", b"P6") else 1
    (width, height, maxval), body = _read_pnm_tokens(blob[2:], 3)
    if maxval != 255:
        raise SequenceError(f"{path}: only 8-bit images supported (maxval 255)")
    n = width * height * channels
    if magic in (b"P5", b"P6"):
        raw = np.frombuffer(blob[2 + body :], dtype=np.uint8, count=n)
    else:
        values = blob[2 + body - 1 :].split()
        if len(values) < n:
            raise SequenceError(f"{path}: truncated ASCII PNM body")
        raw = np.array([int(v) for v in values[:n]], dtype=np.uint8)
    pixels = raw.reshape(height, width, channels)
    if channels == 1:
        pixels = np.repeat(pixels, 3, axis=2)
    return pixels


def write_ppm(path, pixels: np.ndarray) -> None:
    """Write a (h, w, 3) uint8 array as binary PPM (P6)."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def write_pbm(path, bits: np.ndarray) -> None:
    """Write a boolean (h, w) array as packed 1-bit PBM (P4)."""
    arr = np.asarray(bits, dtype=bool)
    h, w = arr.shape
    packed = np.packbits(arr, axis=1)
    with open(path, "wb") as fh:
        fh.write(f"P4\n{w} {h}\n".encode("ascii"))
        fh.write(packed.tobytes())


def _png_dimensions(path) -> tuple[int, int]:
    with open(path, "rb") as fh:
        header = fh.read(24)
    if header[:8] != b"\x89PNG\r\n\x1a\n" or header[12:16] != b"IHDR":
        raise SequenceError(f"{path}: not a PNG file")
    width = int.from_bytes(header[16:20], "big")
    height = int.from_bytes(header[20:24], "big")
    return width, height


def _read_png(path) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - environment dependent
        raise SequenceError(
            f"{path}: PNG decoding requires Pillow (pip install pillow)"
        ) from exc
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return arr


def read_image(path) -> np.ndarray:
    """Read a PPM/PGM/PNG file as (h, w, 3) uint8 RGB."""
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        return _read_png(path)
    return read_ppm(path)


def _image_dimensions(path) -> tuple[int, int]:
    """Dimensions from the header only, without decoding pixel data."""
    p = Path(path)
    if p.suffix.lower() == ".png":
        return _png_dimensions(p)
    blob = p.open("rb").read(4096)
    if blob[:2] not in (b"P2", b"P3", b"P5", b"P6"):
        raise SequenceError(f"{path}: unsupported image format")
    (width, height, _), _ = _read_pnm_tokens(blob[2:], 3)
    return width, height


# ---------------------------------------------------------------------------
# Sequences
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Sequence:
    """Ordered frame sources sharing one resolution, loaded as RGB."""

    width: int
    height: int
    fps_hint: Optional[float]
    _loaders: list

    def __len__(self) -> int:
        return len(self._loaders)

    def load_rgb(self, index: int) -> RgbFrame:
        return self._loaders[index]()

    def __iter__(self) -> Iterator[RgbFrame]:
        for loader in self._loaders:
            yield loader()

    @classmethod
    def from_frames(cls, frames: Seq[RgbFrame], fps_hint: Optional[float] = None) -> "Sequence":
        if not frames:
            raise SequenceError("cannot build a sequence from zero frames")
        w, h = frames[0].width, frames[0].height
        for f in frames:
            if (f.width, f.height) != (w, h):
                raise SequenceError(
                    f"mixed resolutions in sequence: {w}x{h} vs {f.width}x{f.height}"
                )
        return cls(w, h, fps_hint, [lambda f=f: f for f in frames])


def _numeric_sort_key(path: Path) -> tuple:
    digits = re.findall(r"\d+", path.stem)
    return (int(digits[-1]) if digits else -1, path.name)


def _load_image_dir(root: Path, fps_hint: Optional[float]) -> Sequence:
    files = sorted(
        (p for p in root.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES),
        key=_numeric_sort_key,
    )
    if not files:
        raise SequenceError(f"{root}: no image frames found")
    width, height = _image_dimensions(files[0])
    for p in files[1:]:
        w, h = _image_dimensions(p)
        if (w, h) != (width, height):
            raise SequenceError(
                f"mixed resolutions: {files[0].name} is {width}x{height}, "
                f"{p.name} is {w}x{h}"
            )

    def make_loader(p: Path) -> Callable[[], RgbFrame]:
        def load() -> RgbFrame:
            return RgbFrame(width, height, read_image(p))

        return load

    return Sequence(width, height, fps_hint, [make_loader(p) for p in files])


def _load_raw_ycbcr(
    path: Path,
    width: int,
    height: int,
    matrix: str,
    layout: str,
    fps_hint: Optional[float],
) -> Sequence:
    if width is None or height is None:
        raise SequenceError("raw YCbCr sequences need explicit width/height")
    frame_bytes = width * height * 2
    size = path.stat().st_size
    if size == 0 or size % frame_bytes != 0:
        raise SequenceError(
            f"{path}: size {size} is not a multiple of {frame_bytes} "
            f"({width}x{height} 4:2:2 frames)"
        )
    n_frames = size // frame_bytes
    matrix = normalize_matrix_id(matrix)
    if layout not in ("yuyv", "planar"):
        raise SequenceError(f"unknown raw layout {layout!r}")

    def make_loader(i: int) -> Callable[[], RgbFrame]:
        def load() -> RgbFrame:
            with open(path, "rb") as fh:
                fh.seek(i * frame_bytes)
                raw = np.frombuffer(fh.read(frame_bytes), dtype=np.uint8)
            if layout == "planar":
                raw = _planar_to_yuyv(raw, width, height)
            frame = Ycbcr422Frame(width, height, raw)
            return ycbcr422_to_rgb(frame, matrix)

        return load

    return Sequence(width, height, fps_hint, [make_loader(i) for i in range(n_frames)])


def _planar_to_yuyv(raw: np.ndarray, width: int, height: int) -> np.ndarray:
    """Repack Y plane + Cb plane + Cr plane into interleaved Y0 Cb Y1 Cr."""
    n = width * height
    y = raw[:n].reshape(height, width)
    cb = raw[n : n + n // 2].reshape(height, width // 2)
    cr = raw[n + n // 2 :].reshape(height, width // 2)
    out = np.empty((height, 2 * width), dtype=np.uint8)
    out[:, 0::2] = y
    out[:, 1::4] = cb
    out[:, 3::4] = cr
    return out


def load_sequence(
    path,
    kind: Optional[str] = None,
    *,
    width: Optional[int] = None,
    height: Optional[int] = None,
    matrix: str = "bt709",
    layout: str = "yuyv",
    fps_hint: Optional[float] = None,
) -> Sequence:
    """Enumerate a frame sequence from disk.

    kind is "numbered-image-directory" (alias "images") or
    "raw-ycbcr-file" (alias "raw"); inferred from the path when omitted.
    Image directories are ordered by the numeric part of each filename.
    """
    p = Path(path)
    if not p.exists():
        raise SequenceError(f"sequence path does not exist: {p}")
    if kind is None:
        kind = "images" if p.is_dir() else "raw"
    kind = {"numbered-image-directory": "images", "raw-ycbcr-file": "raw"}.get(kind, kind)
    if kind == "images":
        if not p.is_dir():
            raise SequenceError(f"{p}: image-directory sequences need a directory")
        return _load_image_dir(p, fps_hint)
    if kind == "raw":
        if not p.is_file():
            raise SequenceError(f"{p}: raw sequences need a regular file")
        return _load_raw_ycbcr(p, width, height, matrix, layout, fps_hint)
    raise SequenceError(f"unknown sequence kind {kind!r}")
