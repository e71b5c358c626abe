"""Streaming readers and writers for the containers the pipeline touches.

Y4M for video in and out, headerless planar 4:2:0 for raw captures, and
binary PGM for payload images. Readers yield one frame at a time so
memory stays flat regardless of clip length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import FormatError, ShapeError

Y4M_MAGIC = b"YUV4MPEG2"


@dataclass(eq=False)
class FrameYuv420:
    """One 4:2:0 frame: full-size luma plus quarter-size chroma planes."""

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        h, w = self.y.shape
        if h % 2 or w % 2 or not h or not w:
            raise ShapeError(f"luma dimensions must be even and positive, got {w}x{h}")
        if self.u.shape != (h // 2, w // 2) or self.v.shape != (h // 2, w // 2):
            raise ShapeError("chroma planes must be half-size in both dimensions")

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    def copy(self) -> "FrameYuv420":
        return FrameYuv420(y=self.y.copy(), u=self.u.copy(), v=self.v.copy())


@dataclass
class VideoMeta:
    width: int
    height: int
    frame_count: int | None = None
    frame_rate: str = "25:1"
    interlace: str = "Ip"
    aspect: str = "A1:1"
    colorspace: str = "C420jpeg"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.width % 2 or self.height % 2:
            raise ShapeError(f"video dimensions must be even and positive, got {self.width}x{self.height}")

    def frame_bytes(self) -> int:
        return self.width * self.height * 3 // 2


def _read_exact(stream, n: int, what: str) -> bytes:
    data = stream.read(n)
    if len(data) != n:
        raise FormatError(f"truncated stream while reading {what}")
    return data


def _split_frame(data: bytes, width: int, height: int) -> FrameYuv420:
    ysize = width * height
    csize = ysize // 4
    y = np.frombuffer(data[:ysize], dtype=np.uint8).reshape(height, width)
    u = np.frombuffer(data[ysize : ysize + csize], dtype=np.uint8).reshape(height // 2, width // 2)
    v = np.frombuffer(data[ysize + csize :], dtype=np.uint8).reshape(height // 2, width // 2)
    # copies so frames stay independent of the read buffer
    return FrameYuv420(y=y.copy(), u=u.copy(), v=v.copy())


def read_y4m(stream) -> tuple[VideoMeta, Iterator[FrameYuv420]]:
    """Parse the stream header and return (meta, frame iterator)."""
    header = bytearray()
    while not header.endswith(b"\n"):
        ch = stream.read(1)
        if not ch:
            raise FormatError("missing Y4M header line")
        header += ch
        if len(header) > 512:
            raise FormatError("Y4M header line too long")
    fields = header[:-1].split(b" ")
    if fields[0] != Y4M_MAGIC:
        raise FormatError("not a Y4M stream (bad magic)")
    width = height = None
    frame_rate, interlace, aspect, colorspace = "25:1", "Ip", "A1:1", "C420jpeg"
    for token in fields[1:]:
        if not token:
            continue
        tag, value = chr(token[0]), token[1:].decode("ascii", "replace")
        if tag == "W":
            width = int(value)
        elif tag == "H":
            height = int(value)
        elif tag == "F":
            frame_rate = value
        elif tag == "I":
            interlace = "I" + value
        elif tag == "A":
            aspect = "A" + value
        elif tag == "C":
            if not value.startswith("420"):
                raise FormatError(f"unsupported colorspace C{value}; only 4:2:0 is handled")
            colorspace = "C" + value
    if width is None or height is None:
        raise FormatError("Y4M header lacks W or H")
    meta = VideoMeta(
        width=width,
        height=height,
        frame_rate=frame_rate,
        interlace=interlace,
        aspect=aspect,
        colorspace=colorspace,
    )

    def frames() -> Iterator[FrameYuv420]:
        nbytes = meta.frame_bytes()
        while True:
            marker = stream.read(5)
            if not marker:
                return
            if marker != b"FRAME":
                raise FormatError(f"expected FRAME marker, got {marker!r}")
            while True:  # frame parameters up to newline are skipped
                ch = _read_exact(stream, 1, "frame header")
                if ch == b"\n":
                    break
            yield _split_frame(_read_exact(stream, nbytes, "frame data"), width, height)

    return meta, frames()


def write_y4m(meta: VideoMeta, frames: Iterable[FrameYuv420], stream) -> int:
    """Emit header plus FRAME-delimited planes; returns the frame count."""
    header = (
        f"YUV4MPEG2 W{meta.width} H{meta.height} F{meta.frame_rate} "
        f"{meta.interlace} {meta.aspect} {meta.colorspace}\n"
    )
    stream.write(header.encode("ascii"))
    count = 0
    for frame in frames:
        if frame.width != meta.width or frame.height != meta.height:
            raise ShapeError(
                f"frame {count} is {frame.width}x{frame.height}, expected {meta.width}x{meta.height}"
            )
        stream.write(b"FRAME\n")
        stream.write(frame.y.tobytes())
        stream.write(frame.u.tobytes())
        stream.write(frame.v.tobytes())
        count += 1
    return count


def read_raw_yuv(stream, width: int, height: int) -> Iterator[FrameYuv420]:
    """Iterate frames of a headerless planar 4:2:0 stream."""
    meta = VideoMeta(width=width, height=height)
    nbytes = meta.frame_bytes()
    while True:
        data = stream.read(nbytes)
        if not data:
            return
        if len(data) != nbytes:
            raise FormatError(
                f"raw stream length not divisible by frame size {nbytes} (trailing {len(data)} bytes)"
            )
        yield _split_frame(data, width, height)


# --- binary PGM -------------------------------------------------------------


def _next_pgm_token(stream) -> bytes:
    token = b""
    while True:
        ch = stream.read(1)
        if not ch:
            raise FormatError("truncated PGM header")
        if ch == b"#":  # comment to end of line
            while ch not in (b"\n", b""):
                ch = stream.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def read_pgm(stream) -> np.ndarray:
    """Read a binary (P5) PGM with maxval 255 into a (h, w) uint8 array."""
    if _next_pgm_token(stream) != b"P5":
        raise FormatError("not a binary PGM (magic must be P5)")
    try:
        width = int(_next_pgm_token(stream))
        height = int(_next_pgm_token(stream))
        maxval = int(_next_pgm_token(stream))
    except ValueError as exc:
        raise FormatError(f"bad PGM header field: {exc}") from exc
    if width <= 0 or height <= 0:
        raise FormatError(f"bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"unsupported PGM maxval {maxval}; only 255 is handled")
    data = _read_exact(stream, width * height, "PGM pixels")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(image: np.ndarray, stream) -> None:
    if image.ndim != 2 or image.size == 0:
        raise ShapeError("PGM writer expects a non-empty 2D array")
    h, w = image.shape
    stream.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
    stream.write(image.astype(np.uint8).tobytes())
