"""8-bit RGB(A) images and binary PPM (P6) input/output."""
from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass

import numpy as np

from ..errors import ParseError, TruncatedFile, UnsupportedMaxval


@dataclass
class ImageBuffer:
    width: int
    height: int
    channels: int
    data: np.ndarray  # uint8, (height, width, channels), top row first

    def __post_init__(self):
        if self.channels not in (3, 4):
            raise ValueError("images have 3 or 4 channels")
        self.data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if self.data.size != self.width * self.height * self.channels:
            raise ValueError("pixel data length does not match width*height*channels")
        self.data = self.data.reshape(self.height, self.width, self.channels)

    @property
    def pixels(self) -> np.ndarray:
        return self.data

    @classmethod
    def blank(cls, width: int, height: int, color=(0, 0, 0)) -> "ImageBuffer":
        d = np.empty((height, width, len(color)), dtype=np.uint8)
        d[...] = color
        return cls(width, height, len(color), d)

    @classmethod
    def from_float(cls, color: np.ndarray) -> "ImageBuffer":
        """Quantize linear [0, 1] floats: ``floor(255 c + 0.5)`` after clamping."""
        c = np.clip(np.asarray(color, dtype=float), 0.0, 1.0)
        q = np.floor(c * 255.0 + 0.5).astype(np.uint8)
        h, w, ch = q.shape
        return cls(w, h, ch, q)

    def to_float(self) -> np.ndarray:
        return self.data.astype(float) / 255.0

    def rgb(self) -> "ImageBuffer":
        if self.channels == 3:
            return self
        return ImageBuffer(self.width, self.height, 3, self.data[..., :3])

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return (self.width, self.height, self.channels) == (other.width, other.height, other.channels) and bool(
            np.array_equal(self.data, other.data)
        )


def encode_ppm(image: ImageBuffer) -> bytes:
    """``P6\\n<w> <h>\\n255\\n`` followed by raw RGB rows; alpha is dropped."""
    rgb = image.rgb()
    return f"P6\n{rgb.width} {rgb.height}\n255\n".encode("ascii") + rgb.data.tobytes()


def write_ppm(image: ImageBuffer, dest) -> None:
    data = encode_ppm(image)
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "wb") as fh:
            fh.write(data)
    else:
        dest.write(data)


_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


def decode_ppm(data: bytes) -> ImageBuffer:
    magic = data[:2]
    if magic in (b"P1", b"P2", b"P3", b"P4", b"P5"):
        raise ParseError(f"unsupported variant {magic.decode()}; only binary P6 is read")
    if magic != b"P6":
        raise ParseError("not a PPM file")
    pos = 2
    fields = []
    for _ in range(3):
        m = _TOKEN.match(data, pos)
        if not m:
            raise TruncatedFile("PPM header ends early")
        try:
            fields.append(int(m.group(1)))
        except ValueError:
            raise ParseError(f"bad PPM header field {m.group(1)!r}") from None
        pos = m.end()
    w, h, maxval = fields
    if maxval != 255:
        raise UnsupportedMaxval(f"maxval {maxval} is not supported (only 255)")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ParseError("PPM header must end with one whitespace byte")
    pos += 1
    n = w * h * 3
    body = data[pos : pos + n]
    if len(body) < n:
        raise TruncatedFile(f"PPM pixel data has {len(body)} of {n} bytes")
    return ImageBuffer(w, h, 3, np.frombuffer(body, dtype=np.uint8).copy())


def read_ppm(src) -> ImageBuffer:
    if isinstance(src, (bytes, bytearray)):
        return decode_ppm(bytes(src))
    if isinstance(src, (str, os.PathLike)):
        with open(src, "rb") as fh:
            return decode_ppm(fh.read())
    if isinstance(src, io.IOBase) or hasattr(src, "read"):
        return decode_ppm(src.read())
    raise TypeError("read_ppm expects bytes, a path or a binary stream")
