"""PPM (P6) and PNG (8-bit RGB) readers and writers.

Self-contained codecs on top of zlib/struct. Both formats round-trip an
8-bit RGB image bit-exactly. Anything other than 8-bit three-channel
color is refused: alpha, palette, grayscale, 16-bit, and interlaced
files all raise :class:`UnsupportedImageError` so callers can tell
"wrong kind of image" apart from "broken file"
(:class:`MalformedImageError`).
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .image import as_image8

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

_PNG_COLOR_NAMES = {0: "grayscale", 3: "palette", 4: "grayscale+alpha", 6: "RGBA"}


class CodecError(Exception):
    """Base class for image file errors."""


class MalformedImageError(CodecError):
    """File does not parse as the format it claims to be."""


class UnsupportedImageError(CodecError):
    """Valid file, but not 8-bit RGB."""


# ---------------------------------------------------------------------------
# PPM (P6 binary)


def encode_ppm(img: np.ndarray) -> bytes:
    img = as_image8(img)
    h, w = img.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + img.tobytes()


def decode_ppm(buf: bytes) -> np.ndarray:
    if buf[:2] != b"P6":
        raise MalformedImageError("not a P6 PPM file")
    pos = 2
    fields = []
    while len(fields) < 3:
        # skip whitespace and '#' comment lines between header fields
        while pos < len(buf) and buf[pos : pos + 1].isspace():
            pos += 1
        if pos < len(buf) and buf[pos : pos + 1] == b"#":
            while pos < len(buf) and buf[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos : pos + 1].isspace():
            pos += 1
        token = buf[start:pos]
        if not token.isdigit():
            raise MalformedImageError(f"bad PPM header token {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedImageError(f"PPM maxval {maxval} not supported (need 255)")
    if width < 1 or height < 1:
        raise MalformedImageError("PPM with empty dimensions")
    pos += 1  # exactly one whitespace byte separates maxval from pixel data
    data = buf[pos : pos + width * height * 3]
    if len(data) < width * height * 3:
        raise MalformedImageError("truncated PPM pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3).copy()


# ---------------------------------------------------------------------------
# PNG (8-bit truecolor, no interlace)


def _png_chunk(tag: bytes, data: bytes) -> bytes:
    return (
        struct.pack(">I", len(data))
        + tag
        + data
        + struct.pack(">I", zlib.crc32(data, zlib.crc32(tag)))
    )


def encode_png(img: np.ndarray) -> bytes:
    img = as_image8(img)
    h, w = img.shape[:2]
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    # filter type 0 per scanline
    raw = bytearray()
    for row in img:
        raw.append(0)
        raw.extend(row.tobytes())
    return (
        PNG_SIGNATURE
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", zlib.compress(bytes(raw)))
        + _png_chunk(b"IEND", b"")
    )


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter_scanlines(raw: bytes, width: int, height: int) -> np.ndarray:
    stride = width * 3
    if len(raw) != (stride + 1) * height:
        raise MalformedImageError("PNG pixel data has wrong length")
    out = np.zeros((height, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.uint8)
    for y in range(height):
        ftype = raw[y * (stride + 1)]
        line = np.frombuffer(raw, dtype=np.uint8, count=stride, offset=y * (stride + 1) + 1)
        if ftype == 0:
            cur = line.copy()
        elif ftype == 2:  # Up
            cur = line + prev
        elif ftype in (1, 3, 4):  # Sub / Average / Paeth need the left neighbor
            cur = np.zeros(stride, dtype=np.uint8)
            for x in range(stride):
                a = int(cur[x - 3]) if x >= 3 else 0
                b = int(prev[x])
                c = int(prev[x - 3]) if x >= 3 else 0
                if ftype == 1:
                    pred = a
                elif ftype == 3:
                    pred = (a + b) // 2
                else:
                    pred = _paeth(a, b, c)
                cur[x] = (int(line[x]) + pred) & 0xFF
        else:
            raise MalformedImageError(f"unknown PNG filter type {ftype}")
        out[y] = cur
        prev = cur
    return out.reshape(height, width, 3)


def decode_png(buf: bytes) -> np.ndarray:
    if buf[:8] != PNG_SIGNATURE:
        raise MalformedImageError("not a PNG file")
    pos = 8
    ihdr = None
    idat = bytearray()
    seen_end = False
    while pos < len(buf):
        if pos + 8 > len(buf):
            raise MalformedImageError("truncated PNG chunk header")
        (length,) = struct.unpack(">I", buf[pos : pos + 4])
        tag = buf[pos + 4 : pos + 8]
        data = buf[pos + 8 : pos + 8 + length]
        if len(data) < length or pos + 12 + length > len(buf):
            raise MalformedImageError("truncated PNG chunk")
        (crc,) = struct.unpack(">I", buf[pos + 8 + length : pos + 12 + length])
        if crc != zlib.crc32(data, zlib.crc32(tag)):
            raise MalformedImageError(f"CRC mismatch in {tag!r} chunk")
        pos += 12 + length
        if tag == b"IHDR":
            ihdr = data
        elif tag == b"IDAT":
            idat.extend(data)
        elif tag == b"IEND":
            seen_end = True
            break
        # ancillary chunks are skipped
    if ihdr is None or len(ihdr) != 13:
        raise MalformedImageError("missing or malformed IHDR")
    if not seen_end:
        raise MalformedImageError("missing IEND")
    width, height, depth, color, comp, filt, interlace = struct.unpack(">IIBBBBB", ihdr)
    if depth != 8:
        raise UnsupportedImageError(f"PNG bit depth {depth} not supported (need 8)")
    if color in (4, 6):
        raise UnsupportedImageError(
            f"PNG with alpha channel ({_PNG_COLOR_NAMES[color]}) not supported"
        )
    if color != 2:
        name = _PNG_COLOR_NAMES.get(color, str(color))
        raise UnsupportedImageError(f"PNG color type {name} not supported (need RGB)")
    if comp != 0 or filt != 0:
        raise MalformedImageError("PNG with nonstandard compression/filter method")
    if interlace != 0:
        raise UnsupportedImageError("interlaced PNG not supported")
    if width < 1 or height < 1:
        raise MalformedImageError("PNG with empty dimensions")
    if not idat:
        raise MalformedImageError("PNG without IDAT data")
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise MalformedImageError(f"corrupt PNG pixel stream: {exc}") from exc
    return _unfilter_scanlines(raw, width, height)


# ---------------------------------------------------------------------------
# Path-level API


def decode_image(buf: bytes) -> np.ndarray:
    """Decode PPM or PNG bytes, sniffing the format from the signature."""
    if buf[:8] == PNG_SIGNATURE:
        return decode_png(buf)
    if buf[:2] == b"P6":
        return decode_ppm(buf)
    raise MalformedImageError("unrecognized image format (need P6 PPM or PNG)")


def read_image(path) -> np.ndarray:
    """Read a PPM (P6, maxval 255) or PNG (8-bit RGB) file."""
    data = Path(path).read_bytes()
    try:
        return decode_image(data)
    except CodecError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def write_image(img: np.ndarray, path) -> None:
    """Write ``img`` as PPM or PNG depending on the file extension."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".ppm":
        data = encode_ppm(img)
    elif suffix == ".png":
        data = encode_png(img)
    else:
        raise UnsupportedImageError(f"unsupported output extension {suffix!r}")
    path.write_bytes(data)
