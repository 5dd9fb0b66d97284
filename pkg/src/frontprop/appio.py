"""File ingestion and result serialization.

Formats: PNG and plain PNM (P2/P3/P5/P6) in; indexed-color PNG, JSON contours
and the FFD1 binary distance-map format out. FFD1 layout: magic "FFD1",
uint32-LE width, uint32-LE height, then row-major float32-LE values with IEEE
infinity for not-computed pixels.
"""

from __future__ import annotations

import io
import json
import struct

import numpy as np
from PIL import Image

from .features import ImageBuffer
from .fmm import SeedSets
from .grid import Grid2D, ScalarField

FFD1_MAGIC = b"FFD1"

# fixed palette: index 0 = background/unassigned, then visually distinct hues
LABEL_PALETTE = [
    (0, 0, 0), (31, 119, 180), (44, 160, 44), (214, 39, 40), (255, 127, 14),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
    (188, 189, 34), (23, 190, 207),
]


class DataError(ValueError):
    """Malformed or unsupported input data."""


def _parse_pnm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise DataError(f"unsupported PNM magic {magic!r}")
    binary = magic in (b"P5", b"P6")
    color = magic in (b"P3", b"P6")

    # header tokens: width, height, maxval; '#' comments allowed
    tokens = []
    pos = 2
    while len(tokens) < 3:
        if pos >= len(data):
            raise DataError("truncated PNM header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace():
                pos += 1
            tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as e:
        raise DataError(f"bad PNM header: {e}") from None
    if width <= 0 or height <= 0 or maxval <= 0:
        raise DataError("PNM dimensions and maxval must be positive")
    nvals = width * height * (3 if color else 1)

    if binary:
        pos += 1  # single whitespace after maxval
        if maxval > 255:
            raw = data[pos:pos + 2 * nvals]
            if len(raw) < 2 * nvals:
                raise DataError("truncated PNM payload")
            vals = np.frombuffer(raw, dtype=">u2", count=nvals).astype(np.float64)
        else:
            raw = data[pos:pos + nvals]
            if len(raw) < nvals:
                raise DataError("truncated PNM payload")
            vals = np.frombuffer(raw, dtype=np.uint8, count=nvals).astype(np.float64)
    else:
        body = data[pos:].split(b"#")[0] if b"#" in data[pos:] else data[pos:]
        fields = body.split()
        if len(fields) < nvals:
            raise DataError("truncated PNM payload")
        vals = np.array([int(t) for t in fields[:nvals]], dtype=np.float64)
    vals /= maxval
    if color:
        return vals.reshape(height, width, 3)
    return vals.reshape(height, width)


def load_image(src) -> ImageBuffer:
    """Load PNG or plain PNM bytes/path into a normalized [0,1] buffer."""
    if isinstance(src, (bytes, bytearray)):
        data = bytes(src)
    else:
        with open(src, "rb") as fh:
            data = fh.read()
    if len(data) < 2:
        raise DataError("empty or truncated image file")
    if data[:2] in (b"P2", b"P3", b"P5", b"P6"):
        arr = _parse_pnm(data)
    elif data[:8] == b"\x89PNG\r\n\x1a\n":
        try:
            with Image.open(io.BytesIO(data)) as im:
                im.load()
                if im.mode in ("RGBA", "LA", "PA"):
                    im = im.convert("RGB" if im.mode != "LA" else "L")
                if im.mode == "P":
                    im = im.convert("RGB")
                if im.mode == "I;16":
                    arr = np.asarray(im, dtype=np.float64) / 65535.0
                elif im.mode in ("L", "RGB"):
                    arr = np.asarray(im, dtype=np.float64) / 255.0
                elif im.mode == "I":
                    arr = np.asarray(im, dtype=np.float64) / 65535.0
                else:
                    raise DataError(f"unsupported PNG mode {im.mode}")
        except DataError:
            raise
        except Exception as e:
            raise DataError(f"corrupt PNG: {e}") from None
    else:
        raise DataError("unsupported image format (need PNG or P2/P3/P5/P6 PNM)")
    if arr.ndim == 2:
        h, w = arr.shape
    else:
        h, w = arr.shape[:2]
    if h < 2 or w < 2:
        raise DataError("image must be at least 2x2")
    return ImageBuffer(Grid2D(w, h), arr)


def parse_seeds(data, grid: Grid2D) -> SeedSets:
    """Parse the seed JSON schema {"sets":[{"label": k, "points": [[x,y],..]}]}.

    Points are 0-based (x=column, y=row). Duplicates within one set are
    dropped; a point in two different sets or any out-of-grid point is an
    error. Entries sharing a label are merged.
    """
    if isinstance(data, (bytes, bytearray, str)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise DataError(f"seed JSON parse error: {e}") from None
    if not isinstance(data, dict) or "sets" not in data:
        raise DataError('seed JSON must be an object with a "sets" array')
    by_label = {}
    for si, entry in enumerate(data["sets"]):
        try:
            label = int(entry["label"])
            points = entry["points"]
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"seed set {si}: {e}") from None
        if label < 1:
            raise DataError(f"seed set {si}: label must be >= 1")
        bucket = by_label.setdefault(label, [])
        for pi, pt in enumerate(points):
            if len(pt) != 2:
                raise DataError(f"seed set {si} point {pi}: need [x, y]")
            x, y = int(pt[0]), int(pt[1])
            if not grid.contains(x, y):
                raise DataError(
                    f"seed set {si} point {pi} at ({x},{y}) is outside the "
                    f"{grid.width}x{grid.height} grid")
            bucket.append((x, y))
    labels, point_arrays = [], []
    for label in sorted(by_label):
        pts = list(dict.fromkeys(by_label[label]))  # dedupe, keep order
        if not pts:
            raise DataError(f"seed set with label {label} is empty")
        labels.append(label)
        point_arrays.append(np.array(pts, dtype=np.int64))
    if not labels:
        raise DataError("no seed sets given")
    try:
        return SeedSets(labels, point_arrays)
    except ValueError as e:
        raise DataError(str(e)) from None


def seeds_to_json(seeds: SeedSets) -> dict:
    return {"sets": [{"label": int(label), "points": [[int(x), int(y)] for x, y in pts]}
                     for label, pts in zip(seeds.labels, seeds.points)]}


def encode_ffd1(values) -> bytes:
    """FFD1 bytes of a 2D array: magic, u32-LE dims, row-major f32-LE payload."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise DataError("FFD1 payload must be a nonempty 2D array")
    h, w = arr.shape
    return FFD1_MAGIC + struct.pack("<II", w, h) + arr.astype("<f4").tobytes(order="C")


def decode_ffd1(data: bytes) -> np.ndarray:
    if data[:4] != FFD1_MAGIC:
        raise DataError("bad FFD1 magic")
    if len(data) < 12:
        raise DataError("truncated FFD1 header")
    width, height = struct.unpack("<II", data[4:12])
    if width < 1 or height < 1:
        raise DataError("bad FFD1 dimensions")
    expected = 12 + 4 * width * height
    if len(data) != expected:
        raise DataError(f"FFD1 size mismatch: have {len(data)} bytes, need {expected}")
    vals = np.frombuffer(data, dtype="<f4", offset=12).reshape(height, width)
    return vals.astype(np.float64)


def write_distance_map(field: ScalarField, path_or_buf):
    """Serialize a scalar field to FFD1; +inf is stored as IEEE infinity."""
    blob = encode_ffd1(field.values)
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(blob)
    else:
        with open(path_or_buf, "wb") as fh:
            fh.write(blob)


def read_distance_map(src) -> ScalarField:
    if isinstance(src, (bytes, bytearray)):
        data = bytes(src)
    elif hasattr(src, "read"):
        data = src.read()
    else:
        with open(src, "rb") as fh:
            data = fh.read()
    vals = decode_ffd1(data)
    h, w = vals.shape
    if h < 2 or w < 2:
        raise DataError("distance map must cover a grid of at least 2x2")
    return ScalarField(Grid2D(w, h), vals)


def label_map_png_bytes(label_map) -> bytes:
    """Indexed-color PNG of an integer label map with the fixed palette."""
    lm = np.asarray(label_map)
    if lm.max() >= len(LABEL_PALETTE):
        raise DataError(f"label {lm.max()} exceeds the {len(LABEL_PALETTE)}-color palette")
    im = Image.fromarray(lm.astype(np.uint8), mode="P")
    palette = []
    for rgb in LABEL_PALETTE:
        palette.extend(rgb)
    im.putpalette(palette)
    buf = io.BytesIO()
    im.save(buf, format="PNG")
    return buf.getvalue()


def save_label_png(label_map, path):
    with open(path, "wb") as fh:
        fh.write(label_map_png_bytes(label_map))


def contours_to_json(contours) -> dict:
    return {"contours": [
        {"label": int(label),
         "points": [[float(x), float(y)] for x, y in pts],
         "closed": bool(closed)}
        for label, pts, closed in contours]}


def save_contours_json(contours, path):
    with open(path, "w") as fh:
        json.dump(contours_to_json(contours), fh)
