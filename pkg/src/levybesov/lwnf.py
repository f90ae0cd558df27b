"""LWNF binary container for grid fields and coefficient pyramids.

Field layout (version 1), all little-endian:

    magic   4 bytes  4C 57 4E 46 ("LWNF")
    version u32      1
    d       u8
    J       u16
    L       f64
    counts  d x u64  cells per axis
    tag     u32 length + UTF-8 bytes (model tag)
    seed    u64
    values  f64 row-major (product of counts entries)

Pyramid files share the header with version 2 and carry, after the seed:

    n_moments u16, j_coarse i16, n_sections u32,
    then per section: j i16, gender mask u8 (bit i set = M on axis i),
    counts d x u64, data f64 row-major.

Section order: the approximation band first (mask 0 at j_coarse), then
details sorted by (j, mask).
"""

from __future__ import annotations

import struct

import numpy as np

from .sampler import GridField, GridSpec
from .wavelet import CoeffPyramid

MAGIC = b"LWNF"
VERSION_FIELD = 1
VERSION_PYRAMID = 2


class FormatError(Exception):
    """Corrupt or mismatched LWNF content."""


def _write_header(fh, version, spec: GridSpec, tag: str, seed: int):
    fh.write(MAGIC)
    fh.write(struct.pack("<I", version))
    fh.write(struct.pack("<B", spec.d))
    fh.write(struct.pack("<H", spec.J))
    fh.write(struct.pack("<d", spec.L))
    for n in spec.shape:
        fh.write(struct.pack("<Q", n))
    raw = tag.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)
    fh.write(struct.pack("<Q", seed & 0xFFFFFFFFFFFFFFFF))


def _read_exact(fh, n, what):
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError(f"truncated file while reading {what}")
    return buf


def _read_header(fh):
    magic = _read_exact(fh, 4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
    if version not in (VERSION_FIELD, VERSION_PYRAMID):
        raise FormatError(f"unsupported version {version}")
    (d,) = struct.unpack("<B", _read_exact(fh, 1, "dimension"))
    (J,) = struct.unpack("<H", _read_exact(fh, 2, "level"))
    (L,) = struct.unpack("<d", _read_exact(fh, 8, "half-width"))
    counts = [struct.unpack("<Q", _read_exact(fh, 8, "axis count"))[0]
              for _ in range(d)]
    (tag_len,) = struct.unpack("<I", _read_exact(fh, 4, "tag length"))
    tag = _read_exact(fh, tag_len, "tag").decode("utf-8")
    (seed,) = struct.unpack("<Q", _read_exact(fh, 8, "seed"))
    try:
        spec = GridSpec(d=d, J=J, L=L)
    except ValueError as exc:
        raise FormatError(f"invalid grid header: {exc}") from exc
    if list(spec.shape) != counts:
        raise FormatError("axis counts disagree with (d, J, L)")
    return version, spec, tag, seed


def _read_array(fh, shape, what):
    n = int(np.prod(shape))
    buf = _read_exact(fh, 8 * n, what)
    return np.frombuffer(buf, dtype="<f8").reshape(shape).copy()


def write_field(path, field: GridField):
    with open(path, "wb") as fh:
        _write_header(fh, VERSION_FIELD, field.spec, field.model_tag, field.seed)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_field(path) -> GridField:
    with open(path, "rb") as fh:
        version, spec, tag, seed = _read_header(fh)
        if version != VERSION_FIELD:
            raise FormatError("not a field file")
        values = _read_array(fh, spec.shape, "values")
        trailing = fh.read(1)
    if trailing:
        raise FormatError("trailing bytes after values")
    return GridField(spec=spec, values=values, model_tag=tag, seed=seed)


def write_pyramid(path, pyramid: CoeffPyramid, tag: str = "", seed: int = 0):
    sections = [(pyramid.j_coarse, 0, pyramid.approx)]
    for (j, mask) in sorted(pyramid.details):
        sections.append((j, mask, pyramid.details[(j, mask)]))
    with open(path, "wb") as fh:
        _write_header(fh, VERSION_PYRAMID, pyramid.spec, tag, seed)
        fh.write(struct.pack("<H", pyramid.n_moments))
        fh.write(struct.pack("<h", pyramid.j_coarse))
        fh.write(struct.pack("<I", len(sections)))
        for j, mask, arr in sections:
            fh.write(struct.pack("<h", j))
            fh.write(struct.pack("<B", mask))
            for n in arr.shape:
                fh.write(struct.pack("<Q", n))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_pyramid(path) -> CoeffPyramid:
    with open(path, "rb") as fh:
        version, spec, tag, seed = _read_header(fh)
        if version != VERSION_PYRAMID:
            raise FormatError("not a pyramid file")
        (n_moments,) = struct.unpack("<H", _read_exact(fh, 2, "basis"))
        (j_coarse,) = struct.unpack("<h", _read_exact(fh, 2, "j_coarse"))
        (n_sections,) = struct.unpack("<I", _read_exact(fh, 4, "sections"))
        approx = None
        details = {}
        for _ in range(n_sections):
            (j,) = struct.unpack("<h", _read_exact(fh, 2, "section level"))
            (mask,) = struct.unpack("<B", _read_exact(fh, 1, "gender mask"))
            shape = tuple(
                struct.unpack("<Q", _read_exact(fh, 8, "section count"))[0]
                for _ in range(spec.d))
            arr = _read_array(fh, shape, "section data")
            if mask == 0:
                approx = arr
            else:
                details[(j, mask)] = arr
        if approx is None:
            raise FormatError("pyramid missing its approximation band")
    return CoeffPyramid(spec=spec, n_moments=n_moments, j_coarse=j_coarse,
                        approx=approx, details=details)
