"""FEAT1 portable feature file format.

Little-endian layout::

    "FEAT" | version u32 = 1 | n u32 | d u32
    | tag_len u16 | tag utf-8
    | n*d float32 row-major
    | ids_flag u8 [| n x (len u16 | id utf-8)]
"""

from __future__ import annotations

import struct

import numpy as np

from .distmetrics import FeatureSet
from .errors import BadMagic, IoError, TruncatedFile, VersionUnsupported

MAGIC = b"FEAT"
VERSION = 1


def write_features(path, fs: FeatureSet) -> None:
    data = np.ascontiguousarray(fs.data, dtype="<f4")
    tag = fs.encoder_tag.encode("utf-8")
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<III", VERSION, fs.n, fs.d))
            f.write(struct.pack("<H", len(tag)))
            f.write(tag)
            f.write(data.tobytes())
            if fs.ids is None:
                f.write(b"\x00")
            else:
                f.write(b"\x01")
                for tile_id in fs.ids:
                    raw = tile_id.encode("utf-8")
                    f.write(struct.pack("<H", len(raw)))
                    f.write(raw)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


class _Reader:
    def __init__(self, blob: bytes, path):
        self.blob = blob
        self.path = path
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.blob):
            raise TruncatedFile(f"{self.path}: truncated at byte {self.pos}")
        chunk = self.blob[self.pos:self.pos + count]
        self.pos += count
        return chunk


def read_features(path) -> FeatureSet:
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    r = _Reader(blob, path)
    if r.take(4) != MAGIC:
        raise BadMagic(f"{path}: not a FEAT1 file")
    version, n, d = struct.unpack("<III", r.take(12))
    if version != VERSION:
        raise VersionUnsupported(f"{path}: unsupported version {version}")
    (tag_len,) = struct.unpack("<H", r.take(2))
    tag = r.take(tag_len).decode("utf-8")
    data = np.frombuffer(r.take(4 * n * d), dtype="<f4").reshape(n, d)
    (ids_flag,) = struct.unpack("<B", r.take(1))
    ids = None
    if ids_flag:
        out = []
        for _ in range(n):
            (id_len,) = struct.unpack("<H", r.take(2))
            out.append(r.take(id_len).decode("utf-8"))
        ids = tuple(out)
    return FeatureSet(data=np.asarray(data, dtype=np.float64),
                      encoder_tag=tag, ids=ids)
