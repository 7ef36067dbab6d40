"""Binary checkpoint format.

Layout (all integers little-endian u32, values little-endian IEEE-754
float32):

    magic "KGA1" | version | n | m | k | block count |
    per block: name length | name bytes (UTF-8) | rank | dims... | values

Blocks are written in sorted name order so that save -> load -> save is
byte-identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

MAGIC = b"KGA1"
VERSION = 1


@dataclass
class Checkpoint:
    n: int
    m: int
    k: int
    blocks: dict[str, np.ndarray]
    version: int = VERSION


def save_checkpoint(path, n: int, m: int, k: int, blocks: dict[str, np.ndarray]):
    out = bytearray()
    out += MAGIC
    out += struct.pack("<5I", VERSION, n, m, k, len(blocks))
    for name in sorted(blocks):
        arr = np.ascontiguousarray(blocks[name], dtype="<f4")
        raw_name = name.encode("utf-8")
        out += struct.pack("<I", len(raw_name))
        out += raw_name
        out += struct.pack("<I", arr.ndim)
        out += struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += arr.tobytes()
    Path(path).write_bytes(bytes(out))


def load_checkpoint(path) -> Checkpoint:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise DataError(f"{path}: not a checkpoint file (bad magic {data[:4]!r})")
    off = 4
    version, n, m, k, count = struct.unpack_from("<5I", data, off)
    off += 20
    if version != VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    blocks: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<I", data, off)
        off += 4
        name = data[off : off + name_len].decode("utf-8")
        off += name_len
        (rank,) = struct.unpack_from("<I", data, off)
        off += 4
        dims = struct.unpack_from(f"<{rank}I", data, off)
        off += 4 * rank
        size = int(np.prod(dims)) if rank else 1
        values = np.frombuffer(data, dtype="<f4", count=size, offset=off)
        off += 4 * size
        blocks[name] = values.reshape(dims).copy()
    if off != len(data):
        raise DataError(f"{path}: {len(data) - off} trailing bytes after last block")
    return Checkpoint(n=n, m=m, k=k, blocks=blocks, version=version)
