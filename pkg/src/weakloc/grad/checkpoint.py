"""Binary checkpoint files for named float64 parameters.

Layout: magic ``b"WLNET"``, one version byte, parameter count (u32 LE),
then per parameter: name length (u16 LE), UTF-8 name bytes, shape rank
(u8), extents (u32 LE each), raw little-endian float64 data.  Round-trips
are bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"WLNET"
VERSION = 1

__all__ = ["save_checkpoint", "load_checkpoint"]


def save_checkpoint(path, params):
    """Write a ``{name: ndarray}`` dict; iteration order is preserved."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes([VERSION]))
        fh.write(struct.pack("<I", len(params)))
        for name, arr in params.items():
            arr = np.ascontiguousarray(arr, dtype=np.float64)
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(bytes([arr.ndim]))
            for extent in arr.shape:
                fh.write(struct.pack("<I", extent))
            fh.write(arr.astype("<f8").tobytes())


def load_checkpoint(path):
    """Read back a ``{name: ndarray}`` dict, preserving stored order."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    version = blob[len(MAGIC)]
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    off = len(MAGIC) + 1
    (count,) = struct.unpack_from("<I", blob, off)
    off += 4
    params = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", blob, off)
        off += 2
        name = blob[off : off + nlen].decode("utf-8")
        off += nlen
        rank = blob[off]
        off += 1
        shape = struct.unpack_from(f"<{rank}I", blob, off)
        off += 4 * rank
        n = int(np.prod(shape)) if rank else 1
        arr = np.frombuffer(blob, dtype="<f8", count=n, offset=off).reshape(shape)
        off += 8 * n
        params[name] = arr.astype(np.float64)
    if off != len(blob):
        raise ValueError(f"{path}: {len(blob) - off} trailing bytes after last parameter")
    return params
