"""Counter-based normal and uniform variates.

Every draw is a pure function of ``(seed, stream, path, step)`` computed with
the Philox4x32-10 block cipher, so paths can be generated in any order or on
any number of workers and still reproduce bit for bit.
"""

from __future__ import annotations

import numba as nb
import numpy as np

__all__ = ["philox4x32", "normal", "uniform", "normals", "NORMAL_STREAM", "UNIFORM_STREAM"]

NORMAL_STREAM = 0
UNIFORM_STREAM = 1

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_SH16 = np.uint64(16)
_SH5 = np.uint64(5)
_SH6 = np.uint64(6)
_TWO26 = 67108864.0
_TWO53 = 9007199254740992.0
_TWO_PI = 6.283185307179586


@nb.njit(cache=True, nogil=True)
def _philox(c0, c1, c2, c3, k0, k1):
    # all arguments are uint64 holding 32-bit words
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _SH32
        lo0 = p0 & _MASK
        hi1 = p1 >> _SH32
        lo1 = p1 & _MASK
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


def philox4x32(counter, key):
    """Philox4x32-10 of a 4-word counter under a 2-word key (32-bit words)."""
    c = [np.uint64(int(x) & 0xFFFFFFFF) for x in counter]
    k = [np.uint64(int(x) & 0xFFFFFFFF) for x in key]
    return tuple(int(x) for x in _philox(c[0], c[1], c[2], c[3], k[0], k[1]))


@nb.njit(cache=True, nogil=True)
def _block(seed, stream, path, step):
    s = np.uint64(seed)
    st = np.uint64(step)
    pa = np.uint64(path)
    c0 = st & _MASK
    c1 = ((st >> _SH32) & np.uint64(0xFFFF)) | (np.uint64(stream) << _SH16)
    c2 = pa & _MASK
    c3 = pa >> _SH32
    return _philox(c0, c1, c2, c3, s & _MASK, s >> _SH32)


@nb.njit(cache=True, nogil=True)
def _unit(a, b):
    # 53-bit uniform on [0, 1)
    return (float(a >> _SH5) * _TWO26 + float(b >> _SH6)) / _TWO53


@nb.njit(cache=True, nogil=True)
def normal(seed, path, step):
    """Standard normal for ``(seed, path, step)`` by Box-Muller (cosine branch)."""
    x0, x1, x2, x3 = _block(seed, NORMAL_STREAM, path, step)
    u1 = 1.0 - _unit(x0, x1)
    u2 = _unit(x2, x3)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


@nb.njit(cache=True, nogil=True)
def uniform(seed, path, step):
    """Uniform on (0, 1] for ``(seed, path, step)``, independent of :func:`normal`."""
    x0, x1, _, _ = _block(seed, UNIFORM_STREAM, path, step)
    return 1.0 - _unit(x0, x1)


@nb.njit(cache=True, nogil=True)
def _fill_normals(seed, path, start, out):
    for i in range(out.shape[0]):
        out[i] = normal(seed, path, start + i)


def normals(seed: int, path: int, n: int, start: int = 0) -> np.ndarray:
    """``n`` consecutive standard normals of one path, beginning at ``start``."""
    out = np.empty(n)
    _fill_normals(seed, path, start, out)
    return out
