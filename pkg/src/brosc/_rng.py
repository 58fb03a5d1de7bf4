"""Bulk Gaussian generation for the simulation engine.

numpy's Generator is single-threaded and becomes the bottleneck when every
trajectory needs ~1e5-1e6 variates, so the hot path uses a numba-parallel
xoshiro256** bit stream per trajectory feeding a Marsaglia-Tsang ziggurat
(128 layers, the classic 32-bit formulation).  Streams are seeded by
splitmix64 from (base seed, trajectory index, stream tag), making every
trajectory's noise a pure function of its key, independent of chunking and
thread count.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)
_FIVE = np.uint64(5)
_NINE = np.uint64(9)
_SEVENTEEN = np.uint64(17)

# --- ziggurat tables (Marsaglia & Tsang 2000, 128 layers) -------------------

_ZIG_R = 3.442619855899
_M1 = 2147483648.0


def _build_tables():
    vn = 9.91256303526217e-3
    dn = tn = _ZIG_R
    kn = np.zeros(128, dtype=np.int64)
    wn = np.zeros(128)
    fn = np.zeros(128)
    q = vn / np.exp(-0.5 * dn * dn)
    kn[0] = int((dn / q) * _M1)
    kn[1] = 0
    wn[0] = q / _M1
    wn[127] = dn / _M1
    fn[0] = 1.0
    fn[127] = np.exp(-0.5 * dn * dn)
    for i in range(126, 0, -1):
        dn = np.sqrt(-2.0 * np.log(vn / dn + np.exp(-0.5 * dn * dn)))
        kn[i + 1] = int((dn / tn) * _M1)
        tn = dn
        fn[i] = np.exp(-0.5 * dn * dn)
        wn[i] = dn / _M1
    return kn, wn, fn


_KN, _WN, _FN = _build_tables()


@njit(cache=True)
def _splitmix64(state: np.uint64) -> np.uint64:
    z = (state + _SM_GAMMA) & _MASK
    z = ((z ^ (z >> np.uint64(30))) * _SM_M1) & _MASK
    z = ((z ^ (z >> np.uint64(27))) * _SM_M2) & _MASK
    return z ^ (z >> np.uint64(31))


def stream_key(base_seed: int, traj: int, stream: int) -> np.uint64:
    """Collision-resistant 64-bit key for one trajectory noise stream."""
    z = np.uint64(base_seed & 0xFFFFFFFFFFFFFFFF)
    z = _splitmix64(z ^ np.uint64((traj << 8) & 0xFFFFFFFFFFFFFFFF))
    return _splitmix64(z ^ np.uint64(stream + 1))


@njit(cache=True, inline="always")
def _rotl7(x):
    return ((x << np.uint64(7)) | (x >> np.uint64(57))) & _MASK


@njit(cache=True, inline="always")
def _rotl45(x):
    return ((x << np.uint64(45)) | (x >> np.uint64(19))) & _MASK


@njit(cache=True, inline="always")
def _init_state(key):
    z0 = _splitmix64(key)
    z1 = _splitmix64(z0)
    z2 = _splitmix64(z1)
    z3 = _splitmix64(z2)
    return z0, z1, z2, z3


@njit(cache=True, inline="always")
def _next_u64(s0, s1, s2, s3):
    result = (_rotl7((s1 * _FIVE) & _MASK) * _NINE) & _MASK
    t = (s1 << _SEVENTEEN) & _MASK
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl45(s3)
    return result, s0, s1, s2, s3


@njit(cache=True, inline="always")
def _uniform(s0, s1, s2, s3):
    u, s0, s1, s2, s3 = _next_u64(s0, s1, s2, s3)
    return (np.float64(u >> np.uint64(11)) + 0.5) * (1.0 / 9007199254740992.0), s0, s1, s2, s3


@njit(cache=True, inline="always")
def _normal(s0, s1, s2, s3):
    """One N(0,1) variate via the ziggurat; returns (value, state)."""
    while True:
        u, s0, s1, s2, s3 = _next_u64(s0, s1, s2, s3)
        hz = np.int64(np.int32(np.uint32(u >> np.uint64(32))))
        iz = hz & np.int64(127)
        if hz < 0:
            a = -hz
        else:
            a = hz
        if a < _KN[iz]:
            return hz * _WN[iz], s0, s1, s2, s3
        # outside the core rectangle
        while True:
            x = hz * _WN[iz]
            if iz == 0:
                # tail beyond R
                while True:
                    u1, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
                    u2, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
                    xx = -np.log(u1) / _ZIG_R
                    yy = -np.log(u2)
                    if yy + yy > xx * xx:
                        val = _ZIG_R + xx
                        if hz < 0:
                            return -val, s0, s1, s2, s3
                        return val, s0, s1, s2, s3
            u1, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
            if _FN[iz] + u1 * (_FN[iz - 1] - _FN[iz]) < np.exp(-0.5 * x * x):
                return x, s0, s1, s2, s3
            u, s0, s1, s2, s3 = _next_u64(s0, s1, s2, s3)
            hz = np.int64(np.int32(np.uint32(u >> np.uint64(32))))
            iz = hz & np.int64(127)
            if hz < 0:
                a = -hz
            else:
                a = hz
            if a < _KN[iz]:
                return hz * _WN[iz], s0, s1, s2, s3


@njit(parallel=True, cache=True)
def fill_normals(keys, scale, out):
    """Fill each row of ``out`` (float32) with N(0, scale^2) variates."""
    rows, n = out.shape
    for i in prange(rows):
        s0, s1, s2, s3 = _init_state(keys[i])
        for j in range(n):
            a, s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
            out[i, j] = np.float32(scale * a)


@njit(parallel=True, cache=True)
def fill_spectrum(keys, amp, amp_edge0, amp_edge_nyq, even_n, out):
    """Fill rFFT spectra: out[i, j] = amp[j] (z1 + i z2), real-valued edges.

    ``amp`` already carries the 1/sqrt(2) split between the real and
    imaginary parts; the DC (and Nyquist, for even n) coefficients are purely
    real with the full amplitude.
    """
    rows, nf = out.shape
    for i in prange(rows):
        s0, s1, s2, s3 = _init_state(keys[i])
        for j in range(nf):
            a, s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
            b, s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
            out[i, j] = np.complex64(complex(amp[j] * a, amp[j] * b))
        a, s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
        b, s0, s1, s2, s3 = _normal(s0, s1, s2, s3)
        out[i, 0] = np.complex64(complex(amp_edge0 * a, 0.0))
        if even_n:
            out[i, nf - 1] = np.complex64(complex(amp_edge_nyq * b, 0.0))
