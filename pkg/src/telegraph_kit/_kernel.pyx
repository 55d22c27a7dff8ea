# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path simulator (one counter-based stream per path)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, INFINITY, NAN
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t STREAM_GAP = 0xD1B54A32D192ED03ULL
cdef double U53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double uniform_at(uint64_t key, uint64_t counter) noexcept nogil:
    cdef uint64_t bits = mix64(key + (counter + 1) * GOLDEN)
    return (<double>(bits >> 11) + 0.5) * U53


cdef inline void crossings(double tau0, double p0, double v, double d,
                           double hi, double lo, double* hit_hi, double* hit_lo) noexcept nogil:
    cdef double p1 = p0 + v * d
    if hit_hi[0] == INFINITY and v > 0 and p0 <= hi and p1 > hi:
        hit_hi[0] = tau0 + (hi - p0) / v
    if hit_lo[0] == INFINITY and v < 0 and p0 >= lo and p1 < lo:
        hit_lo[0] = tau0 + (p0 - lo) / (-v)


def simulate_chunk(uint64_t seed, int64_t start, int64_t count,
                   double a1, double a2, double lam1, double lam2, double t,
                   int v0_mode, double s_obs, double level_hi, double level_lo,
                   int keep):
    """Simulate paths ``start .. start+count-1``; see ``telegraph_kit.montecarlo``."""
    out_v0 = np.empty(count, dtype=np.float64)
    out_n = np.empty(count, dtype=np.int64)
    out_pos = np.empty(count, dtype=np.float64)
    out_alt = np.empty(count, dtype=np.float64)
    out_min = np.empty(count, dtype=np.float64)
    out_max = np.empty(count, dtype=np.float64)
    out_ns = np.empty(count, dtype=np.int64)
    out_ps = np.empty(count, dtype=np.float64)
    out_hh = np.empty(count, dtype=np.float64)
    out_hl = np.empty(count, dtype=np.float64)
    out_times = np.full((count, keep if keep > 0 else 0), np.nan, dtype=np.float64)

    cdef double[:] v0_v = out_v0
    cdef int64_t[:] n_v = out_n
    cdef double[:] pos_v = out_pos
    cdef double[:] alt_v = out_alt
    cdef double[:] min_v = out_min
    cdef double[:] max_v = out_max
    cdef int64_t[:] ns_v = out_ns
    cdef double[:] ps_v = out_ps
    cdef double[:] hh_v = out_hh
    cdef double[:] hl_v = out_hl
    cdef double[:, :] times_v = out_times

    cdef uint64_t base = mix64(seed)
    cdef uint64_t key, counter
    cdef int64_t i, n, n_s
    cdef double v, rate, time, pos, mn, mx, alt, sgn, w, d, pos_s, hh, hl, u
    cdef bint have_s = s_obs > 0.0

    with nogil:
        for i in range(count):
            key = mix64(base + (<uint64_t>(start + i) + 1) * STREAM_GAP)
            u = uniform_at(key, 0)
            if v0_mode == 0 or (v0_mode == 2 and u < 0.5):
                v = a1
                rate = lam1
            else:
                v = a2
                rate = lam2
            v0_v[i] = v
            counter = 1
            time = 0.0
            pos = 0.0
            mn = 0.0
            mx = 0.0
            alt = 0.0
            sgn = 1.0
            n = 0
            n_s = -1
            pos_s = NAN
            hh = INFINITY
            hl = INFINITY
            while True:
                w = -log(uniform_at(key, counter)) / rate
                counter += 1
                if time + w >= t:
                    d = t - time
                else:
                    d = w
                if have_s and n_s < 0 and time + d >= s_obs:
                    n_s = n
                    pos_s = pos + v * (s_obs - time)
                crossings(time, pos, v, d, level_hi, level_lo, &hh, &hl)
                pos = pos + v * d
                if pos < mn:
                    mn = pos
                if pos > mx:
                    mx = pos
                if time + w >= t:
                    break
                time = time + w
                n += 1
                alt += sgn * time
                sgn = -sgn
                if n <= keep:
                    times_v[i, n - 1] = time
                if v == a1:
                    v = a2
                    rate = lam2
                else:
                    v = a1
                    rate = lam1
            n_v[i] = n
            pos_v[i] = pos
            alt_v[i] = alt
            min_v[i] = mn
            max_v[i] = mx
            ns_v[i] = n_s
            ps_v[i] = pos_s
            hh_v[i] = hh
            hl_v[i] = hl

    return {
        "v0": out_v0, "n": out_n, "pos": out_pos, "alt_sum": out_alt,
        "min": out_min, "max": out_max, "n_s": out_ns, "pos_s": out_ps,
        "hit_hi": out_hh, "hit_lo": out_hl, "times": out_times,
    }
