"""Pure-numpy fallback of the compiled path simulator.

Vectorised over paths: iteration ``j`` consumes draw ``j + 1`` of every
still-running path, which is exactly the draw the compiled loop would use,
so both backends produce the same switch counts and, up to the last ulp of
``log``, the same times.
"""

import numpy as np

from .rng import stream_key, uniform_at


def simulate_chunk(seed, start, count, a1, a2, lam1, lam2, t, v0_mode, s_obs,
                   level_hi, level_lo, keep):
    keys = stream_key(seed, np.arange(start, start + count, dtype=np.uint64))
    u0 = uniform_at(keys, np.zeros(count, dtype=np.uint64))
    if v0_mode == 0:
        up = np.ones(count, dtype=bool)
    elif v0_mode == 1:
        up = np.zeros(count, dtype=bool)
    else:
        up = u0 < 0.5
    v0 = np.where(up, a1, a2)

    n = np.zeros(count, dtype=np.int64)
    time = np.zeros(count)
    pos = np.zeros(count)
    mn = np.zeros(count)
    mx = np.zeros(count)
    alt = np.zeros(count)
    sgn = np.ones(count)
    n_s = np.full(count, -1, dtype=np.int64)
    pos_s = np.full(count, np.nan)
    hit_hi = np.full(count, np.inf)
    hit_lo = np.full(count, np.inf)
    times = np.full((count, max(keep, 0)), np.nan)
    have_s = s_obs > 0.0

    active = np.arange(count)
    counter = 1
    while active.size:
        a_up = up[active]
        v = np.where(a_up, a1, a2)
        rate = np.where(a_up, lam1, lam2)
        w = -np.log(uniform_at(keys[active], np.full(active.size, counter, dtype=np.uint64))) / rate
        counter += 1
        tm = time[active]
        p0 = pos[active]
        ends = tm + w >= t
        d = np.where(ends, t - tm, w)

        if have_s:
            snap = (n_s[active] < 0) & (tm + d >= s_obs)
            idx = active[snap]
            n_s[idx] = n[idx]
            pos_s[idx] = p0[snap] + v[snap] * (s_obs - tm[snap])

        p1 = p0 + v * d
        with np.errstate(divide="ignore", invalid="ignore"):
            cross_hi = np.isinf(hit_hi[active]) & (v > 0) & (p0 <= level_hi) & (p1 > level_hi)
            hit_hi[active[cross_hi]] = (tm + (level_hi - p0) / v)[cross_hi]
            cross_lo = np.isinf(hit_lo[active]) & (v < 0) & (p0 >= level_lo) & (p1 < level_lo)
            hit_lo[active[cross_lo]] = (tm + (p0 - level_lo) / (-v))[cross_lo]

        pos[active] = p1
        mn[active] = np.minimum(mn[active], p1)
        mx[active] = np.maximum(mx[active], p1)

        go = ~ends
        idx = active[go]
        new_t = tm[go] + w[go]
        time[idx] = new_t
        n[idx] += 1
        alt[idx] += sgn[idx] * new_t
        sgn[idx] = -sgn[idx]
        if keep > 0:
            slot = n[idx] - 1
            fill = slot < keep
            times[idx[fill], slot[fill]] = new_t[fill]
        up[idx] = ~up[idx]
        active = idx

    return {
        "v0": v0, "n": n, "pos": pos, "alt_sum": alt, "min": mn, "max": mx,
        "n_s": n_s, "pos_s": pos_s, "hit_hi": hit_hi, "hit_lo": hit_lo, "times": times,
    }
