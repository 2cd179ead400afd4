"""Pure-Python reference versions of the compiled kernels."""

import numpy as np


def sweep_codes(inputs, thresholds, gains):
    inputs = np.asarray(inputs, dtype=np.float64)
    thresholds = [float(t) for t in thresholds]
    gains = [float(g) for g in gains]
    pairs = list(zip(gains, thresholds))
    codes = np.zeros(len(inputs), dtype=np.int64)
    bubbles = np.zeros(len(inputs), dtype=np.uint8)
    for i, x in enumerate(inputs.tolist()):
        count = 0
        seen_zero = False
        bubble = False
        for g, t in pairs:
            if x * g > t:
                count += 1
                if seen_zero:
                    bubble = True
            else:
                seen_zero = True
        codes[i] = count
        bubbles[i] = bubble
    return codes, bubbles


def hysteresis_trace(currents, i_crit_p, i_crit_ap, r_low, r_high, start_high):
    high = bool(start_high)
    out = np.empty(len(currents), dtype=np.float64)
    for i, x in enumerate(np.asarray(currents, dtype=np.float64).tolist()):
        if not high and x > i_crit_p:
            high = True
        elif high and x < i_crit_ap:
            high = False
        out[i] = r_high if high else r_low
    return out


def first_reach(inputs, codes, n_codes):
    idx = np.full(n_codes, -1, dtype=np.int64)
    level = 1
    for i, c in enumerate(np.asarray(codes).tolist()):
        while level <= n_codes and c >= level:
            idx[level - 1] = i
            level += 1
        if level > n_codes:
            break
    return idx
