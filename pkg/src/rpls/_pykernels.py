"""Pure-Python random-orbit kernel, used when the compiled extension is unavailable."""
import numpy as np


def run_orbit(x0, u, z, right, k, d, cum, A, B, dither, burn_in):
    """Iterate one random orbit, returning the points visited after ``burn_in`` steps."""
    u = u.tolist()
    z = z.tolist()
    right = right.tolist()
    k = k.tolist()
    d = d.tolist()
    cum = cum.tolist()
    nz, m = len(z), len(cum)
    total = len(u)
    out = [0.0] * (total - burn_in)
    x = float(x0)
    for t in range(total):
        if t >= burn_in:
            out[t - burn_in] = x
        lo, hi = 0, nz
        while lo < hi:
            mid = (lo + hi) >> 1
            if z[mid] < x:
                lo = mid + 1
            else:
                hi = mid
        i = lo
        if lo < nz and z[lo] == x and right[lo]:
            i = lo + 1
        uu = u[t]
        j = 0
        while j < m - 1 and cum[j] <= uu:
            j += 1
        lower = 0.0 if j == 0 else cum[j - 1]
        v = (uu - lower) / (cum[j] - lower)
        x = k[i][j] * x + d[i][j]
        x = x + (v - 0.5) * dither
        if x < A:
            x = A
        elif x > B:
            x = B
    return np.array(out, dtype=np.float64)
