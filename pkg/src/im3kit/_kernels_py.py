"""Pure-Python ACI power kernels (fallback for the compiled ``_kernels``).

Summation order is fixed (double products by k, then triple products by
(a, b)) and matches the compiled kernel operation for operation, so both
backends return bit-identical results.
"""


def channel_power(amps, n, rho3=1.0):
    """Incoherent ACI power landing in 1-based channel ``n``."""
    N = len(amps)
    g = abs(rho3)
    p = 0.0
    for k in range(1, N + 1):
        if k == n or (k + n) % 2:
            continue
        ak = amps[k - 1]
        if ak == 0.0:
            continue
        ai = amps[(k + n) // 2 - 1]
        c = g * 0.75 * ak * ai * ai
        p += c * c * 0.5
    for a in range(1, N + 1):
        aa = amps[a - 1]
        if aa == 0.0:
            continue
        lo = max(a + 1, n + 1 - a)
        hi = min(N, N + n - a)
        for b in range(lo, hi + 1):
            c_idx = a + b - n
            if c_idx == a or c_idx == b:
                continue
            c = g * 1.5 * aa * amps[b - 1] * amps[c_idx - 1]
            p += c * c * 0.5
    return p


def profile_powers(amps, rho3=1.0):
    amps = [float(a) for a in amps]
    return [channel_power(amps, n, rho3) for n in range(1, len(amps) + 1)]
