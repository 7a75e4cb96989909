"""Closed-form ACI counts and powers for equal carrier amplitudes."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CountPair:
    l_d: int
    l_t: int


def _check(N: int, n: int) -> None:
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not 1 <= n <= N:
        raise IndexError(f"channel {n} out of range 1..{N}")


def l_d(N: int, n: int) -> int:
    """Number of ``2 f_i - f_k`` products landing in channel ``n``."""
    _check(N, n)
    if N % 2 == 0:
        return (N - 2) // 2
    return (N - 3) // 2 if n % 2 == 0 else (N - 1) // 2


def l_d_direct(N: int, n: int) -> int:
    """Direct count of k != n with k + n even and (k + n)/2 on the grid."""
    _check(N, n)
    return sum(1 for k in range(1, N + 1)
               if k != n and (k + n) % 2 == 0 and 1 <= (k + n) // 2 <= N)


def l_t(N: int, n: int) -> int:
    """Ordered-pair count of ``f_k + f_i - f_j`` products landing in channel ``n``.

    Uses the ordinary floor (greatest integer <= y); N < 3 has no such products.
    """
    _check(N, n)
    if N < 3:
        return 0
    twice = N * N + 2 * n * N - 5 * N - 2 * n * n + 2 * n
    value = 2 + twice // 2 - (N + n) // 2 + n // 2
    return max(value, 0)


def l_t_bruteforce(N: int, n: int) -> int:
    _check(N, n)
    count = 0
    for k in range(1, N + 1):
        if k == n:
            continue
        for i in range(1, N + 1):
            if i == k or i == n:
                continue
            if n - k < i <= N + n - k:
                count += 1
    return count


def counts(N: int, n: int) -> CountPair:
    return CountPair(l_d(N, n), l_t(N, n))


def equal_power_aci(N: int, n: int, A: float = 1.0, rho3: float = 1.0) -> float:
    """``rho3**2 * (9/32) * (L_D + 2 L_T) * A**6``."""
    if A < 0:
        raise ValueError("amplitude must be >= 0")
    weight = l_d(N, n) + 2 * l_t(N, n)
    return rho3 * rho3 * (9.0 / 32.0) * weight * A**6


def normalized_profile(N: int) -> list[float]:
    return [equal_power_aci(N, n) / N**2 for n in range(1, N + 1)]


def _require_aci(N: int) -> None:
    if N < 3:
        raise ValueError(f"no third-order ACI exists for N={N} (need N >= 3)")


def max_normalized(N: int) -> float:
    _require_aci(N)
    return max(normalized_profile(N))


def ratio_max_min(N: int) -> float:
    _require_aci(N)
    weights = [l_d(N, n) + 2 * l_t(N, n) for n in range(1, N + 1)]
    return max(weights) / min(weights)


def sweep(lo: int = 3, hi: int = 99) -> list[tuple[int, float, float]]:
    """``(N, max_normalized, ratio_max_min)`` rows for ``lo <= N <= hi``."""
    return [(N, max_normalized(N), ratio_max_min(N)) for N in range(max(lo, 3), hi + 1)]
