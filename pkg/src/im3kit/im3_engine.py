"""Third-order intermodulation products and their in-channel ACI power.

Everything is computed in channel-index space.  A product landing in channel
``n`` has an integer phase signature whose coefficients sum to +1 and whose
index-weighted sum is ``n - 1``:

* double products ``2 f_i - f_k``: signature ``+2 @ i, -1 @ k``, peak amplitude
  ``(3/4) |rho3| A_k A_i**2``;
* triple products ``f_a + f_b - f_c``: signature ``+1 @ a, +1 @ b, -1 @ c``.
  Six cosines of the cubic expansion share this signature, so they add
  coherently to a peak amplitude ``(6/4) |rho3| A_a A_b A_c``.

Distinct signatures are incoherent for independent uniform carrier phases, so
the channel's ACI power is the sum of ``amplitude**2 / 2`` over products
(tone power into 1 ohm).
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .channel_plan import ChannelPlan, NonlinearityModel, total_power


class ProductClass(enum.Enum):
    DOUBLE = "double"
    TRIPLE = "triple"


@dataclass(frozen=True)
class IM3Product:
    cls: ProductClass
    signature: tuple[tuple[int, int], ...]
    amplitude: float
    source_indices: tuple[int, ...]

    def landing_channel(self) -> int:
        return 1 + sum(c * (m - 1) for m, c in self.signature)

    def phase(self, phases: Sequence[float]) -> float:
        """Net phase ``sum(coeff * theta)`` for 0-based ``phases``."""
        return sum(c * phases[m - 1] for m, c in self.signature)

    def coefficients(self, n_channels: int) -> list[int]:
        vec = [0] * n_channels
        for m, c in self.signature:
            vec[m - 1] += c
        return vec


@dataclass
class AciProfile:
    powers: np.ndarray
    n_channels: int
    normalization: str = "none"
    is_pseudo: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        if self.normalization not in ("none", "per_N_squared"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        self.powers = np.asarray(self.powers, dtype=float)
        if self.powers.shape != (self.n_channels,):
            raise ValueError("powers must have one entry per channel")

    @property
    def raw(self) -> np.ndarray:
        if self.normalization == "per_N_squared":
            return self.powers * self.n_channels**2
        return self.powers

    @property
    def normalized(self) -> np.ndarray:
        if self.normalization == "per_N_squared":
            return self.powers
        return self.powers / self.n_channels**2


def _signature(coeffs: dict[int, int]) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(coeffs.items()))


def enumerate_products(plan: ChannelPlan, n: int, model: NonlinearityModel | None = None
                       ) -> list[IM3Product]:
    """Every distinct IM3 product landing in channel ``n``.

    Doubles come first ordered by ``k``, then triples ordered by ``(a, b)`` with
    ``a < b``.  Products touching a zero-amplitude channel are dropped.
    Amplitudes include ``|rho3|`` (1 when no model is given).
    """
    plan.check_index(n)
    g = abs(model.rho3) if model is not None else 1.0
    N = plan.n_channels
    amps = plan.amplitudes
    out = []
    for k in range(1, N + 1):
        if k == n or (k + n) % 2:
            continue
        i = (k + n) // 2
        ak, ai = amps[k - 1], amps[i - 1]
        if ak == 0.0 or ai == 0.0:
            continue
        out.append(IM3Product(ProductClass.DOUBLE, _signature({i: 2, k: -1}),
                              g * 0.75 * ak * ai * ai, (i, k)))
    for a in range(1, N + 1):
        aa = amps[a - 1]
        if aa == 0.0:
            continue
        for b in range(max(a + 1, n + 1 - a), min(N, N + n - a) + 1):
            c = a + b - n
            if c == a or c == b:
                continue
            ab, ac = amps[b - 1], amps[c - 1]
            if ab == 0.0 or ac == 0.0:
                continue
            out.append(IM3Product(ProductClass.TRIPLE, _signature({a: 1, b: 1, c: -1}),
                                  g * 1.5 * aa * ab * ac, (a, b, c)))
    return out


def aci_power(plan: ChannelPlan, model: NonlinearityModel, n: int) -> float:
    """Expected ACI power in channel ``n`` for independent uniform phases."""
    plan.check_index(n)
    return kernels.channel_power(plan.amplitudes, n, model.rho3)


def aci_power_coherent(plan: ChannelPlan, model: NonlinearityModel, n: int,
                       phases: Sequence[float]) -> float:
    """ACI power in channel ``n`` for one fixed phase realization."""
    if len(phases) != plan.n_channels:
        raise ValueError(f"expected {plan.n_channels} phases, got {len(phases)}")
    return abs(phasor_sum(enumerate_products(plan, n, model), phases)) ** 2 / 2


def signal_term_amplitude(plan: ChannelPlan, model: NonlinearityModel, k: int) -> float:
    """Output component at ``f_k`` co-phased with carrier ``k``.

    Linear gain plus cubic self- and cross-compression:
    ``rho1*A + rho3*(3/4*A**3 + 3/2*A*(P_T - A**2))``.
    """
    a = plan.amplitude(k)
    pt = total_power(plan)
    return model.rho1 * a + model.rho3 * (0.75 * a**3 + 1.5 * a * (pt - a * a))


def aci_profile(plan: ChannelPlan, model: NonlinearityModel,
                normalization: str = "none") -> AciProfile:
    powers = np.array(kernels.profile_powers(plan.amplitudes, model.rho3))
    if normalization == "per_N_squared":
        powers = powers / plan.n_channels**2
    return AciProfile(powers, plan.n_channels, normalization,
                      tuple(ch.is_pseudo for ch in plan.channels))


def power_db(power, reference: float = 1.0):
    """``10*log10(power/reference)``; zero power maps to -inf."""
    p = np.asarray(power, dtype=float) / reference
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(p)
    return float(out) if out.ndim == 0 else out


def phasor_sum(products: Sequence[IM3Product], phases: Sequence[float]) -> complex:
    return sum((p.amplitude * cmath.exp(1j * p.phase(phases)) for p in products), 0j)


def coherent_upper_bound(plan: ChannelPlan, model: NonlinearityModel, n: int) -> float:
    """All products in phase: ``(sum of amplitudes)**2 / 2``."""
    return math.fsum(p.amplitude for p in enumerate_products(plan, n, model)) ** 2 / 2
