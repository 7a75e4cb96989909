"""Channel plans on a uniform frequency grid.

A plan is N channels at ``f0 + (k - 1) * delta_f`` (k = 1..N), each carrying a
cosine of peak amplitude ``A_k``.  Unequally spaced carrier sets are mapped onto
a grid by :func:`gridify`, which fills the gaps with zero-amplitude pseudo
channels.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

MAX_GRID_CHANNELS = 10_000
# decimal exponents tried by gridify before giving up
_MAX_DECIMAL_EXPONENT = 15


class PlanError(ValueError):
    """Invalid channel plan or plan file."""


class IncommensuratePlanError(PlanError):
    """No uniform grid fits the requested frequencies within tolerance."""

    def __init__(self, message: str, worst_frequency: float | None = None):
        super().__init__(message)
        self.worst_frequency = worst_frequency


@dataclass(frozen=True)
class Channel:
    index: int
    center_frequency: float
    amplitude: float
    is_pseudo: bool = False

    def __post_init__(self):
        if self.amplitude < 0 or not math.isfinite(self.amplitude):
            raise PlanError(f"channel {self.index}: amplitude must be finite and >= 0")
        if self.is_pseudo and self.amplitude != 0:
            raise PlanError(f"channel {self.index}: pseudo channels carry zero amplitude")


@dataclass(frozen=True)
class ChannelPlan:
    """Uniform grid of channels; index k sits at ``f0 + (k-1)*delta_f``."""

    channels: tuple[Channel, ...]
    f0: float
    delta_f: float

    def __post_init__(self):
        if not (self.delta_f > 0 and math.isfinite(self.delta_f)):
            raise PlanError(f"delta_f must be positive, got {self.delta_f!r}")
        if not self.channels:
            raise PlanError("a plan needs at least one channel")
        for pos, ch in enumerate(self.channels, start=1):
            if ch.index != pos:
                raise PlanError(f"channel indices must run 1..N without gaps (got {ch.index} at {pos})")
            if ch.center_frequency != self.frequency(pos):
                raise PlanError(f"channel {pos} is off the grid")

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def amplitudes(self) -> tuple[float, ...]:
        return tuple(ch.amplitude for ch in self.channels)

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(ch.center_frequency for ch in self.channels)

    @property
    def real_indices(self) -> tuple[int, ...]:
        return tuple(ch.index for ch in self.channels if not ch.is_pseudo)

    def frequency(self, k: int) -> float:
        return self.f0 + (k - 1) * self.delta_f

    def amplitude(self, k: int) -> float:
        self.check_index(k)
        return self.channels[k - 1].amplitude

    def check_index(self, k: int) -> None:
        if not 1 <= k <= self.n_channels:
            raise IndexError(f"channel {k} out of range 1..{self.n_channels}")

    def with_f0(self, f0: float) -> "ChannelPlan":
        """Same amplitudes and spacing, grid shifted to start at ``f0``."""
        return build_uniform_plan(f0, self.delta_f, self.amplitudes)

    def reversed(self) -> "ChannelPlan":
        return build_uniform_plan(self.f0, self.delta_f, self.amplitudes[::-1])


@dataclass(frozen=True)
class NonlinearityModel:
    """Memoryless device ``y = rho1*x + rho3*x**3``."""

    rho1: float = 0.0
    rho3: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.rho1) and math.isfinite(self.rho3)):
            raise PlanError("nonlinearity coefficients must be finite")


def build_uniform_plan(f0: float, delta_f: float, amplitudes: Sequence[float]) -> ChannelPlan:
    """Plan with one channel per entry of ``amplitudes``; zero entries become pseudo channels."""
    if not (delta_f > 0 and math.isfinite(delta_f)):
        raise PlanError(f"delta_f must be positive, got {delta_f!r}")
    amps = [float(a) for a in amplitudes]
    if not amps:
        raise PlanError("amplitudes must be nonempty")
    for k, a in enumerate(amps, start=1):
        if a < 0 or not math.isfinite(a):
            raise PlanError(f"amplitude of channel {k} must be finite and >= 0, got {a!r}")
    n = len(amps)
    if n > 1 and f0 <= (n - 1) * delta_f:
        warnings.warn(
            f"f0={f0} <= (N-1)*delta_f={(n - 1) * delta_f}: some IM3 frequencies are not positive; "
            "the analytic engine is unaffected but waveform oracles need a shifted plan",
            stacklevel=2,
        )
    channels = tuple(
        Channel(k, f0 + (k - 1) * delta_f, a, is_pseudo=(a == 0.0))
        for k, a in enumerate(amps, start=1)
    )
    return ChannelPlan(channels, float(f0), float(delta_f))


def equal_plan(n_channels: int, amplitude: float = 1.0, delta_f: float = 1.0,
               f0: float | None = None) -> ChannelPlan:
    """Equal-amplitude plan; default ``f0`` keeps every IM3 frequency positive."""
    if n_channels < 1:
        raise PlanError("n_channels must be >= 1")
    if f0 is None:
        f0 = default_f0(n_channels, delta_f)
    return build_uniform_plan(f0, delta_f, [amplitude] * n_channels)


def default_f0(n_channels: int, delta_f: float) -> float:
    # 16*delta_f covers N <= 16; larger plans step up in multiples of 16
    return 16 * delta_f * max(1, math.ceil(n_channels / 16))


def _exact(value: float, exponent: int) -> int:
    return round(Fraction(value) * 10**exponent)


def gridify(frequencies: Sequence[float], amplitudes: Sequence[float],
            rel_tolerance: float = 1e-9) -> ChannelPlan:
    """Place arbitrary carriers on the coarsest uniform grid that fits them.

    Frequencies are rounded to integers at successive decimal scales; the grid
    spacing at each scale is the GCD of the integer offsets.  The first scale at
    which every carrier sits within ``rel_tolerance * delta_f`` of its grid
    point wins.  Grid slots without a carrier become pseudo channels.
    """
    freqs = [float(f) for f in frequencies]
    amps = [float(a) for a in amplitudes]
    if not freqs:
        raise PlanError("frequencies must be nonempty")
    if len(freqs) != len(amps):
        raise PlanError("frequencies and amplitudes differ in length")
    if any(b <= a for a, b in zip(freqs, freqs[1:])):
        raise PlanError("frequencies must be strictly increasing")
    if not 0 <= rel_tolerance < 0.5:
        raise PlanError("rel_tolerance must lie in [0, 0.5)")
    if len(freqs) == 1:
        return build_uniform_plan(freqs[0], 1.0, amps)

    worst = None
    for exponent in range(_MAX_DECIMAL_EXPONENT + 1):
        ints = [_exact(f, exponent) for f in freqs]
        if any(b <= a for a, b in zip(ints, ints[1:])):
            continue
        step = 0
        for v in ints[1:]:
            step = math.gcd(step, v - ints[0])
        scale = Fraction(1, 10**exponent)
        delta = step * scale
        base = ints[0] * scale
        slots = [(v - ints[0]) // step for v in ints]
        n = slots[-1] + 1
        errors = [abs(Fraction(f) - (base + m * delta)) for f, m in zip(freqs, slots)]
        worst_err = max(errors)
        worst = freqs[errors.index(worst_err)]
        if worst_err > Fraction(rel_tolerance) * delta:
            continue
        if n > MAX_GRID_CHANNELS:
            raise IncommensuratePlanError(
                f"incommensurate plan: grid needs {n} channels (cap {MAX_GRID_CHANNELS})", worst)
        grid_amps = [0.0] * n
        for m, a in zip(slots, amps):
            grid_amps[m] = a
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            plan = build_uniform_plan(float(base), float(delta), grid_amps)
        # a zero-amplitude input carrier is still a real channel
        real = set(slots)
        channels = tuple(
            Channel(ch.index, ch.center_frequency, ch.amplitude, is_pseudo=(ch.index - 1) not in real)
            for ch in plan.channels
        )
        return ChannelPlan(channels, plan.f0, plan.delta_f)
    raise IncommensuratePlanError(
        f"incommensurate plan: no grid fits within rel_tolerance={rel_tolerance}; "
        f"worst-fitting frequency {worst}", worst)


def total_power(plan: ChannelPlan) -> float:
    """Sum of squared peak amplitudes (not the A**2/2 cosine powers)."""
    return math.fsum(a * a for a in plan.amplitudes)


def plan_from_dict(data: dict) -> ChannelPlan:
    """Build a plan from the JSON plan-file schema (uniform or gridify form)."""
    if not isinstance(data, dict):
        raise PlanError("plan file must hold a JSON object")
    if "amplitudes" not in data:
        raise PlanError("plan file: missing field 'amplitudes'")
    amps = data["amplitudes"]
    if not isinstance(amps, list) or not all(isinstance(a, (int, float)) for a in amps):
        raise PlanError("plan file: field 'amplitudes' must be a list of numbers")
    if "frequencies" in data:
        freqs = data["frequencies"]
        if not isinstance(freqs, list) or not all(isinstance(f, (int, float)) for f in freqs):
            raise PlanError("plan file: field 'frequencies' must be a list of numbers")
        return gridify(freqs, amps, float(data.get("rel_tolerance", 1e-9)))
    for key in ("f0", "delta_f"):
        if key not in data:
            raise PlanError(f"plan file: missing field '{key}'")
        if not isinstance(data[key], (int, float)):
            raise PlanError(f"plan file: field '{key}' must be a number")
    return build_uniform_plan(data["f0"], data["delta_f"], amps)


def load_plan(path: str | Path) -> ChannelPlan:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PlanError(f"cannot read plan file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanError(f"plan file {path}: invalid JSON ({exc.msg})") from exc
    return plan_from_dict(data)


def plan_to_dict(plan: ChannelPlan) -> dict:
    return {
        "f0": plan.f0,
        "delta_f": plan.delta_f,
        "amplitudes": list(plan.amplitudes),
        "is_pseudo": [ch.is_pseudo for ch in plan.channels],
    }
