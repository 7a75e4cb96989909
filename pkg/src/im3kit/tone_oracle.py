"""Time-domain check of the analytic ACI powers with unmodulated tones.

The N-tone waveform is synthesized on a grid where every carrier and every
IM3 product falls exactly on a DFT bin, passed through the polynomial device,
and the phasor at each channel frequency is read off.  Removing the known
signal component leaves the intermodulation phasor, whose power is averaged
over random phase draws.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .channel_plan import ChannelPlan, NonlinearityModel
from .im3_engine import signal_term_amplitude

MAX_SAMPLES = 2**24
CSV_HEADER = "# im3-kit v1"
# bin-alignment tolerance, in cycles per record
_ON_BIN_TOL = 1e-9


class GridError(ValueError):
    """Simulation grid cannot represent the plan without aliasing or leakage."""


@dataclass(frozen=True)
class PhaseRealization:
    phases: tuple[float, ...]
    seed: int | None = None

    @classmethod
    def draw(cls, seed: int, trial: int, n_channels: int) -> "PhaseRealization":
        """Uniform phases that depend only on (seed, trial, channel)."""
        rng = np.random.default_rng([seed, trial])
        return cls(tuple(rng.uniform(0.0, 2 * math.pi, n_channels)), seed)

    @classmethod
    def zeros(cls, n_channels: int) -> "PhaseRealization":
        return cls((0.0,) * n_channels)


@dataclass(frozen=True)
class SimulationGrid:
    sample_rate: float
    num_samples: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise GridError("sample_rate must be positive")
        if not 1 <= self.num_samples <= MAX_SAMPLES:
            raise GridError(f"num_samples must be in 1..{MAX_SAMPLES}, got {self.num_samples}")

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.num_samples) / self.sample_rate

    def bin_of(self, f: float) -> int:
        cycles = f * self.duration
        b = round(cycles)
        if abs(cycles - b) > _ON_BIN_TOL * max(1.0, abs(cycles)):
            raise GridError(f"frequency {f} is not on a DFT bin (f*duration = {cycles})")
        return b

    def validate(self, plan: ChannelPlan) -> None:
        f_max = max(plan.frequencies)
        if self.sample_rate <= 6 * f_max:
            raise GridError(
                f"sample_rate {self.sample_rate} must exceed 6*f_max = {6 * f_max} "
                "so cubic products do not alias")
        if plan.n_channels > 1 and plan.f0 <= (plan.n_channels - 1) * plan.delta_f:
            raise GridError("need f0 > (N-1)*delta_f so IM3 products do not fold at 0 Hz")
        for f in plan.frequencies:
            self.bin_of(f)
        self.bin_of(plan.delta_f)


def default_grid(plan: ChannelPlan, oversample: int = 8) -> SimulationGrid:
    """One period of ``delta_f``, sampled at ``oversample*3*f_max`` rounded up
    to a power-of-two multiple of ``delta_f``."""
    f_max = max(plan.frequencies)
    ratio = oversample * 3 * f_max / plan.delta_f
    num = 1 << max(3, math.ceil(math.log2(ratio)))
    grid = SimulationGrid(num * plan.delta_f, num)
    grid.validate(plan)
    return grid


def oracle_plan(plan: ChannelPlan) -> ChannelPlan:
    """Copy of ``plan`` relocated to a grid the oracle can simulate leak-free."""
    from .channel_plan import default_f0

    return plan.with_f0(default_f0(plan.n_channels, plan.delta_f))


def synthesize(plan: ChannelPlan, phases: PhaseRealization | Sequence[float],
               grid: SimulationGrid) -> np.ndarray:
    theta = np.asarray(getattr(phases, "phases", phases), dtype=float)
    if theta.shape != (plan.n_channels,):
        raise ValueError(f"expected {plan.n_channels} phases, got {theta.shape}")
    grid.validate(plan)
    t = grid.times
    x = np.zeros(grid.num_samples)
    for f, a, th in zip(plan.frequencies, plan.amplitudes, theta):
        if a != 0.0:
            x += a * np.cos(2 * np.pi * f * t + th)
    return x


def apply_nonlinearity(x, model: NonlinearityModel) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return model.rho1 * x + model.rho3 * x**3


def channel_bin_phasor(y, grid: SimulationGrid, f: float) -> complex:
    """Complex amplitude ``C*exp(j*phi)`` of the component ``C*cos(2*pi*f*t + phi)``."""
    y = np.asarray(y, dtype=float)
    b = grid.bin_of(f)
    if not 0 < b < grid.num_samples / 2:
        raise GridError(f"frequency {f} must lie strictly between 0 and Nyquist")
    m = np.arange(grid.num_samples)
    X = np.dot(y, np.exp(-2j * np.pi * b * m / grid.num_samples))
    return complex(2.0 * X / grid.num_samples)


def _batch_phasors(plan: ChannelPlan, model: NonlinearityModel, theta: np.ndarray,
                   grid: SimulationGrid) -> np.ndarray:
    """Channel-bin phasors of the device output, one row per phase draw."""
    M = grid.num_samples
    m = np.arange(M)
    bins = np.array([grid.bin_of(f) for f in plan.frequencies])
    carriers = np.exp(2j * np.pi * np.outer(bins, m) / M)
    amps = np.asarray(plan.amplitudes)
    x = ((amps * np.exp(1j * theta)) @ carriers).real
    y = model.rho1 * x + model.rho3 * x**3
    return np.fft.rfft(y, axis=1)[:, bins] * (2.0 / M)


def residual_powers(plan: ChannelPlan, model: NonlinearityModel,
                    phases: PhaseRealization | Sequence[float],
                    grid: SimulationGrid | None = None) -> np.ndarray:
    """Measured intermod power in every channel for one phase realization."""
    theta = np.asarray(getattr(phases, "phases", phases), dtype=float)
    grid = grid or default_grid(plan)
    grid.validate(plan)
    ph = _batch_phasors(plan, model, theta[None, :], grid)[0]
    sig = np.array([signal_term_amplitude(plan, model, k) for k in range(1, plan.n_channels + 1)])
    res = ph - sig * np.exp(1j * theta)
    return np.abs(res) ** 2 / 2


@dataclass(frozen=True)
class McResult:
    mean: np.ndarray
    stderr: np.ndarray
    trials: int

    def channel(self, n: int) -> tuple[float, float]:
        return float(self.mean[n - 1]), float(self.stderr[n - 1])


def measure_aci_profile_mc(plan: ChannelPlan, model: NonlinearityModel, trials: int = 2000,
                           seed: int = 0, grid: SimulationGrid | None = None,
                           method: str = "analytic", batch: int = 512,
                           workers: int = 1) -> McResult:
    """Monte-Carlo ACI power of every channel over random carrier phases.

    ``method="analytic"`` subtracts the known signal phasor; ``"projected"``
    estimates the co-phased component from the data itself (the average of the
    phasor rotated back by ``theta_n``) so the check does not lean on the
    analytic signal amplitude.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if method not in ("analytic", "projected"):
        raise ValueError(f"unknown method {method!r}")
    grid = grid or default_grid(plan)
    grid.validate(plan)
    N = plan.n_channels
    theta = np.array([PhaseRealization.draw(seed, t, N).phases for t in range(trials)])
    starts = list(range(0, trials, batch))

    def run(s):
        return _batch_phasors(plan, model, theta[s:s + batch], grid)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(run, starts))
    else:
        chunks = [run(s) for s in starts]
    ph = np.concatenate(chunks, axis=0)

    rot = np.exp(1j * theta)
    if method == "analytic":
        sig = np.array([signal_term_amplitude(plan, model, k) for k in range(1, N + 1)])
    else:
        sig = np.mean(ph * np.conj(rot), axis=0)
    p = np.abs(ph - sig * rot) ** 2 / 2
    mean = p.mean(axis=0)
    stderr = p.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(N)
    return McResult(mean, stderr, trials)


def measure_aci_mc(plan: ChannelPlan, model: NonlinearityModel, n: int, trials: int = 2000,
                   seed: int = 0, grid: SimulationGrid | None = None, **kw) -> dict:
    plan.check_index(n)
    res = measure_aci_profile_mc(plan, model, trials, seed, grid, **kw)
    mean, stderr = res.channel(n)
    return {"mean": mean, "stderr": stderr}


def power_spectrum(y, grid: SimulationGrid) -> tuple[np.ndarray, np.ndarray]:
    """One-sided tone-power spectrum: a cosine of peak C reads C**2/2 at its bin."""
    y = np.asarray(y, dtype=float)
    M = grid.num_samples
    X = np.fft.rfft(y) / M
    p = np.abs(X) ** 2
    p[1:] *= 2
    if M % 2 == 0:
        p[-1] /= 2
    freqs = np.arange(len(p)) / grid.duration
    return freqs, p


def emit_fig1_data(plan: ChannelPlan, phases: PhaseRealization | Sequence[float],
                   model: NonlinearityModel, grid: SimulationGrid | None = None,
                   floor_db: float = -300.0) -> dict:
    """Waveforms and spectra of the input, the device output and its intermod part."""
    theta = np.asarray(getattr(phases, "phases", phases), dtype=float)
    grid = grid or default_grid(plan)
    x = synthesize(plan, theta, grid)
    y = apply_nonlinearity(x, model)
    t = grid.times
    sig = np.zeros_like(y)
    for k, (f, th) in enumerate(zip(plan.frequencies, theta), start=1):
        c = signal_term_amplitude(plan, model, k)
        if c != 0.0:
            sig += c * np.cos(2 * np.pi * f * t + th)
    im = y - sig
    out = {}
    for name, series in (("x", x), ("y3", y), ("intermod", im)):
        freqs, p = power_spectrum(series, grid)
        with np.errstate(divide="ignore"):
            db = np.maximum(10 * np.log10(p), floor_db)
        out[f"{name}_waveform"] = np.column_stack([t, series])
        out[f"{name}_spectrum"] = np.column_stack([freqs, db])
    return out


def write_series_csv(path: str | Path, rows, columns: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])


def write_fig1_csv(data: dict, directory: str | Path, prefix: str = "fig1") -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for key, arr in data.items():
        path = directory / f"{prefix}_{key}.csv"
        cols = ("t", "value") if key.endswith("waveform") else ("freq_hz", "power_db")
        write_series_csv(path, arr, cols)
        written.append(path)
    return written
