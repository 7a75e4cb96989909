"""Multicarrier QPSK through the cubic device.

Each carrier is rectangular-pulse QPSK at unit envelope, so carrier ``k`` has
mean power ``A_k**2/2`` like the unmodulated tone.  After the device, the
signal-proportional component is removed and the residual periodogram is
integrated over each channel band ``[f_n - delta_f/2, f_n + delta_f/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import welch

from .channel_plan import ChannelPlan, NonlinearityModel
from .im3_engine import aci_profile, power_db, signal_term_amplitude
from .tone_oracle import GridError, SimulationGrid

_CONSTELLATION = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))


@dataclass(frozen=True)
class QpskConfig:
    symbol_rate: float
    samples_per_symbol: int = 512
    num_symbols: int = 4096
    pulse: str = "rectangular"
    seed: int = 0
    segments: int = 16
    # every symbol of a carrier repeats one constellation point (tone limit)
    unmodulated: bool = False

    def __post_init__(self):
        if self.pulse != "rectangular":
            raise ValueError(f"unsupported pulse {self.pulse!r}")
        if self.samples_per_symbol < 8:
            raise ValueError("samples_per_symbol must be >= 8")
        if self.symbol_rate <= 0 or self.num_symbols < 1:
            raise ValueError("symbol_rate and num_symbols must be positive")
        if self.segments < 1 or self.num_symbols % self.segments:
            raise ValueError("num_symbols must split evenly into segments")

    @property
    def sample_rate(self) -> float:
        return self.symbol_rate * self.samples_per_symbol

    @property
    def grid(self) -> SimulationGrid:
        return SimulationGrid(self.sample_rate, self.samples_per_symbol * self.num_symbols)

    def check(self, plan: ChannelPlan) -> None:
        if self.symbol_rate > plan.delta_f / 2 * (1 + 1e-12):
            raise ValueError(f"symbol_rate {self.symbol_rate} exceeds delta_f/2 = {plan.delta_f / 2}")
        if self.sample_rate <= 6 * max(plan.frequencies):
            raise GridError("sample rate must exceed 6*f_max so cubic products do not alias")


def default_config(plan: ChannelPlan, seed: int = 0, **kw) -> QpskConfig:
    """Symbol rate ``delta_f/2``; samples per symbol a power of two with
    ``sample_rate >= 8*f_max``."""
    rs = plan.delta_f / 2
    sps = 1 << max(3, math.ceil(math.log2(8 * max(plan.frequencies) / rs)))
    return QpskConfig(symbol_rate=rs, samples_per_symbol=sps, seed=seed, **kw)


def qpsk_symbols(plan: ChannelPlan, cfg: QpskConfig) -> np.ndarray:
    """Unit-magnitude symbol streams, shape ``(N, num_symbols)``; pseudo rows are 0."""
    out = np.zeros((plan.n_channels, cfg.num_symbols), dtype=complex)
    for k, ch in enumerate(plan.channels):
        if ch.amplitude == 0.0:
            continue
        rng = np.random.default_rng([cfg.seed, k])
        if cfg.unmodulated:
            out[k] = _CONSTELLATION[rng.integers(4)]
        else:
            out[k] = _CONSTELLATION[rng.integers(0, 4, cfg.num_symbols)]
    return out


def _passband(symbols: np.ndarray, f: float, grid: SimulationGrid, sps: int) -> np.ndarray:
    """``Re(s(t) exp(j 2 pi f t)) = I cos - Q sin`` for a rectangular-pulse stream."""
    s = np.repeat(symbols, sps)
    t = grid.times
    return s.real * np.cos(2 * np.pi * f * t) - s.imag * np.sin(2 * np.pi * f * t)


def _sps(y_len: int, symbols: np.ndarray) -> int:
    sps, rem = divmod(y_len, symbols.shape[1])
    if rem:
        raise ValueError("waveform length is not a whole number of symbols")
    return sps


def synthesize_qpsk(plan: ChannelPlan, cfg: QpskConfig, grid: SimulationGrid | None = None,
                    symbols: np.ndarray | None = None) -> np.ndarray:
    cfg.check(plan)
    grid = grid or cfg.grid
    if symbols is None:
        symbols = qpsk_symbols(plan, cfg)
    sps = _sps(grid.num_samples, symbols)
    x = np.zeros(grid.num_samples)
    for k, ch in enumerate(plan.channels):
        if ch.amplitude != 0.0:
            x += ch.amplitude * _passband(symbols[k], ch.center_frequency, grid, sps)
    return x


def intermod_residual(y3, plan: ChannelPlan, symbols: np.ndarray, grid: SimulationGrid,
                      model: NonlinearityModel | None = None, method: str = "lstsq") -> np.ndarray:
    """Remove the signal-proportional part of the device output.

    ``method="lstsq"`` subtracts the least-squares fit of the transmitted
    carrier waveforms.  ``method="analytic"`` subtracts each carrier scaled by
    its known compression amplitude, which is exact for constant-envelope
    carriers and needs ``model``.
    """
    y3 = np.asarray(y3, dtype=float)
    sps = _sps(len(y3), symbols)
    real = [k for k, ch in enumerate(plan.channels) if ch.amplitude != 0.0]
    basis = [plan.channels[k].amplitude * _passband(symbols[k], plan.channels[k].center_frequency,
                                                    grid, sps) for k in real]
    if method == "analytic":
        if model is None:
            raise ValueError("analytic residual needs the nonlinearity model")
        res = y3.copy()
        for k, s in zip(real, basis):
            res -= signal_term_amplitude(plan, model, k + 1) / plan.channels[k].amplitude * s
        return res
    if method != "lstsq":
        raise ValueError(f"unknown method {method!r}")
    if not basis:
        return y3.copy()
    B = np.array(basis)
    gram = B @ B.T
    if np.linalg.cond(gram) > 1e10:
        raise np.linalg.LinAlgError("singular projection: carrier waveforms are not independent")
    coef = np.linalg.solve(gram, B @ y3)
    return y3 - coef @ B


@dataclass
class BandPowerReport:
    per_channel_power: np.ndarray
    band_edges: np.ndarray
    normalized_to_center: np.ndarray
    analytic_power: np.ndarray
    center_scale: float

    @property
    def error_db(self) -> np.ndarray:
        return power_db(self.normalized_to_center) - power_db(self.analytic_power)

    def csv_rows(self, db_reference: float = 1.0):
        for n, (p, q) in enumerate(zip(self.per_channel_power, self.normalized_to_center), start=1):
            yield n, power_db(p, db_reference), power_db(q, db_reference)


def center_channels(n_channels: int) -> list[int]:
    if n_channels % 2:
        return [(n_channels + 1) // 2]
    return [n_channels // 2, n_channels // 2 + 1]


def band_powers(residual, plan: ChannelPlan, grid: SimulationGrid, segments: int = 16):
    """Welch-averaged power of ``residual`` in each channel band."""
    nper = len(residual) // segments
    f, psd = welch(residual, fs=grid.sample_rate, window="hann", nperseg=nper,
                   noverlap=0, detrend=False, scaling="density")
    df = f[1] - f[0]
    edges = np.array([(fc - plan.delta_f / 2, fc + plan.delta_f / 2) for fc in plan.frequencies])
    powers = np.array([psd[(f >= lo) & (f < hi)].sum() * df for lo, hi in edges])
    return powers, edges


def measure_qpsk_aci(plan: ChannelPlan, model: NonlinearityModel, cfg: QpskConfig | None = None,
                     grid: SimulationGrid | None = None, method: str = "analytic") -> BandPowerReport:
    """Simulated per-channel ACI band power, scaled so the center channel
    matches the analytic value."""
    cfg = cfg or default_config(plan)
    grid = grid or cfg.grid
    symbols = qpsk_symbols(plan, cfg)
    x = synthesize_qpsk(plan, cfg, grid, symbols)
    y = model.rho1 * x + model.rho3 * x**3
    del x
    res = intermod_residual(y, plan, symbols, grid, model, method)
    del y
    powers, edges = band_powers(res, plan, grid, cfg.segments)
    analytic = aci_profile(plan, model).powers
    centers = [c - 1 for c in center_channels(plan.n_channels)]
    sim_c = powers[centers].mean()
    scale = analytic[centers].mean() / sim_c if sim_c > 0 else float("nan")
    return BandPowerReport(powers, edges, powers * scale, analytic, float(scale))


def with_seed(cfg: QpskConfig, seed: int) -> QpskConfig:
    return replace(cfg, seed=seed)
