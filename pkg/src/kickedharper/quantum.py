"""Floquet operators on the momentum lattice and long-time evolution.

Kick factors e^{-i x cos q} are applied exactly on a position grid of the
lattice size (cos q is diagonal there); free-evolution factors are diagonal
phases in momentum.  Rational effective Planck constants get bit-exact
diagonal phases via integer reduction, which keeps lattice periodicity exact
for the Bloch machinery and avoids large-argument phase loss at big |l|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import fft as _fft

from .errors import LatticeOverflowError, NumericalError, ResourceLimitError
from .lattice import (DKRM_GENERAL, DKRM_RESONANT, KHM, TWO_PI, EffPlanck,
                      ModelSpec, Wavepacket, edge_mass, momentum_variance)

DEFAULT_LEAK_THRESHOLD = 1e-10
DEFAULT_MAX_SITES = 2 ** 22
COEFF_TOL = 1e-14


# ── kick coefficients (momentum-basis bands) ───────────────────────────────

@dataclass(frozen=True)
class KickCoefficients:
    """Momentum-basis matrix elements c_m of e^{-i x cos q}, |m| <= cutoff."""

    x: float
    cutoff: int
    coeffs: np.ndarray = field(repr=False)
    tol: float = COEFF_TOL

    def coeff(self, m: int) -> complex:
        if abs(m) > self.cutoff:
            return 0.0 + 0.0j
        return complex(self.coeffs[m + self.cutoff])


@lru_cache(maxsize=64)
def _kick_coefficients_cached(x: float, tol: float):
    n_grid = 1 << max(9, math.ceil(math.log2(8 * (math.ceil(x) + 64))))
    grid = TWO_PI * np.arange(n_grid) / n_grid
    c = np.fft.fft(np.exp(-1j * x * np.cos(grid))) / n_grid
    mags = np.abs(c[: n_grid // 2 + 1])
    above = np.nonzero(mags >= tol)[0]
    cutoff = int(above.max(initial=0))
    if cutoff >= n_grid // 2:
        raise NumericalError("kick coefficient tail reaches the sampling grid edge")
    m = np.arange(-cutoff, cutoff + 1)
    coeffs = c[np.mod(m, n_grid)]
    coeffs.flags.writeable = False
    return cutoff, coeffs


def kick_coefficients(x: float, tol: float = COEFF_TOL) -> KickCoefficients:
    """Coefficients of the kick in the momentum basis, cut off once below tol."""
    if not (x >= 0 and math.isfinite(x)):
        raise ValueError("x must be finite and >= 0")
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    cutoff, coeffs = _kick_coefficients_cached(float(x), float(tol))
    return KickCoefficients(float(x), cutoff, coeffs, float(tol))


# ── Floquet factors ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class KickFactor:
    """Position-space kick e^{-i strength * cos q}."""

    strength: float


@dataclass(frozen=True)
class QuadraticPhase:
    """Momentum-diagonal phase e^{-i coeff * l^2 / 2} per site l.

    cycles, when given, is the exact value of coeff/(2*pi); the phase table is
    then reduced with integer arithmetic and is exactly periodic in l.
    """

    coeff: float
    cycles: Fraction | None = None
    description: str = ""

    def __post_init__(self):
        if self.cycles is not None:
            exact = TWO_PI * self.cycles.numerator / self.cycles.denominator
            if abs(self.coeff - exact) > 1e-12 * max(1.0, abs(exact)):
                raise ValueError("cycles tag inconsistent with coeff")

    def values(self, l) -> np.ndarray:
        l = np.asarray(l, dtype=np.int64)
        if self.cycles is not None:
            a = self.cycles.numerator
            b = self.cycles.denominator
            idx = (a % (2 * b)) * (l * l % (2 * b)) % (2 * b)
            table = np.exp(-1j * np.pi * np.arange(2 * b) / b)
            return table[idx]
        # l^2/2 is exact in float64 for |l| < 2^26
        return np.exp(-1j * self.coeff * (0.5 * l.astype(np.float64) ** 2))


@dataclass(frozen=True)
class HarperPhase:
    """Momentum-diagonal phase e^{-i strength * cos(hbar * l)} per site l."""

    strength: float
    planck: EffPlanck
    description: str = ""

    def values(self, l) -> np.ndarray:
        l = np.asarray(l, dtype=np.int64)
        rp = self.planck.rational_part
        if rp is not None:
            idx = (rp.num % rp.den) * (l % rp.den) % rp.den
            angles = TWO_PI * np.arange(rp.den) / rp.den
            table = np.exp(-1j * self.strength * np.cos(angles))
            return table[idx]
        return np.exp(-1j * self.strength * np.cos(self.planck.value * l.astype(np.float64)))


DiagonalFactor = (QuadraticPhase, HarperPhase)


def floquet_factors(model: ModelSpec) -> tuple:
    """One period of the model as factors in application order (first acts first)."""
    hb = model.hbar_eff.value
    rp = model.hbar_eff.rational_part
    cyc = Fraction(rp.num, rp.den) if rp is not None else None
    if model.kind == KHM:
        return (KickFactor(model.k1 / hb),
                HarperPhase(model.k2 / hb, model.hbar_eff, "harper cosine"))
    first_drift = QuadraticPhase(hb, cyc, "drift between the kicks")
    if model.kind == DKRM_RESONANT:
        closing = (QuadraticPhase(-hb, None if cyc is None else -cyc,
                                  "inverted drift closing the period"),)
    else:
        nu, mu = model.resonance
        res = Fraction(2 * nu, mu)
        res_coeff = TWO_PI * res.numerator / res.denominator
        if cyc is not None:
            closing = (QuadraticPhase(res_coeff - hb, res - cyc,
                                      "resonant drift closing the period"),)
        else:
            closing = (QuadraticPhase(res_coeff, res, "resonant drift"),
                       QuadraticPhase(-hb, None, "inverted drift"))
    return (KickFactor(model.k1 / hb), first_drift,
            KickFactor(model.k2 / hb)) + closing


# ── applying factors on the lattice ────────────────────────────────────────

def _kick_table(strength: float, n: int) -> np.ndarray:
    return np.exp(-1j * strength * np.cos(TWO_PI * np.arange(n) / n))


def apply_kick(psi: Wavepacket, x: float) -> Wavepacket:
    """Multiply by e^{-i x cos q} on the position grid of the lattice size.

    Equals banded convolution with kick_coefficients(|x|) as long as the
    state keeps clear of the lattice edges (circular wrap otherwise).
    """
    out = _fft.fft(_fft.ifft(psi.amps) * _kick_table(x, psi.n_sites))
    return psi.with_amps(out)


def apply_quadratic_phase(psi: Wavepacket, tau: float,
                          cycles: Fraction | None = None) -> Wavepacket:
    """Multiply amplitudes by e^{-i tau l^2 / 2} sitewise."""
    return psi.with_amps(psi.amps * QuadraticPhase(tau, cycles).values(psi.sites()))


@lru_cache(maxsize=4)
def _kernel_tables(model: ModelSpec, l_min: int, n: int) -> tuple:
    sites = np.arange(l_min, l_min + n, dtype=np.int64)
    ops = []
    for f in floquet_factors(model):
        if isinstance(f, KickFactor):
            ops.append(("kick", _kick_table(f.strength, n)))
        else:
            ops.append(("diag", f.values(sites)))
    return tuple(ops)


def trigger_margin(model: ModelSpec, n_sites: int) -> int:
    """Edge-sentinel width: combined kick bandwidth plus padding, clipped to fit."""
    width = 8
    for f in floquet_factors(model):
        if isinstance(f, KickFactor):
            width += kick_coefficients(abs(f.strength)).cutoff
    return max(1, min(width, n_sites // 2 - 1))


def apply_floquet(model: ModelSpec, psi: Wavepacket, *,
                  leak_threshold: float = DEFAULT_LEAK_THRESHOLD,
                  margin: int | None = None) -> Wavepacket:
    """Apply one full period of the model's Floquet operator.

    Raises LatticeOverflowError when the resulting state carries more than
    leak_threshold probability within `margin` sites of the lattice edge;
    the caller is expected to grow the lattice and retry.
    """
    amps = psi.amps
    for op, table in _kernel_tables(model, psi.l_min, psi.n_sites):
        if op == "kick":
            amps = _fft.fft(_fft.ifft(amps) * table)
        else:
            amps = amps * table
    out = psi.with_amps(amps)
    m = trigger_margin(model, psi.n_sites) if margin is None else margin
    if edge_mass(out, m) > leak_threshold:
        raise LatticeOverflowError(
            f"edge mass beyond {leak_threshold:g} on a {psi.n_sites}-site lattice")
    return out


# ── long-time evolution ────────────────────────────────────────────────────

@dataclass
class DiffusionSeries:
    """Recorded (step, momentum variance, edge mass) samples of one evolution."""

    steps: np.ndarray
    variance: np.ndarray
    leak: np.ndarray
    model: ModelSpec
    final_norm: float = 1.0

    def __post_init__(self):
        self.steps = np.asarray(self.steps, dtype=np.int64)
        self.variance = np.asarray(self.variance, dtype=np.float64)
        self.leak = np.asarray(self.leak, dtype=np.float64)
        if not (len(self.steps) == len(self.variance) == len(self.leak)):
            raise ValueError("series arrays must have equal length")
        if np.any(np.diff(self.steps) <= 0):
            raise ValueError("steps must be strictly increasing")
        if np.any(self.variance < 0):
            raise ValueError("variance must be >= 0")


def evolve(model: ModelSpec, psi0: Wavepacket, n_steps: int,
           record_every: int = 1, *,
           leak_threshold: float = DEFAULT_LEAK_THRESHOLD,
           max_sites: int = DEFAULT_MAX_SITES) -> DiffusionSeries:
    """Iterate the Floquet map, growing the lattice whenever mass nears an edge.

    Growth is symmetric doubling with zero padding, and the step that tripped
    the edge sentinel is retried on the larger lattice.  Records are taken at
    step 0 and every record_every periods.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    psi = psi0
    l0 = int(psi.l_min + np.argmax(np.abs(psi.amps)))
    steps = [0]
    variance = [momentum_variance(psi, l0)]
    leak = [edge_mass(psi, trigger_margin(model, psi.n_sites))]
    for t in range(1, n_steps + 1):
        while True:
            try:
                nxt = apply_floquet(model, psi, leak_threshold=leak_threshold)
                break
            except LatticeOverflowError:
                if 2 * psi.n_sites > max_sites:
                    raise ResourceLimitError(
                        f"lattice would exceed {max_sites} sites at step {t}") from None
                psi = psi.doubled()
        psi = nxt
        if t % record_every == 0:
            steps.append(t)
            variance.append(momentum_variance(psi, l0))
            leak.append(edge_mass(psi, trigger_margin(model, psi.n_sites)))
    final_norm = psi.norm()
    if abs(final_norm - 1.0) > 1e-8:
        raise NumericalError(f"norm drifted to {final_norm:.12f} after {n_steps} steps")
    return DiffusionSeries(np.array(steps), np.array(variance), np.array(leak),
                           model, final_norm)
