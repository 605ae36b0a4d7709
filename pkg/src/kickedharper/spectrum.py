"""Bloch reduction of lattice-periodic Floquet operators and butterfly scans.

With hbar_eff = 2*pi*num/den the momentum-diagonal factors repeat after a
finite number of sites, so the Floquet operator block-diagonalizes over a
Bloch angle theta into finite unitaries.  Their eigenphases, swept over a
Farey set of rationals, form the quasi-energy butterflies.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError
from .lattice import (DKRM_RESONANT, KHM, TWO_PI, EffPlanck, ModelSpec,
                      Rational, farey_sequence)
from .quantum import (KickCoefficients, KickFactor, floquet_factors,
                      kick_coefficients)

UNITARITY_TOL = 1e-8
EIGENMOD_TOL = 1e-6


# ── lattice periodicity ────────────────────────────────────────────────────

def lattice_period(model: ModelSpec) -> int:
    """Smallest P with every momentum-diagonal factor P-periodic in the site index.

    Candidate periods follow from the denominator structure of the phases and
    are then verified against the actual factor values; a candidate set that
    fails verification is a bug in the phase tables, not something to paper
    over, hence the hard error.
    """
    rp = model.hbar_eff.rational_part
    if rp is None:
        raise ConfigError("spectral reduction needs hbar_eff tagged as 2*pi*num/den")
    s = rp.den
    if model.kind == KHM:
        candidates = (s,)
    elif model.kind == DKRM_RESONANT:
        candidates = (s, 2 * s)
    else:
        base = math.lcm(s, model.resonance_order[1])
        candidates = (base, 2 * base, 4 * base)
    diags = [f for f in floquet_factors(model) if not isinstance(f, KickFactor)]
    for period in candidates:
        window = np.arange(0, 3 * period, dtype=np.int64)
        if all(np.max(np.abs(d.values(window + period) - d.values(window))) < 1e-12
               for d in diags):
            return period
    raise NumericalError(f"no verified lattice period among {candidates}")


def theta_grid(count: int) -> np.ndarray:
    """count Bloch angles 2*pi*j/count, j = 0..count-1 (closed under negation)."""
    if count < 1:
        raise ValueError("theta count must be >= 1")
    return TWO_PI * np.arange(count) / count


# ── Bloch blocks ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class BlochMatrix:
    """One period x period unitary block of the Floquet operator at angle theta."""

    period: int
    theta: float
    matrix: np.ndarray = field(repr=False)


def _kick_block(coeffs: KickCoefficients, period: int, theta: float) -> np.ndarray:
    block = np.zeros((period, period), dtype=np.complex128)
    offsets = np.subtract.outer(np.arange(period), np.arange(period))
    n_max = (coeffs.cutoff + period) // period
    for n in range(-n_max, n_max + 1):
        m = offsets + n * period
        mask = np.abs(m) <= coeffs.cutoff
        if mask.any():
            block[mask] += coeffs.coeffs[m[mask] + coeffs.cutoff] * np.exp(1j * n * theta)
    return block


def build_bloch_matrix(model: ModelSpec, theta: float,
                       coeffs: dict[float, KickCoefficients] | None = None) -> BlochMatrix:
    """Assemble the Bloch block at angle theta by multiplying factor blocks."""
    period = lattice_period(model)
    sites = np.arange(period, dtype=np.int64)
    u = None
    for f in floquet_factors(model):
        if isinstance(f, KickFactor):
            c = coeffs.get(f.strength) if coeffs else None
            if c is None:
                c = kick_coefficients(f.strength)
            block = _kick_block(c, period, theta)
            u = block if u is None else block @ u
        else:
            vals = f.values(sites)
            u = np.diag(vals) if u is None else vals[:, None] * u
    err = np.max(np.abs(u.conj().T @ u - np.eye(period)))
    if err > UNITARITY_TOL:
        raise NumericalError(f"Bloch block unitarity defect {err:.3e}")
    return BlochMatrix(period, float(theta), u)


def quasienergies(bloch: BlochMatrix) -> np.ndarray:
    """Sorted eigenphases of the block, as epsilon in (-pi, pi]."""
    lam = np.linalg.eigvals(bloch.matrix)
    drift = np.max(np.abs(np.abs(lam) - 1.0))
    if drift > EIGENMOD_TOL:
        raise NumericalError(f"eigenvalue modulus drift {drift:.3e}")
    eps = -np.angle(lam)
    eps[eps <= -np.pi] += TWO_PI
    eps.sort()
    return eps


# ── spectra over theta and over rationals ──────────────────────────────────

@dataclass(frozen=True)
class SpectrumSlice:
    """Quasienergies of one Bloch block (fixed hbar_eff and theta)."""

    hbar: EffPlanck
    theta: float
    energies: np.ndarray = field(repr=False)


@dataclass
class SpectrumSet:
    """Slices of a scan, sorted by (hbar, theta); rows() yields CSV-ready tuples."""

    kind: str
    slices: list

    def rows(self):
        for sl in self.slices:
            rp = sl.hbar.rational_part
            for e in sl.energies:
                yield (rp.num, rp.den, sl.hbar.value, sl.theta, float(e))


def model_from_ratios(kind: str, ratio1: float, ratio2: float, num: int, den: int,
                      resonance: tuple[int, int] | None = None) -> ModelSpec:
    """Model at hbar_eff = 2*pi*num/den with kick strengths ratio * hbar_eff."""
    hb = EffPlanck.from_rational(num, den)
    return ModelSpec(kind, ratio1 * hb.value, ratio2 * hb.value, hb, resonance)


def _slices_for_model(args) -> list:
    model, theta_count = args
    strengths = {f.strength for f in floquet_factors(model)
                 if isinstance(f, KickFactor)}
    coeffs = {x: kick_coefficients(x) for x in strengths}
    return [SpectrumSlice(model.hbar_eff, float(th),
                          quasienergies(build_bloch_matrix(model, th, coeffs)))
            for th in theta_grid(theta_count)]


def model_spectrum(model: ModelSpec, theta_count: int) -> SpectrumSet:
    """Spectrum of one model over the full Bloch-angle grid."""
    return SpectrumSet(model.kind, _slices_for_model((model, theta_count)))


def aggregated_energies(model: ModelSpec, theta_count: int) -> np.ndarray:
    """Sorted union of quasienergies over the Bloch-angle grid."""
    spec = model_spectrum(model, theta_count)
    return np.sort(np.concatenate([sl.energies for sl in spec.slices]))


def scan_rationals(kind: str, s_max: int, window_cycles: int | None = None) -> list:
    """Reduced fractions num/den with hbar_eff = 2*pi*num/den inside the scan window.

    The window is (0, 2*pi*window_cycles]; it defaults to one cycle for the
    kicked Harper model and two for the double-kicked models, matching the
    periods of their butterflies.
    """
    cycles = window_cycles if window_cycles is not None else (1 if kind == KHM else 2)
    if cycles < 1:
        raise ValueError("window_cycles must be >= 1")
    out = [Rational(r.num + shift * r.den, r.den)
           for r in farey_sequence(s_max)
           for shift in range(cycles)]
    out.sort(key=lambda r: r.as_fraction())
    return out


def butterfly_scan(kind: str, ratio1: float, ratio2: float, s_max: int,
                   theta_count: int = 32, *, window_cycles: int | None = None,
                   resonance: tuple[int, int] | None = None,
                   workers: int = 1) -> SpectrumSet:
    """Quasienergy spectra over all scan rationals at fixed k/hbar_eff ratios.

    ratio1 and ratio2 are the kick strengths in units of hbar_eff, held fixed
    across the scan so every rational shares the same kick profile.  Results
    are sorted by (hbar_eff, theta) and do not depend on the worker count.
    """
    for r in (ratio1, ratio2):
        if not (r >= 0 and math.isfinite(r)):
            raise ValueError("kick ratios must be finite and >= 0")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    rationals = scan_rationals(kind, s_max, window_cycles)
    tasks = [(model_from_ratios(kind, ratio1, ratio2, r.num, r.den, resonance),
              theta_count) for r in rationals]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(_slices_for_model, tasks,
                                   chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        groups = [_slices_for_model(t) for t in tasks]
    slices = [sl for group in groups for sl in group]
    slices.sort(key=lambda sl: (sl.hbar.value, sl.theta))
    return SpectrumSet(kind, slices)


# ── symmetry claims ────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SymmetryReport:
    """Distance between two theta-aggregated spectra that a symmetry ties together."""

    name: str
    hbar_label: str
    distance: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.distance < self.tolerance


def check_symmetry_claims(kind: str, ratio1: float, ratio2: float, rationals,
                          theta_count: int = 16, tol: float = 1e-8,
                          resonance: tuple[int, int] | None = None) -> list:
    """Verify the butterfly symmetries at the given rationals.

    Kicked Harper: spectrum periodic in hbar_eff with period 2*pi and mirror
    symmetric about pi.  Double-kicked models: period 4*pi, mirror symmetry
    about 2*pi, and invariance under swapping the two kick strengths.
    Claims whose partner falls outside hbar_eff > 0 are skipped.
    """
    from .analysis import spectrum_set_distance

    def agg(r1, r2, num, den):
        model = model_from_ratios(kind, r1, r2, num, den, resonance)
        return aggregated_energies(model, theta_count)

    reports = []
    for r in rationals:
        num, den = r.num, r.den
        base = agg(ratio1, ratio2, num, den)
        if kind == KHM:
            claims = [("period 2*pi", num + den), ("mirror about pi", den - num)]
        else:
            claims = [("period 4*pi", num + 2 * den),
                      ("mirror about 2*pi", 2 * den - num)]
        for name, partner_num in claims:
            if partner_num < 1:
                continue
            other = agg(ratio1, ratio2, partner_num, den)
            dist = spectrum_set_distance(base, other)
            reports.append(SymmetryReport(name, str(r), dist, tol))
        if kind != KHM:
            other = agg(ratio2, ratio1, num, den)
            dist = spectrum_set_distance(base, other)
            reports.append(SymmetryReport("kick swap", str(r), dist, tol))
    return reports
