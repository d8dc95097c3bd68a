"""Fourier-side norms, series thresholds and decay audits on the discrete torus.

Wavenumber convention: integer k with weight |k|**s (not 2*pi*k) and the
coefficient normalization of ``grid.fourier_coefficients``, applied
consistently everywhere including the critical thresholds.  The smallness
condition is therefore convention-internal; no cross-convention equality with
the continuous-frequency setting is claimed.  The zero mode is excluded from
every homogeneous norm and tracked separately by the audits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridField, fourier_coefficients


@dataclass
class SpectralProfile:
    """Complex Fourier coefficients indexed by integer wavenumber."""

    coeffs: np.ndarray  # np.fft.fft layout, already normalized by 1/N

    @classmethod
    def from_grid(cls, f: GridField) -> "SpectralProfile":
        return cls(fourier_coefficients(f.values))

    def wavenumbers(self) -> np.ndarray:
        n = self.coeffs.size
        return np.fft.fftfreq(n, d=1.0 / n).astype(int)

    def conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        c = self.coeffs
        n = c.size
        k = np.arange(1, n)
        return bool(np.max(np.abs(c[k] - np.conj(c[(n - k) % n]))) <= tol)


def _abs_k_and_coeffs(f: GridField) -> tuple[np.ndarray, np.ndarray]:
    prof = SpectralProfile.from_grid(f)
    k = np.abs(prof.wavenumbers())
    mask = k > 0
    return k[mask].astype(float), np.abs(prof.coeffs[mask])


def s_norm(f: GridField, s: float) -> float:
    """Homogeneous Wiener-type norm: sum over k != 0 of |k|^s |f_hat(k)|."""
    if s <= -1:
        raise ValueError("s must exceed -1 in one dimension")
    k, a = _abs_k_and_coeffs(f)
    return float(np.sum(k**s * a))


def besov_norm(f: GridField, s: float) -> float:
    """Sup over dyadic shells 2^{j-1} <= |k| < 2^j of the shell partial sums."""
    if s <= -1:
        raise ValueError("s must exceed -1 in one dimension")
    k, a = _abs_k_and_coeffs(f)
    if k.size == 0:
        return 0.0
    shells = np.floor(np.log2(k)).astype(int) + 1  # shell j holds 2^{j-1} <= k < 2^j
    terms = k**s * a
    best = 0.0
    for j in np.unique(shells):
        best = max(best, float(np.sum(terms[shells == j])))
    return best


def f_s_series(y: float, s: float, tol: float = 1e-15) -> float:
    """The factorial series sum_{j>=1} (j+1)^{s+1} / j! * y^j, truncated.

    Terms eventually decay faster than geometrically (ratio ~ y/j), so the sum
    is stopped once a term falls below tol relative to the running sum while
    j exceeds y, certifying the remainder by the geometric tail bound.
    """
    if y < 0:
        raise ValueError("y must be nonnegative")
    if y == 0.0:
        return 0.0
    total = 0.0
    term = 2.0 ** (s + 1) * y  # j = 1
    j = 1
    while True:
        total += term
        j += 1
        term *= y / j * ((j + 1.0) / j) ** (s + 1)
        if j > y + 2 and term < tol * max(total, 1.0):
            break
        if j > 10_000:
            raise RuntimeError("series truncation failed to converge")
    return total


def f2_closed_form(y: float) -> float:
    """Closed form of the s=2 series: (y^3 + 6y^2 + 7y + 1) e^y - 1."""
    return (y**3 + 6.0 * y**2 + 7.0 * y + 1.0) * np.exp(y) - 1.0


def f_minus1_closed_form(y: float) -> float:
    """Closed form of the s=-1 series: e^y - 1."""
    return float(np.expm1(y))


def critical_threshold(s: float) -> float:
    """Unique root y of f_s(y) = 1, by bisection on the increasing series.

    The series itself converges for every s; s = -1 collapses to e^y - 1
    with root ln 2.  Below s = -1 the associated norms are not defined in
    one dimension, so the threshold is rejected there too.
    """
    if s < -1:
        raise ValueError("s must be at least -1")
    lo, hi = 0.0, 1.0
    while f_s_series(hi, s) < 1.0:
        hi *= 2.0
    while hi - lo > 1e-15 and abs(f_s_series(0.5 * (lo + hi), s) - 1.0) > 1e-13:
        mid = 0.5 * (lo + hi)
        if f_s_series(mid, s) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class LyapunovReport:
    s: float
    sigma: float
    binding: bool  # smallness condition on the initial data held
    holds: bool
    worst_violation: float
    h2_nonincreasing: bool
    times: np.ndarray = field(repr=False, default=None)
    norm_s: np.ndarray = field(repr=False, default=None)


def lyapunov_audit(times: np.ndarray, fields: list[GridField], s: float) -> LyapunovReport:
    """Per-sample finite-difference check of the dissipation inequality.

    Checks d/dt||h||_s + sigma_{s,1} (||h||_{s+4} + ||h||_{s+2}) <= 0 between
    consecutive samples, with sigma_{s,1} = 1 - f_s(||h0||_2).  If the initial
    data violates the smallness condition the audit still runs but is marked
    non-binding (sigma clamped to 0).
    """
    times = np.asarray(times, dtype=float)
    h0_2 = s_norm(fields[0], 2.0)
    y_star = critical_threshold(min(s, 2.0))
    binding = h0_2 < y_star
    sigma = max(0.0, 1.0 - f_s_series(h0_2, s))

    ns = np.array([s_norm(f, s) for f in fields])
    n4 = np.array([s_norm(f, s + 4) for f in fields])
    n2 = np.array([s_norm(f, s + 2) for f in fields])

    worst = -np.inf
    for i in range(len(times) - 1):
        dt = times[i + 1] - times[i]
        if dt <= 0:
            continue
        fd = (ns[i + 1] - ns[i]) / dt
        # dissipation evaluated at the right endpoint (the smaller norms)
        violation = fd + sigma * (n4[i + 1] + n2[i + 1])
        slack_tol = 1e-9 * (1.0 + ns[i] / dt)
        worst = max(worst, violation - slack_tol)

    h2 = np.array([s_norm(f, 2.0) for f in fields])
    h2_mono = bool(np.all(np.diff(h2) <= 1e-12 * (1.0 + h2[:-1])))
    return LyapunovReport(
        s=s, sigma=sigma, binding=binding, holds=worst <= 0.0,
        worst_violation=float(worst), h2_nonincreasing=h2_mono,
        times=times, norm_s=ns,
    )


@dataclass
class DecayReport:
    s1: float
    s2: float
    fitted_c: float
    holds: bool
    times: np.ndarray = field(repr=False, default=None)
    norm_s2: np.ndarray = field(repr=False, default=None)


def decay_audit(times: np.ndarray, fields: list[GridField], s1: float, s2: float) -> DecayReport:
    """Fit the smallest C with ||h(t)||_{s2} <= C (1+t)^{-(s2-s1)/2}.

    On the torus the true decay is at least this fast, so a finite C always
    exists; the fitted C is the sup of the rescaled norms and the bound is an
    upper envelope by construction.
    """
    if not (s2 >= s1 > -1):
        raise ValueError("need s2 >= s1 > -1")
    times = np.asarray(times, dtype=float)
    norms = np.array([s_norm(f, s2) for f in fields])
    rate = 0.5 * (s2 - s1)
    c = float(np.max(norms * (1.0 + times) ** rate))
    return DecayReport(s1=s1, s2=s2, fitted_c=c, holds=np.isfinite(c),
                       times=times, norm_s2=norms)
