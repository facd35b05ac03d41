"""One-particle scattering off a delta potential with an excitable two-level core.

Natural units hbar^2/2m = 1 throughout, so energies are squared momenta.  The
scatterer is fixed by the delta strength ``u0``, the ratio ``g = u1/u0`` of the
ground/excited coupling to ``u0`` and the excitation energy ``e_exc`` measured
in units of ``4 E_bind = u0**2``.  The inelastic threshold therefore sits at
``k_th = u0 * sqrt(e_exc)``.

The even-channel phase shift is carried as an exact ratio ``tan(delta0) = N/D``
with ``D = u0**2 + 4 k_e**2``.  Amplitudes come from the pole-safe forms

    t = D / (D - iN),    r = iN / (D - iN),

which make the total-reflection point ``D = 0`` exact (``t = 0, r = -1``).
"""
import cmath
import math
from dataclasses import dataclass

from .errors import (
    AtPole,
    DerivativeVanished,
    InputError,
    NoConvergence,
    NonPositiveMomentum,
    NoSignChange,
)

AT_POLE_RTOL = 1e-13
POLE_RTOL = 1e-10
POLE_MAX_ITER = 200
BISECT_RTOL = 1e-12


@dataclass(frozen=True)
class ScattererParams:
    u0: float
    g: float = 0.0
    e_exc: float = 0.0

    def __post_init__(self):
        for name in ("u0", "g", "e_exc"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InputError(f"{name} must be finite, got {value!r}")
        if self.u0 <= 0:
            raise InputError(f"u0 must be positive, got {self.u0!r}")
        if self.g < 0:
            raise InputError(f"g must be non-negative, got {self.g!r}")
        if self.e_exc < 0:
            raise InputError(f"e_exc must be non-negative, got {self.e_exc!r}")

    @property
    def u1(self):
        return self.g * self.u0

    @property
    def k_threshold(self):
        return self.u0 * math.sqrt(self.e_exc)

    @property
    def e_bind(self):
        return self.u0 ** 2 / 4

    @property
    def elastic(self):
        return self.g == 0.0


@dataclass(frozen=True)
class PhaseShiftRatio:
    n: complex
    d: complex

    @property
    def value(self):
        """tan(delta0); only meaningful when ``d != 0``."""
        return self.n / self.d


@dataclass(frozen=True)
class ChannelAmplitudes:
    r: complex
    t: complex
    k: complex

    @property
    def intensity(self):
        return abs(self.r) ** 2 + abs(self.t) ** 2


@dataclass(frozen=True)
class PoleLocation:
    k: complex
    residual: float
    iterations: int


@dataclass(frozen=True)
class ResonanceEstimate:
    position: float
    width: float


def _check_momentum(k):
    if isinstance(k, complex):
        if k.imag == 0.0:
            k = k.real
        else:
            if not cmath.isfinite(k):
                raise InputError(f"momentum must be finite, got {k!r}")
            return k
    k = float(k)
    if not math.isfinite(k):
        raise InputError(f"momentum must be finite, got {k!r}")
    if k <= 0:
        raise NonPositiveMomentum(f"momentum must be positive, got {k!r}")
    return k


def _excited(p, k):
    """k_e on the physical sheet (Im k_e >= 0); ``k`` already validated."""
    c = p.u0 ** 2 * p.e_exc
    if isinstance(k, float):
        if k * k >= c:
            return complex(math.sqrt(k * k - c), 0.0)
        return complex(0.0, math.sqrt(c - k * k))
    ke = cmath.sqrt(k * k - c)
    if ke.imag < 0 or (ke.imag == 0 and ke.real < 0):
        ke = -ke
    return ke


def excited_momentum(p, k):
    """Momentum left to the particle after exciting the scatterer.

    Real and non-negative above threshold; below it the root with positive
    imaginary part, so that exp(i k_e |x|) decays away from the core.
    """
    return _excited(p, _check_momentum(k))


def _ratio(p, k):
    ke = _excited(p, k)
    u0, u1sq = p.u0, p.u1 ** 2
    d = u0 * u0 + 4 * ke * ke
    n = u0 * (d - u1sq) / (2 * k) + 1j * ke * u1sq / k
    return n, d, ke


def tan_delta(p, k):
    k = _check_momentum(k)
    n, d, _ = _ratio(p, k)
    if isinstance(k, float):
        # k_e**2 is real for real k; drop rounding noise in Im D
        d = complex(d.real, 0.0)
    return PhaseShiftRatio(n=complex(n), d=complex(d))


def _reduced_ratio(p, k):
    # elastic: N = u0 D / 2k cancels D exactly; keep a ratio that never 0/0s
    if p.elastic:
        return complex(p.u0 * p.u0), complex(2 * k * p.u0)
    n, d, _ = _ratio(p, k)
    if isinstance(k, float):
        d = complex(d.real, 0.0)
    return complex(n), complex(d)


def amplitudes(p, k):
    """Reflection and transmission amplitudes at momentum ``k``.

    ``k`` may be complex to probe the analytic continuation; real ``k`` must be
    positive.  Raises AtPole when ``|D - iN|`` vanishes (complex ``k`` only).
    """
    k = _check_momentum(k)
    n, d = _reduced_ratio(p, k)
    den = d - 1j * n
    if abs(den) < AT_POLE_RTOL * p.u0 ** 2:
        raise AtPole(f"k = {k!r} is an S-matrix pole")
    if d == 0:
        return ChannelAmplitudes(r=complex(-1.0), t=complex(0.0), k=k)
    return ChannelAmplitudes(r=1j * n / den, t=d / den, k=k)


def unitarity_deficit(p, k):
    """Returns |r|^2 + |t|^2, the probability kept in the elastic channel.

    One at or below threshold, never below one half.
    """
    return amplitudes(p, k).intensity


def _pole_function(p, k):
    """f(k) = D - iN and its derivative on the physical sheet."""
    u0 = p.u0
    if p.elastic:
        return 2 * k * u0 - 1j * u0 * u0, complex(2 * u0)
    u1sq = p.u1 ** 2
    c = u0 * u0 * p.e_exc
    n, d, ke = _ratio(p, k)
    if ke == 0:
        raise DerivativeVanished("pole search hit the threshold branch point")
    dd = 8 * k
    dn = u0 * dd / (2 * k) - u0 * (d - u1sq) / (2 * k * k) + 1j * u1sq * c / (ke * k * k)
    return d - 1j * n, dd - 1j * dn


def find_pole(p, guess):
    """Newton search for tan(delta0) = -i in the complex momentum plane.

    Steps are halved while they increase |f|.  Convergence requires the
    residual below ``1e-10 u0**2``; iteration then continues until the step
    stalls so the root is polished to rounding level.
    """
    k = complex(guess)
    if not cmath.isfinite(k) or k == 0:
        raise InputError(f"guess must be finite and nonzero, got {guess!r}")
    tol = POLE_RTOL * p.u0 ** 2
    f, df = _pole_function(p, k)
    for it in range(1, POLE_MAX_ITER + 1):
        if abs(df) < 1e-300 or not cmath.isfinite(df):
            raise DerivativeVanished(f"f'(k) vanished at k = {k!r}")
        step = f / df
        for _ in range(60):
            trial = k - step
            if trial != 0:
                try:
                    ft, dft = _pole_function(p, trial)
                except DerivativeVanished:
                    ft = None
                if ft is not None and abs(ft) <= abs(f):
                    break
            step /= 2
        else:
            if abs(f) < tol:
                return PoleLocation(k=k, residual=abs(f), iterations=it)
            raise NoConvergence(f"damping failed at k = {k!r}, |f| = {abs(f):.3g}")
        k, f, df = trial, ft, dft
        if abs(f) < tol and abs(step) <= 1e-14 * max(abs(k), p.u0):
            return PoleLocation(k=k, residual=abs(f), iterations=it)
    if abs(f) < tol:
        return PoleLocation(k=k, residual=abs(f), iterations=POLE_MAX_ITER)
    raise NoConvergence(f"no root after {POLE_MAX_ITER} iterations (last k = {k!r})")


def resonance_estimate(p, k):
    """Weak-coupling resonance position and width.

    Literal transcription of the small-u1 expansion (valid roughly for
    g <= 0.3).  The position term carries momentum dimensions as printed;
    use ``find_pole`` when an exact location is needed.
    """
    k = _check_momentum(k)
    u0, u1sq = p.u0, p.u1 ** 2
    denom = u0 * u0 + 4 * k * k
    return ResonanceEstimate(
        position=u0 / 2 - u1sq * u0 / denom,
        width=k * u0 * u1sq / (2 * denom),
    )


def total_reflection_momentum(p):
    """Real momentum where D = 0 and t vanishes, or None."""
    if p.elastic or p.e_exc <= 0.25:
        return None
    return p.u0 * math.sqrt(p.e_exc - 0.25)


def reflection_numerator(p, k):
    """Real part of N(k); r vanishes where it does below threshold.

    Elastic scatterers use the reduced ratio N = u0**2, which never changes sign.
    """
    n, _ = _reduced_ratio(p, _check_momentum(k))
    return n.real


def reflection_zero(p, bracket):
    """Bisect the real numerator N(k) for the r = 0 point inside ``bracket``.

    Both ends must lie below the inelastic threshold, where N is real.
    """
    lo, hi = (_check_momentum(x) for x in bracket)
    if not lo < hi:
        raise InputError(f"bracket must satisfy lo < hi, got {bracket!r}")
    if hi > p.k_threshold:
        raise InputError(f"bracket {bracket!r} extends above threshold {p.k_threshold:.6g}")
    f_lo, f_hi = reflection_numerator(p, lo), reflection_numerator(p, hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChange(f"N(k) keeps its sign on [{lo:.6g}, {hi:.6g}]")
    tol = BISECT_RTOL * p.u0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = reflection_numerator(p, mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
