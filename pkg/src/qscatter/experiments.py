"""Parameter sweeps, figure pipelines, feature location and the verify suite."""
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import cxmat
from .errors import EqualMomenta, InputError, NoSignChange, QScatterError
from .scattering import (
    ScattererParams,
    amplitudes,
    reflection_numerator,
    reflection_zero,
    total_reflection_momentum,
)
from .twobody import (
    TwoParticleInput,
    concurrence_eta,
    concurrence_from_amplitudes,
    concurrence_postselected,
    dual_smatrix,
    dual_smatrix_direct,
    elastic_concurrence,
    full_concurrence,
    sector_concurrences,
    smatrix_from_amplitudes,
    w_matrix,
)

KINDS = ("transmission_vs_k", "concurrence_vs_dk", "concurrence_vs_g")
OK = "ok"


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    params: ScattererParams
    lo: float
    hi: float
    steps: int
    fixed: tuple = ()
    extra: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown sweep kind {self.kind!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise InputError(f"sweep range needs lo < hi, got ({self.lo}, {self.hi})")
        if int(self.steps) != self.steps or self.steps < 2:
            raise InputError(f"steps must be an integer >= 2, got {self.steps!r}")
        need = {"transmission_vs_k": 0, "concurrence_vs_dk": 1, "concurrence_vs_g": 2}[self.kind]
        if len(self.fixed) != need:
            raise InputError(f"{self.kind} needs {need} fixed momenta, got {self.fixed!r}")
        if any(k <= 0 for k in self.fixed):
            raise InputError(f"fixed momenta must be positive, got {self.fixed!r}")
        if self.kind == "concurrence_vs_g" and self.lo < 0:
            raise InputError("g range must start at or above 0")

    def grid(self):
        return np.linspace(self.lo, self.hi, int(self.steps))

    def curve_values(self):
        """The e_exc value of each curve; a single curve when ``extra`` is empty."""
        return tuple(self.extra) if self.extra else (self.params.e_exc,)


@dataclass(frozen=True)
class SweepRow:
    x: float
    values: tuple
    flags: tuple

    @property
    def ok(self):
        return all(f == OK for f in self.flags)


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    x_name: str
    names: tuple
    rows: tuple

    def column(self, name):
        if name == self.x_name:
            return np.array([row.x for row in self.rows])
        i = self.names.index(name)
        return np.array([row.values[i] for row in self.rows])


def _flag(exc):
    prefix = "skipped" if isinstance(exc, EqualMomenta) else "error"
    return f"{prefix}:{type(exc).__name__}"


def _evaluate(fn, xs, threads):
    if threads and threads > 1 and len(xs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, xs))
    return [fn(x) for x in xs]


def _curve_name(e):
    return f"eta_e{e:g}"


def sweep_transmission(spec, threads=None):
    """|r|^2, |t|^2 and their sum over the k grid."""
    p = spec.params

    def point(k):
        try:
            a = amplitudes(p, float(k))
        except QScatterError as exc:
            nan = float("nan")
            return SweepRow(float(k), (nan, nan, nan), (_flag(exc),) * 3)
        r2, t2 = abs(a.r) ** 2, abs(a.t) ** 2
        return SweepRow(float(k), (r2, t2, r2 + t2), (OK,) * 3)

    rows = _evaluate(point, list(spec.grid()), threads)
    return SweepResult(spec, "k", ("r2", "t2", "sum"), tuple(rows))


def _eta_point(params, k1, k2):
    try:
        return concurrence_postselected(TwoParticleInput(params, k1, k2)), OK
    except QScatterError as exc:
        return float("nan"), _flag(exc)


def sweep_concurrence_dk(spec, threads=None):
    """Post-selected concurrence against dk = k2 - k1, one curve per e_exc."""
    (k1,) = spec.fixed
    curves = [replace(spec.params, e_exc=e) for e in spec.curve_values()]

    def point(dk):
        out = [_eta_point(p, k1, k1 + float(dk)) for p in curves]
        return SweepRow(float(dk), tuple(v for v, _ in out), tuple(f for _, f in out))

    rows = _evaluate(point, list(spec.grid()), threads)
    names = tuple(_curve_name(e) for e in spec.curve_values())
    return SweepResult(spec, "dk", names, tuple(rows))


def sweep_concurrence_g(spec, threads=None):
    """Post-selected concurrence against the coupling ratio g, one curve per e_exc."""
    k1, k2 = spec.fixed
    es = spec.curve_values()

    def point(g):
        out = [_eta_point(replace(spec.params, g=float(g), e_exc=e), k1, k2) for e in es]
        return SweepRow(float(g), tuple(v for v, _ in out), tuple(f for _, f in out))

    rows = _evaluate(point, list(spec.grid()), threads)
    return SweepResult(spec, "g", tuple(_curve_name(e) for e in es), tuple(rows))


SWEEPS = {
    "transmission_vs_k": sweep_transmission,
    "concurrence_vs_dk": sweep_concurrence_dk,
    "concurrence_vs_g": sweep_concurrence_g,
}


def run_sweep(spec, threads=None):
    return SWEEPS[spec.kind](spec, threads=threads)


# dk-pipeline regimes for k1 = u0/2, g = 1/2: both above threshold, k2 crossing it,
# both below with the two channel-2 zeros inside dk <= 2 u0.
DK_E_EXC = (0.01, 0.3, 6.3)
COUPLING_E_EXC = (0.0, 0.125, 0.5, 1.0)


def transmission_pipeline(u0=1.0, g=0.5, e_exc=1.0, k_min=0.05, k_max=3.0, steps=256):
    return SweepSpec("transmission_vs_k", ScattererParams(u0, g, e_exc), k_min, k_max, steps)


def dk_pipeline(u0=1.0, g=0.5, e_exc=DK_E_EXC, dk_max=2.0, steps=400, dk_min=None):
    if dk_min is None:
        dk_min = dk_max / steps
    return SweepSpec("concurrence_vs_dk", ScattererParams(u0, g, e_exc[0]),
                     dk_min * u0, dk_max * u0, steps, fixed=(u0 / 2,), extra=tuple(e_exc))


def coupling_pipeline(u0=1.0, e_exc=COUPLING_E_EXC, g_max=3.0, steps=300):
    return SweepSpec("concurrence_vs_g", ScattererParams(u0, 0.0, e_exc[0]),
                     0.0, g_max, steps, fixed=(u0 / 2, 1.5 * u0), extra=tuple(e_exc))


@dataclass(frozen=True)
class Feature:
    name: str
    k: float
    eta: float = None


def reflection_zero_brackets(p, samples=512):
    """Sign-change brackets of the real numerator of tan(delta0) below threshold."""
    k_th = p.k_threshold
    if p.elastic or k_th == 0:
        return []
    ks = np.linspace(k_th / samples, k_th, samples)
    out = []
    prev_k, prev_s = None, None
    for k in ks:
        n = reflection_numerator(p, float(k))
        s = n > 0
        if prev_s is not None and s != prev_s:
            out.append((prev_k, float(k)))
        prev_k, prev_s = float(k), s
    return out


def locate_features(params, k1, samples=512):
    """Threshold, total-reflection and reflection-zero momenta, each with eta(k1, k)."""
    p = params

    def eta(k):
        try:
            return concurrence_postselected(TwoParticleInput(p, k1, k))
        except QScatterError:
            return None

    feats = []
    k_th = p.k_threshold
    if k_th > 0:
        feats.append(Feature("threshold", k_th, eta(k_th)))
    k_t0 = total_reflection_momentum(p)
    if k_t0 is not None:
        feats.append(Feature("total_reflection", k_t0, eta(k_t0)))
    for lo, hi in reflection_zero_brackets(p, samples):
        try:
            k_r0 = reflection_zero(p, (lo, hi))
        except NoSignChange:
            continue
        feats.append(Feature("reflection_zero", k_r0, eta(k_r0)))
    return feats


# --- verification suite -----------------------------------------------------

DEFAULT_TOLERANCES = {
    "t_minus_r": 1e-14,
    "intensity_identity": 1e-12,
    "elastic_unitarity": 1e-12,
    "absorption_floor": 1e-12,
    "w_antisymmetry": 1e-12,
    "full_concurrence_zero": 1e-10,
    "unitary_collapse": 1e-12,
    "dual_oracle": 1e-11,
    "eta_vs_reduced": 1e-12,
    "sector_lr": 1e-10,
    "sector_ll_rr_zero": 1e-12,
    "exchange_symmetry": 1e-12,
    "concurrence_bounds": 1e-12,
    "elastic_closed_form": 1e-12,
}


@dataclass(frozen=True)
class VerifyGrid:
    u0: float = 1.0
    g_values: tuple = (0.0, 0.25, 0.5, 1.0, 2.0)
    e_values: tuple = (0.0, 0.125, 0.25, 0.5, 1.0)
    k_values: tuple = tuple(np.geomspace(0.05, 4.0, 32).tolist())

    def __post_init__(self):
        if not (self.g_values and self.e_values and self.k_values):
            raise InputError("verify grid is empty")

    def describe(self):
        return (f"u0={self.u0:g}; g={list(self.g_values)}; e_exc={list(self.e_values)}; "
                f"k: {len(self.k_values)} points in [{min(self.k_values):g}, {max(self.k_values):g}]; "
                f"pairs: all distinct")

    def params(self):
        for g in self.g_values:
            for e in self.e_values:
                yield ScattererParams(self.u0, g, e)


@dataclass
class InvariantResult:
    name: str
    tol: float
    worst: float = 0.0
    checked: int = 0
    errors: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.errors and self.worst <= self.tol

    def add(self, residual):
        self.checked += 1
        if not residual <= self.worst:
            self.worst = float(residual)


@dataclass(frozen=True)
class VerifyReport:
    results: tuple
    grid: str
    wall_time: float

    @property
    def passed(self):
        return all(r.passed for r in self.results)


def _interval_violation(x, lo, hi):
    return max(lo - x, x - hi, 0.0)


def run_verify(grid=None, tol=None, fault=None):
    """Evaluate every invariant over ``grid``.

    ``tol`` replaces all tolerances.  ``fault(params, k, amps) -> amps`` can
    tamper with one-particle amplitudes before they are checked (negative
    controls).
    """
    if grid is None:
        grid = VerifyGrid()
    start = time.perf_counter()
    res = {name: InvariantResult(name, t if tol is None else tol)
           for name, t in DEFAULT_TOLERANCES.items()}
    ks = sorted(set(float(k) for k in grid.k_values))
    if not ks:
        raise InputError("verify grid is empty")

    for p in grid.params():
        amps = {}
        for k in ks:
            a = amplitudes(p, k)
            if fault is not None:
                a = fault(p, k, a)
            amps[k] = a
            s = a.intensity
            res["t_minus_r"].add(abs(a.t - a.r - 1))
            res["intensity_identity"].add(abs(s - (abs(2 * a.t - 1) ** 2 + 1) / 2))
            if p.elastic or k <= p.k_threshold:
                res["elastic_unitarity"].add(abs(s - 1))
            res["absorption_floor"].add(_interval_violation(s, 0.5, 1.0))

        for i, k1 in enumerate(ks):
            for k2 in ks[i + 1:]:
                _check_pair(res, TwoParticleInput(p, k1, k2), amps[k1], amps[k2])

    return VerifyReport(tuple(res.values()), grid.describe(), time.perf_counter() - start)


def _check_pair(res, inp, a1, a2):
    try:
        s = smatrix_from_amplitudes(a1, a2)
        d = dual_smatrix(s)
        w = w_matrix(d)
        eta = concurrence_from_amplitudes(a1.r, a1.t, a2.r, a2.t)
        eta_swapped = concurrence_from_amplitudes(a2.r, a2.t, a1.r, a1.t)
        ll, rr, lr = sector_concurrences(w)
    except QScatterError as exc:
        res["full_concurrence_zero"].errors.append(f"{inp}: {exc!r}")
        return
    res["w_antisymmetry"].add(cxmat.max_abs(w + w.T))
    res["full_concurrence_zero"].add(full_concurrence(w))
    if inp.params.elastic:
        res["unitary_collapse"].add(cxmat.max_abs(d.full - s.full))
        res["elastic_closed_form"].add(abs(eta - elastic_concurrence(inp.k1, inp.k2)))
    # dual_oracle only counts points where the block formulas apply
    if d.method == "block":
        res["dual_oracle"].add(cxmat.max_abs(d.full - dual_smatrix_direct(s).full))
    res["eta_vs_reduced"].add(abs(concurrence_eta(d) - eta))
    res["sector_lr"].add(abs(lr - eta))
    res["sector_ll_rr_zero"].add(max(ll, rr))
    res["exchange_symmetry"].add(abs(eta - eta_swapped))
    res["concurrence_bounds"].add(_interval_violation(eta, 0.0, 1.0))
