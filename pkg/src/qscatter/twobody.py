"""Two-fermion scattering: S and its dual, the W matrix, and concurrences.

Channel ordering is (left k1, left k2, right k1, right k2), i.e. the 4x4
matrices act on (a_1, a_2, b_1, b_2).  Both particles enter from the left, so
the input coefficient matrix is ``Sigma = [[(i/2) sigma_y, 0], [0, 0]]``.

With a lossy scatterer S is not unitary and the outgoing state is built from
the dual matrix ``(S^dagger)^-1``, W = dual Sigma dual^T.
"""
from dataclasses import dataclass

import numpy as np

from . import cxmat
from .errors import (
    BelowThreshold,
    EmptySector,
    EqualMomenta,
    InputError,
    SingularMatrix,
    SingularReflection,
    Undefined,
    ZeroNorm,
)
from .scattering import ScattererParams, _check_momentum, amplitudes, excited_momentum

ZERO_NORM = 1e-28

SIGMA = cxmat.cmat(np.block([
    [0.5j * cxmat.SIGMA_Y, np.zeros((2, 2))],
    [np.zeros((2, 2)), np.zeros((2, 2))],
]))


@dataclass(frozen=True)
class TwoParticleInput:
    params: ScattererParams
    k1: float
    k2: float

    def __post_init__(self):
        for name in ("k1", "k2"):
            k = getattr(self, name)
            if isinstance(k, complex):
                raise InputError(f"{name} must be real")
            _check_momentum(k)
        if self.k1 == self.k2:
            raise EqualMomenta(f"k1 == k2 == {self.k1!r}: the antisymmetrised input state is null")

    @property
    def momenta(self):
        return (self.k1, self.k2)


def _blocks_to_full(a, b, c, d):
    m = np.empty((4, 4), dtype=np.complex128)
    m[:2, :2], m[:2, 2:], m[2:, :2], m[2:, 2:] = a, b, c, d
    return cxmat.cmat(m)


@dataclass(frozen=True)
class SMatrix4:
    """Block form [[r, t'], [t, r']] with diagonal 2x2 blocks."""

    r: np.ndarray
    t_prime: np.ndarray
    t: np.ndarray
    r_prime: np.ndarray

    @property
    def full(self):
        return _blocks_to_full(self.r, self.t_prime, self.t, self.r_prime)


@dataclass(frozen=True)
class DualSMatrix:
    """(S^dagger)^-1 in the same block layout; ``method`` records how it was built."""

    R: np.ndarray
    T_prime: np.ndarray
    T: np.ndarray
    R_prime: np.ndarray
    method: str = "block"

    @property
    def full(self):
        return _blocks_to_full(self.R, self.T_prime, self.T, self.R_prime)

    @classmethod
    def from_full(cls, m, method):
        m = cxmat.cmat(m)
        return cls(
            R=cxmat.cmat(m[:2, :2]), T_prime=cxmat.cmat(m[:2, 2:]),
            T=cxmat.cmat(m[2:, :2]), R_prime=cxmat.cmat(m[2:, 2:]),
            method=method,
        )


@dataclass(frozen=True)
class ConcurrenceReport:
    eta_full: float
    eta_postselected: float
    sector_LL: float
    sector_RR: float
    sector_LR: float
    gamma_norm: float


def build_smatrix(inp):
    return smatrix_from_amplitudes(amplitudes(inp.params, inp.k1), amplitudes(inp.params, inp.k2))


def smatrix_from_amplitudes(a1, a2):
    r = cxmat.diag(a1.r, a2.r)
    t = cxmat.diag(a1.t, a2.t)
    # inversion symmetric scatterer: r' = r, t' = t
    return SMatrix4(r=r, t_prime=t, t=t, r_prime=r)


def dual_smatrix_direct(s):
    return DualSMatrix.from_full(cxmat.inverse(cxmat.adjoint(s.full)), method="direct")


def dual_smatrix_blocks(s):
    """Block-partitioned inverse of S^dagger.

    Needs (r'^dagger)^-1, so a channel with r = 0 raises SingularReflection.
    """
    rd = cxmat.adjoint(s.r)
    td = cxmat.adjoint(s.t)
    tpd = cxmat.adjoint(s.t_prime)
    try:
        rpd_inv = cxmat.inverse(cxmat.adjoint(s.r_prime))
    except SingularMatrix as exc:
        raise SingularReflection(f"r' is singular: {exc}") from exc
    try:
        R = cxmat.inverse(rd - td @ rpd_inv @ tpd)
    except SingularMatrix as exc:
        raise SingularReflection(f"reflection block bracket is singular: {exc}") from exc
    Tp = cxmat.cmat(-R @ td @ rpd_inv)
    T = cxmat.cmat(-rpd_inv @ tpd @ R)
    Rp = cxmat.cmat(rpd_inv - rpd_inv @ tpd @ Tp)
    return DualSMatrix(R=R, T_prime=Tp, T=T, R_prime=Rp, method="block")


def dual_smatrix(s, fallback=True):
    """(S^dagger)^-1, from the block formulas when r' is invertible.

    With ``fallback`` the direct 4x4 inverse covers perfect-transmission
    channels; if that is singular too the input is Undefined.
    """
    try:
        return dual_smatrix_blocks(s)
    except SingularReflection:
        if not fallback:
            raise
    try:
        return dual_smatrix_direct(s)
    except SingularMatrix as exc:
        raise Undefined(f"S^dagger is singular: {exc}") from exc


def w_matrix(d):
    m = d.full
    return cxmat.cmat(m @ SIGMA @ m.T)


def _contraction(w):
    return w[0, 1] * w[2, 3] + w[0, 2] * w[3, 1] + w[0, 3] * w[1, 2]


def full_concurrence(w):
    """8|W12 W34 + W13 W42 + W14 W23| for the state normalised to Tr WW^dagger = 1/2.

    A zero matrix returns 0.
    """
    w = np.asarray(w)
    norm = float(np.sum(np.abs(w) ** 2))
    if norm == 0.0:
        return 0.0
    return float(8 * abs(_contraction(w)) / (2 * norm))


def postselect(d):
    """Coefficient matrix of the one-left/one-right outgoing state.

    Returns ``(gamma, Tr gamma gamma^dagger)`` with gamma = R sigma_y T^T.
    """
    gamma = cxmat.cmat(d.R @ cxmat.SIGMA_Y @ d.T.T)
    norm = float(np.sum(np.abs(gamma) ** 2))
    if norm < ZERO_NORM:
        raise ZeroNorm(f"post-selected state has norm {norm:.3g}")
    return gamma, norm


def concurrence_from_gamma(gamma, norm=None):
    if norm is None:
        norm = float(np.sum(np.abs(gamma) ** 2))
    return float(2 * abs(cxmat.det2(gamma)) / norm)


def concurrence_eta(d):
    """Post-selected concurrence written through the dual diagonal entries."""
    a = abs(d.R[1, 1]) * abs(d.T[0, 0])
    b = abs(d.R[0, 0]) * abs(d.T[1, 1])
    den = a * a + b * b
    if den < ZERO_NORM:
        raise Undefined("both cross products of the dual amplitudes vanish")
    return float(2 * a * b / den)


def concurrence_from_amplitudes(r1, t1, r2, t2):
    """Reduced post-selected concurrence 2|r1 t1 r2 t2| / (|r2 t1|^2 + |r1 t2|^2)."""
    a = abs(r2) * abs(t1)
    b = abs(r1) * abs(t2)
    den = a * a + b * b
    if den == 0.0:
        raise Undefined("|r2 t1| and |r1 t2| vanish together (simultaneous resonance)")
    return float(2 * a * b / den)


def concurrence_postselected(inp):
    a1 = amplitudes(inp.params, inp.k1)
    a2 = amplitudes(inp.params, inp.k2)
    return concurrence_from_amplitudes(a1.r, a1.t, a2.r, a2.t)


def concurrence_smallg(inp):
    """Second-order weak-coupling expansion; both momenta must be above threshold."""
    p = inp.params
    k_th = p.k_threshold
    if inp.k1 <= k_th or inp.k2 <= k_th:
        raise BelowThreshold(f"expansion needs k1, k2 > k_th = {k_th:.6g}")
    k1, k2, u0 = inp.k1, inp.k2, p.u0
    s = k1 * k1 + k2 * k2
    shift = u0 * u0 - 4 * u0 * u0 * p.e_exc
    lead = 2 * k1 * k2 / s
    corr = (8 * k1 * k2 * (k1 * k1 - k2 * k2) ** 2 * p.g ** 2
            / (s * s * (4 * k1 * k1 + shift) * (4 * k2 * k2 + shift)))
    return lead + corr


# (rows, cols) index grids of each sector and of its transpose partner
SECTORS = {
    name: (np.ix_(rows, cols), np.ix_(cols, rows))
    for name, (rows, cols) in {
        "LL": ([0, 1], [0, 1]),
        "RR": ([2, 3], [2, 3]),
        "LR": ([0, 1], [2, 3]),
    }.items()
}


def _sector_concurrence(w, name):
    block, partner = SECTORS[name]
    proj = np.zeros_like(w)
    proj[block] = w[block]
    proj[partner] = w[partner]
    norm = float(np.sum(np.abs(proj) ** 2))
    if norm < ZERO_NORM:
        raise EmptySector(name, norm)
    return full_concurrence(proj)


def sector_concurrences(w):
    """Concurrence of W projected on two-left, two-right and one-each sectors.

    Each projection is renormalised before the contraction.  Raises
    EmptySector for the first sector with no weight.
    """
    w = np.array(w)
    return tuple(_sector_concurrence(w, name) for name in ("LL", "RR", "LR"))


def plateau_limit(inp):
    """Large-g limit of the post-selected concurrence, 2 rho / (1 + rho^2).

    For g -> infinity, |t_i| ~ |D_i| k_i / (u1^2 |i k_e,i - u0/2|) and |r_i| -> 1,
    so only the ratio rho = |t_1 / t_2| survives.
    """
    p = inp.params
    k_th = p.k_threshold
    if inp.k1 <= k_th or inp.k2 <= k_th:
        raise BelowThreshold(f"plateau limit needs k1, k2 > k_th = {k_th:.6g}")

    def scale(k):
        ke = excited_momentum(p, k)
        d = p.u0 ** 2 + 4 * ke * ke
        return abs(d) * k / abs(1j * ke - p.u0 / 2)

    rho = scale(inp.k1) / scale(inp.k2)
    return 2 * rho / (1 + rho * rho)


def concurrence_report(inp):
    """All concurrence figures for one momentum pair.

    A sector that carries no probability (e.g. RR when a channel is totally
    reflected) contributes nothing and is reported as 0.
    """
    s = build_smatrix(inp)
    d = dual_smatrix(s)
    w = w_matrix(d)
    _, norm = postselect(d)
    sectors = {}
    for name in SECTORS:
        try:
            sectors[name] = _sector_concurrence(w, name)
        except EmptySector:
            sectors[name] = 0.0
    return ConcurrenceReport(
        eta_full=full_concurrence(w),
        eta_postselected=concurrence_postselected(inp),
        sector_LL=sectors["LL"],
        sector_RR=sectors["RR"],
        sector_LR=sectors["LR"],
        gamma_norm=norm,
    )


def elastic_concurrence(k1, k2):
    """Closed form 2 k1 k2 / (k1^2 + k2^2) for g = 0."""
    return 2 * k1 * k2 / (k1 * k1 + k2 * k2)

