"""Prime-side empirics: Chebyshev psi in progressions, the variance V(x;q)
by both routes, logarithmic averages, q-averages, and the explicit-formula
bridge to the zero data.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import ks_2samp

from .arith import (
    EULER_GAMMA,
    LOG_2PI,
    euler_phi,
    factorize,
    hooley_constant,
    prime_powers,
    smallest_prime_factor,
)
from .characters import Character, build_group, nonprincipal
from .hq import HqSampleBatch
from .lfun import ZeroSet

GRID_RATIO = 1.01
MAX_X = 10**8
_TABLE_CELL_GUARD = 5 * 10**7


@lru_cache(maxsize=8)
class _ClassSums:
    """Per-residue-class cumulative Lambda sums for one modulus."""

    def __init__(self, q: int, x_max: int):
        self.q = q
        self.x_max = x_max
        n, lam = prime_powers(x_max)
        r = n % q
        self.residues = [a for a in range(q) if math.gcd(a, q) == 1]
        self._n = {}
        self._cum = {}
        for a in self.residues:
            sel = r == a
            self._n[a] = n[sel]
            self._cum[a] = np.cumsum(lam[sel])

    def psi(self, a: int, x) -> np.ndarray:
        """psi(x; q, a) for scalar or array x."""
        idx = np.searchsorted(self._n[a], np.asarray(x, dtype=np.int64), side="right")
        cum = np.concatenate([[0.0], self._cum[a]])
        return cum[idx]

    def psi_matrix(self, x) -> np.ndarray:
        """Rows indexed like self.residues, columns by x."""
        return np.vstack([self.psi(a, x) for a in self.residues])


def geometric_grid(x_max: int, x_min: float = 2.0) -> np.ndarray:
    n = int(math.floor(math.log(x_max / x_min) / math.log(GRID_RATIO))) + 1
    return np.unique(np.floor(x_min * GRID_RATIO ** np.arange(n + 1)).astype(np.int64).clip(max=x_max))


@dataclass(frozen=True)
class PsiProgressionTable:
    q: int
    x: np.ndarray  # ascending integer grid
    psi_ap: np.ndarray  # shape (phi(q), len(x)); rows follow `residues`
    residues: tuple[int, ...]

    @property
    def psi0(self) -> np.ndarray:
        """psi(x, chi0) = sum over coprime classes, exact by construction."""
        return self.psi_ap.sum(axis=0)


def build_psi_table(q: int, x_max: int) -> PsiProgressionTable:
    """Exact Lambda accumulation per coprime residue class on the 1% grid."""
    if q < 3:
        raise ValueError("q must be >= 3")
    if x_max > MAX_X:
        raise ValueError("x_max beyond the desk ceiling")
    grid = geometric_grid(x_max)
    phi = euler_phi(q)
    if phi * grid.size > _TABLE_CELL_GUARD:
        raise MemoryError("progression table too large; use the streaming path")
    cs = _ClassSums(q, x_max)
    return PsiProgressionTable(
        q=q,
        x=grid,
        psi_ap=cs.psi_matrix(grid),
        residues=tuple(cs.residues),
    )


def psi_chi(x, chi: Character) -> np.ndarray | complex:
    """psi(x, chi) = sum_a chi(a) psi(x; q, a) for scalar or array x."""
    q = chi.modulus
    cs = _ClassSums(q, _ceil_xmax(x))
    vals = chi.values()
    xs = np.atleast_1d(np.asarray(x))
    total = np.zeros(xs.shape, dtype=np.complex128)
    for a in cs.residues:
        total += vals[a] * cs.psi(a, xs)
    return complex(total[0]) if np.asarray(x).ndim == 0 else total


def _ceil_xmax(x) -> int:
    """Snap x to a cached sieve ceiling so repeated calls share prime tables."""
    top = int(np.max(np.asarray(x)))
    for cap in (10**4, 10**5, 10**6, 10**7, 10**8):
        if top <= cap:
            return cap
    raise ValueError("x beyond the desk ceiling")


def variance_direct(x, q: int) -> float:
    """V(x;q) = sum_{(a,q)=1} |psi(x;q,a) - psi(x,chi0)/phi(q)|^2."""
    if q <= 2:
        return 0.0
    cs = _ClassSums(q, _ceil_xmax(x))
    s = np.array([float(cs.psi(a, x)) for a in cs.residues])
    return float(np.sum((s - s.mean()) ** 2))


def variance_via_characters(x, q: int) -> float:
    """V(x;q) = (1/phi(q)) sum_{chi != chi0} |psi(x,chi)|^2."""
    if q <= 2:
        return 0.0
    total = sum(abs(psi_chi(x, chi)) ** 2 for chi in nonprincipal(q))
    return float(total / euler_phi(q))


@dataclass(frozen=True)
class VarianceSeries:
    q: int
    y: np.ndarray
    values: np.ndarray  # phi(q) e^{-y} V(e^y; q)

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("variance values must be nonnegative")


def variance_series(q: int, y_min: float, y_max: float, steps: int) -> VarianceSeries:
    """phi(q) e^{-y} V(e^y; q) on a uniform y-grid."""
    if math.exp(y_max) > MAX_X + 1:
        raise ValueError("e^{y_max} beyond the desk ceiling")
    y = np.linspace(y_min, y_max, steps)
    if q <= 2:
        return VarianceSeries(q=q, y=y, values=np.zeros(steps))
    x = np.floor(np.exp(y)).astype(np.int64)
    cs = _ClassSums(q, _ceil_xmax(x))
    mat = cs.psi_matrix(x)
    v = np.sum((mat - mat.mean(axis=0)) ** 2, axis=0)
    phi = euler_phi(q)
    return VarianceSeries(q=q, y=y, values=phi * np.exp(-y) * v)


def log_average_m(series: VarianceSeries, m: int) -> float:
    """(1/(y_max-y_min)) int (phi e^{-y} V)^m dy by the trapezoid rule."""
    if not 1 <= m <= 3:
        raise ValueError("m limited to 1..3")
    if series.y.size < 2000:
        raise ValueError("grid too coarse for a stable logarithmic average")
    span = series.y[-1] - series.y[0]
    return float(np.trapezoid(series.values**m, series.y) / span)


def average_over_q(x: int, Q: int) -> tuple[float, float, float]:
    """(1/Q) sum_{q <= Q} V(x;q) against the Montgomery and Hooley main terms."""
    if Q > x:
        raise ValueError("Q must not exceed x")
    n, lam = prime_powers(x)
    if Q * n.size > 10**10:
        raise ValueError("operation budget exceeded")
    spf = smallest_prime_factor(Q)
    psi_total = float(np.sum(lam))
    total = 0.0
    for q in range(3, Q + 1):
        r = np.sort(n % q)
        # per-class sums s_a over the distinct residues present
        cuts = np.flatnonzero(np.diff(r)) + 1
        starts = np.concatenate([[0], cuts])
        order = np.argsort(n % q, kind="stable")
        sums = np.add.reduceat(lam[order], starts)
        classes = r[starts]
        # drop classes sharing a factor with q (prime powers of p | q)
        keep = np.ones(classes.size, dtype=bool)
        qq = q
        while qq > 1:
            p = int(spf[qq])
            keep &= (classes % p) != 0
            while qq % p == 0:
                qq //= p
        sq_sum = float(np.sum(sums[keep] ** 2))
        psi0 = float(np.sum(sums[keep]))
        total += sq_sum - psi0**2 / euler_phi(q)
    empirical = total / Q
    montgomery_main = x * math.log(x)
    hooley_main = x * math.log(Q) - hooley_constant() * x
    return empirical, montgomery_main, hooley_main


def fg_secondary_compare(x: int, q: int) -> tuple[float, float, float]:
    """V(x;q)/x against log q - gamma_E - log 2pi - sum_{p|q} log p/(p-1)."""
    if not x ** 0.5 <= q <= x:
        warnings.warn("q outside the [sqrt(x), x] regime; estimate unreliable")
    n, lam = prime_powers(x)
    s = np.bincount(n % q, weights=lam, minlength=q)
    fac = factorize(q).factors
    coprime = np.ones(q, dtype=bool)
    for p, _ in fac:
        coprime[::p] = False
    sc = s[coprime]
    phi = euler_phi(q)
    v = float(np.sum(sc**2) - np.sum(sc) ** 2 / phi)
    lhs = v / x
    rhs = math.log(q) - EULER_GAMMA - LOG_2PI - sum(
        math.log(p) / (p - 1) for p, _ in fac
    )
    return lhs / rhs, lhs, rhs


def explicit_formula_residual(x, chi: Character, zeros: ZeroSet):
    """|psi(x, chi) + sum_{|gamma| <= T} x^{1/2+i gamma}/(1/2+i gamma)|."""
    chi = chi.primitive()
    if zeros.label != chi.label:
        raise ValueError("zero set does not belong to this character")
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    psi_vals = np.atleast_1d(psi_chi(np.asarray(xs, dtype=np.int64), chi))
    gam = zeros.two_sided_ordinates()
    rho = 0.5 + 1j * gam
    zero_sum = (np.exp(np.log(xs)[:, None] * rho[None, :]) / rho[None, :]).sum(axis=1)
    res = np.abs(psi_vals + zero_sum)
    return float(res[0]) if np.asarray(x).ndim == 0 else res


def empirical_vs_model_ks(q: int, series: VarianceSeries, batch: HqSampleBatch) -> float:
    """Two-sample KS distance between the log-sampled variance values and the
    Monte Carlo draws of H_q."""
    if series.q != q or batch.q != q:
        raise ValueError("series/batch modulus mismatch")
    return float(ks_2samp(series.values, batch.values).statistic)


def write_variance_csv(series: VarianceSeries, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "value"])
        for yv, val in zip(series.y, series.values):
            writer.writerow([f"{yv:.15g}", f"{val:.15g}"])


def write_average_csv(Q: int, empirical: float, hooley_main: float, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Q", "empirical", "hooley_main"])
        writer.writerow([Q, f"{empirical:.15g}", f"{hooley_main:.15g}"])
