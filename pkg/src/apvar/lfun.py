"""Dirichlet L-functions: evaluation via Hurwitz zeta, critical-line zeros,
logarithmic derivative at s = 1, and the central-point nonvanishing check.

Zero lists use a merged two-sided convention: `ordinates` holds |gamma| for
every nontrivial zero 1/2 + i*gamma of L(s, chi) with |gamma| <= T.  For a
real character each entry stands for a +-gamma pair (stored once); for a
complex character each entry is one zero and the parallel `signs` array
records which half-line it lies on.  The ordinate list is therefore identical
for chi and its conjugate.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import digamma, loggamma

from .characters import Character, build_group

ZERO_TOL = 1e-9
_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730)
_CHUNK_BUDGET = 4_000_000  # complex entries per Euler-Maclaurin work array


def hurwitz_zeta(s, a: float):
    """zeta(s, a) for Re(s) > -1, a in (0, 1]; Euler-Maclaurin through B12.

    Accepts a scalar or array of s values (vectorized over s for fixed a);
    absolute error <= 1e-10 for |Im s| <= 500 and well beyond.
    """
    if not 0.0 < a <= 1.0:
        raise ValueError("a must lie in (0, 1]")
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    if np.any(s_arr == 1.0):
        raise ValueError("zeta(s, a) has a pole at s = 1")
    out = np.empty(s_arr.shape, dtype=np.complex128)
    flat = s_arr.ravel()
    oflat = out.ravel()
    tmax = float(np.max(np.abs(flat.imag))) if flat.size else 0.0
    N = int(0.9 * tmax) + 25
    step = max(1, _CHUNK_BUDGET // N)
    n_plus_a = np.arange(N, dtype=np.float64) + a
    log_npa = np.log(n_plus_a)
    Na = float(N + a)
    log_Na = math.log(Na)
    for lo in range(0, flat.size, step):
        sv = flat[lo : lo + step]
        col = sv[:, None]
        total = np.exp(-col * log_npa[None, :]).sum(axis=1)
        total += np.exp((1.0 - sv) * log_Na) / (sv - 1.0)
        tail_pow = np.exp(-sv * log_Na)
        total += 0.5 * tail_pow
        rising = sv.copy()  # s(s+1)...(s+2k-2), starting at k = 1
        fact = 2.0  # (2k)!
        for k, bern in enumerate(_BERNOULLI, start=1):
            total += (bern / fact) * rising * tail_pow / Na ** (2 * k - 1)
            rising = rising * (sv + (2 * k - 1)) * (sv + 2 * k)
            fact *= (2 * k + 1) * (2 * k + 2)
        oflat[lo : lo + step] = total
    return complex(out[0]) if np.asarray(s).ndim == 0 else out


def l_value(s, chi: Character):
    """L(s, chi*) via q*^{-s} sum_a chi*(a) zeta(s, a/q*); vectorized in s."""
    if chi.is_principal:
        raise ValueError("principal character not supported")
    chi = chi.primitive()
    q = chi.modulus
    vals = chi.values()
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    total = np.zeros(s_arr.shape, dtype=np.complex128)
    at_one = s_arr == 1.0
    reg = ~at_one
    for aa in range(1, q + 1):
        v = vals[aa % q]
        if v == 0:
            continue
        if np.any(reg):
            total[reg] += v * hurwitz_zeta(s_arr[reg], aa / q)
        if np.any(at_one):
            # poles of zeta(s, a/q) cancel since sum chi(a) = 0, leaving
            # L(1, chi) = -(1/q) sum_a chi(a) digamma(a/q)
            total[at_one] += -v * digamma(aa / q)
    total *= np.exp(-s_arr * math.log(q))
    return complex(total[0]) if np.asarray(s).ndim == 0 else total


def gauss_sum(chi: Character) -> complex:
    q = chi.modulus
    vals = chi.values()
    a = np.arange(q)
    return complex(np.sum(vals * np.exp(2j * np.pi * a / q)))


def root_number(chi: Character) -> complex:
    """epsilon = tau(chi)/(i^a sqrt(q*)) for primitive chi; |epsilon| = 1."""
    chi = chi.primitive()
    eps = gauss_sum(chi) / (1j ** chi.parity * math.sqrt(chi.modulus))
    return complex(eps)


def completed_lambda(s, chi: Character):
    """Lambda(s, chi) = (q*/pi)^{(s+a)/2} Gamma((s+a)/2) L(s, chi*)."""
    chi = chi.primitive()
    a = chi.parity
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    pref = np.exp(
        (s_arr + a) / 2.0 * math.log(chi.modulus / math.pi)
        + loggamma((s_arr + a) / 2.0)
    )
    out = pref * l_value(s_arr, chi)
    return complex(out[0]) if np.asarray(s).ndim == 0 else out


def hardy_z(t, chi: Character):
    """Real-rotated L(1/2+it, chi*): vanishes exactly at critical-line zeros.

    Z(t) = Re(e^{i(theta(t) - arg(eps)/2)} L(1/2+it)) with theta the phase of
    the archimedean factor; the functional equation makes this real for all t.
    """
    chi = chi.primitive()
    a = chi.parity
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    s = 0.5 + 1j * t_arr
    theta = (t_arr / 2.0) * math.log(chi.modulus / math.pi) + np.imag(
        loggamma((s + a) / 2.0)
    )
    half_arg_eps = 0.5 * math.atan2(root_number(chi).imag, root_number(chi).real)
    z = np.real(np.exp(1j * (theta - half_arg_eps)) * l_value(s, chi))
    return float(z[0]) if np.asarray(t).ndim == 0 else z


@dataclass(frozen=True)
class ZeroSet:
    """Merged two-sided critical zeros of L(s, chi*) up to height T."""

    label: str
    conductor: int
    parity: int
    T: float
    ordinates: np.ndarray  # ascending |gamma| > 0
    certified: bool
    is_real: bool
    signs: np.ndarray | None = None  # +-1 per ordinate for complex chi

    def __post_init__(self):
        ords = np.asarray(self.ordinates, dtype=np.float64)
        object.__setattr__(self, "ordinates", ords)
        if ords.size and (np.any(np.diff(ords) <= 0) or ords[0] <= 0):
            raise ValueError("ordinates must be positive and strictly increasing")
        if np.any(ords > self.T + 1e-9):
            raise ValueError("ordinate above T")
        if self.is_real:
            object.__setattr__(self, "signs", None)
        else:
            if self.signs is None or len(self.signs) != ords.size:
                raise ValueError("complex character needs a signs array")
            object.__setattr__(
                self, "signs", np.asarray(self.signs, dtype=np.int64)
            )

    @property
    def two_sided_count(self) -> int:
        return 2 * self.ordinates.size if self.is_real else self.ordinates.size

    def two_sided_ordinates(self) -> np.ndarray:
        """Signed ordinates of every zero of L(s, chi) with |gamma| <= T."""
        if self.is_real:
            return np.concatenate([-self.ordinates[::-1], self.ordinates])
        return np.sort(self.signs * self.ordinates)

    def truncate(self, T: float) -> "ZeroSet":
        keep = self.ordinates <= T
        return replace(
            self,
            T=min(T, self.T),
            ordinates=self.ordinates[keep],
            signs=None if self.is_real else self.signs[keep],
        )


def counting_main_term(conductor: int, T: float) -> float:
    """Two-sided Riemann-von Mangoldt main term (T/pi) log(q* T/(2 pi e))."""
    return (T / math.pi) * math.log(conductor * T / (2.0 * math.pi * math.e))


def count_tolerance(conductor: int, T: float) -> float:
    return 2.0 * math.log(conductor * T) + 4.0


def _scan_half_line(chi: Character, lo: float, hi: float, step: float) -> np.ndarray:
    """Zeros of hardy_z in (lo, hi) by sign scan then vectorized bisection."""
    n = int(math.ceil((hi - lo) / step)) + 1
    grid = np.linspace(lo, hi, n)
    z = hardy_z(grid, chi)
    flips = np.flatnonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)
    a = grid[flips].copy()
    b = grid[flips + 1].copy()
    za = z[flips].copy()
    for _ in range(40):
        mid = 0.5 * (a + b)
        zm = hardy_z(mid, chi)
        left = za * zm > 0
        a = np.where(left, mid, a)
        za = np.where(left, zm, za)
        b = np.where(left, b, mid)
        if np.all(b - a < ZERO_TOL):
            break
    return 0.5 * (a + b)


def find_zeros(chi: Character, T: float) -> ZeroSet:
    """All critical-line ordinates with |gamma| <= T, with a count certificate.

    On a certificate miss the scan is retried on finer grids before giving up
    and returning the set with certified = False.
    """
    if chi.is_principal:
        raise ValueError("principal character has no nontrivial zeros")
    chi = chi.primitive()
    qstar = chi.modulus
    base_step = min(0.05, math.pi / math.log(qstar * T))
    main = counting_main_term(qstar, T)
    tol = count_tolerance(qstar, T)
    for refine in (1.0, 0.25, 0.0625):
        step = base_step * refine
        pos = _scan_half_line(chi, step * 0.1, T, step)
        if chi.is_real:
            ords = np.sort(pos)
            signs = None
            count = 2 * ords.size
        else:
            neg = _scan_half_line(chi, -T, -step * 0.1, step)
            merged = np.concatenate([np.abs(neg), pos])
            sgn = np.concatenate(
                [-np.ones(neg.size, dtype=np.int64), np.ones(pos.size, dtype=np.int64)]
            )
            order = np.argsort(merged)
            ords, signs = merged[order], sgn[order]
            count = ords.size
        certified = abs(count - main) <= tol
        if ords.size > 1 and np.min(np.diff(ords)) < 1e-6:
            certified = False  # unresolved close pair; LI assumes simple zeros
        if certified:
            break
    return ZeroSet(
        label=chi.label,
        conductor=qstar,
        parity=chi.parity,
        T=float(T),
        ordinates=ords,
        certified=certified,
        is_real=chi.is_real,
        signs=signs,
    )


def log_deriv_at_one(chi: Character) -> complex:
    """L'(1, chi*)/L(1, chi*) by Richardson-extrapolated central differences."""
    if chi.is_principal:
        raise ValueError("principal character not supported")
    chi = chi.primitive()
    h = 1e-4
    pts = np.array([1.0 - h, 1.0 + h, 1.0 - h / 2, 1.0 + h / 2, 1.0])
    lv = l_value(pts, chi)
    if abs(lv[4]) < 1e-8:
        raise ArithmeticError(f"|L(1, {chi.label})| unexpectedly small")
    d_h = (lv[1] - lv[0]) / (2 * h)
    d_h2 = (lv[3] - lv[2]) / h
    deriv = (4.0 * d_h2 - d_h) / 3.0
    return complex(deriv / lv[4])


@dataclass(frozen=True)
class ChowlaReport:
    label: str
    central_value: complex
    z_chi: int | None  # None = indeterminate (|L(1/2)| below tolerance)

    @property
    def determinate(self) -> bool:
        return self.z_chi is not None


def chowla_check(chi: Character) -> ChowlaReport:
    """Central value L(1/2, chi*) and the order-of-vanishing flag z_chi."""
    chi = chi.primitive()
    val = complex(l_value(0.5, chi))
    z = 0 if abs(val) > 1e-6 else None
    return ChowlaReport(label=chi.label, central_value=val, z_chi=z)


# ---------------------------------------------------------------------------
# zero cache


def _cache_path(cache_dir: str, label: str) -> str:
    return os.path.join(cache_dir, label.replace(":", "_") + ".zeros")


def write_zeroset(zs: ZeroSet, cache_dir: str) -> str:
    os.makedirs(cache_dir, exist_ok=True)
    path = _cache_path(cache_dir, zs.label)
    lines = [
        f"{zs.label} {zs.conductor} {zs.parity} {zs.T:.15g} "
        f"{zs.ordinates.size} {'true' if zs.certified else 'false'}"
    ]
    lines += [f"{g:.15g}" for g in zs.ordinates]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if not zs.is_real:
        with open(path + ".signs", "w") as fh:
            fh.write("\n".join(f"{int(s):+d}" for s in zs.signs) + "\n")
    return path


def read_zeroset(cache_dir: str, label: str) -> ZeroSet:
    path = _cache_path(cache_dir, label)
    with open(path) as fh:
        header = fh.readline().split()
        ords = np.array([float(line) for line in fh if line.strip()])
    if len(header) != 6 or header[0] != label:
        raise ValueError(f"malformed zero cache header in {path}")
    count = int(header[4])
    if count != ords.size:
        raise ValueError(f"zero cache {path} count mismatch")
    signs = None
    is_real = not os.path.exists(path + ".signs")
    if not is_real:
        with open(path + ".signs") as fh:
            signs = np.array([int(line) for line in fh if line.strip()])
    return ZeroSet(
        label=label,
        conductor=int(header[1]),
        parity=int(header[2]),
        T=float(header[3]),
        ordinates=ords,
        certified=header[5] == "true",
        is_real=is_real,
        signs=signs,
    )


def load_or_find_zeros(chi: Character, T: float, cache_dir: str | None) -> ZeroSet:
    """Cache-backed find_zeros; cached sets at height >= T are truncated."""
    chi = chi.primitive()
    if cache_dir is not None:
        try:
            cached = read_zeroset(cache_dir, chi.label)
        except (OSError, ValueError):
            cached = None
        if cached is not None and cached.T >= T - 1e-9:
            return cached.truncate(T) if cached.T > T + 1e-9 else cached
    zs = find_zeros(chi, T)
    if cache_dir is not None:
        write_zeroset(zs, cache_dir)
    return zs
