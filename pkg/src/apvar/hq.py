"""Monte Carlo realization of the random model H_q = sum_{chi in C(q)} |Y_chi|^2,
Bessel-product moment generating functions, and large-deviation machinery.

Sampling is deterministic: every character draws from a counter-based Philox
stream keyed by SHA-256 of (master seed, character label), so batches are
reproducible bit-for-bit for a fixed zero cache and independent of chunking.
Zeros above the search height T are not sampled; their exactly known
second-moment contribution (b_closed - b_truncated) is restored by an
independent Gaussian completion per character, keeping both the mean and the
variance of H_q unbiased.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .arith import euler_phi
from .characters import Character, select_C
from .lfun import ZeroSet
from .zerostats import b_closed_form, mean_hq_exact

_I0_SWITCH = 15.0
_CHUNK = 1 << 15


def i0(x):
    """Modified Bessel function I_0: power series for |x| <= 15, asymptotic
    expansion beyond; the two branches agree to 1e-10 relative at the seam."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x <= _I0_SWITCH
    if np.any(small):
        xs = x[small]
        q = (xs / 2.0) ** 2
        term = np.ones_like(xs)
        acc = np.ones_like(xs)
        for k in range(1, 60):
            term = term * q / k**2
            acc += term
        out[small] = acc
    if np.any(~small):
        xl = x[~small]
        # I0(x) ~ e^x/sqrt(2 pi x) sum_k prod_{j<k} (2j+1)^2 / (8x k!)
        inv8x = 1.0 / (8.0 * xl)
        term = np.ones_like(xl)
        acc = np.ones_like(xl)
        for k in range(1, 12):
            term = term * (2 * k - 1) ** 2 * inv8x / k
            acc += term
        out[~small] = np.exp(xl) / np.sqrt(2.0 * np.pi * xl) * acc
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class YWeights:
    """Per-character sampling weights w = 1/sqrt(1/4+gamma^2) over the merged
    ordinate list, plus the closed-form tail of the second moment."""

    label: str
    is_real: bool
    weights: np.ndarray
    b_closed: float
    tail_var: float  # b_closed minus the truncated two-sided sum of w^2

    def __post_init__(self):
        object.__setattr__(
            self, "weights", np.asarray(self.weights, dtype=np.float64)
        )
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if self.tail_var < -1e-9:
            raise ValueError("negative tail variance: zeros exceed closed form")


def y_weights(chi: Character, zeros: ZeroSet) -> YWeights:
    chi = chi.primitive()
    if zeros.label != chi.label:
        raise ValueError("zero set does not belong to this character")
    if not zeros.certified:
        raise ArithmeticError(f"uncertified zeros for {chi.label}")
    w = 1.0 / np.sqrt(0.25 + zeros.ordinates**2)
    b = b_closed_form(chi)
    two_sided = (2.0 if zeros.is_real else 1.0) * float(np.sum(w**2))
    return YWeights(
        label=chi.label,
        is_real=zeros.is_real,
        weights=w,
        b_closed=b,
        tail_var=max(b - two_sided, 0.0),
    )


def _generator(seed: int, label: str, purpose: str = "") -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{label}:{purpose}".encode()).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_y(weights: YWeights, rng: np.random.Generator, n: int,
             include_tail: bool = True) -> np.ndarray:
    """n independent draws of Y_chi (real array or complex array).

    Real chi: 2 sum_{gamma>0} w cos(theta); complex chi: sqrt(2) sum over the
    two-sided list of w e^{i theta}.  The truncated tail is restored as an
    independent centered Gaussian on each real component.
    """
    w = weights.weights
    if weights.is_real:
        out = np.zeros(n)
        for lo in range(0, n, _CHUNK):
            m = min(_CHUNK, n - lo)
            theta = rng.random((m, w.size)) * (2.0 * np.pi)
            out[lo : lo + m] = 2.0 * (np.cos(theta) @ w)
        if include_tail and weights.tail_var > 0:
            out += rng.normal(0.0, math.sqrt(weights.tail_var), n)
        return out
    out = np.zeros(n, dtype=np.complex128)
    for lo in range(0, n, _CHUNK):
        m = min(_CHUNK, n - lo)
        theta = rng.random((m, w.size)) * (2.0 * np.pi)
        out[lo : lo + m] = math.sqrt(2.0) * (
            (np.cos(theta) @ w) + 1j * (np.sin(theta) @ w)
        )
    if include_tail and weights.tail_var > 0:
        # E|Y|^2 tail is 2 * tail_var, split evenly between Re and Im
        sigma = math.sqrt(weights.tail_var)
        out += rng.normal(0.0, sigma, n) + 1j * rng.normal(0.0, sigma, n)
    return out


@dataclass(frozen=True)
class HqSampleBatch:
    q: int
    seed: int
    n_samples: int
    values: np.ndarray
    tail_correction: float  # deterministic E[H_q] completion carried by tails

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("H_q draws must be nonnegative")


def sample_hq(q: int, weights_map: dict[str, YWeights], seed: int, n: int) -> HqSampleBatch:
    """n independent draws of H_q; requires weights for every chi in C(q)."""
    values = np.zeros(n)
    tail = 0.0
    for chi in select_C(q):
        label = chi.primitive().label
        if label not in weights_map:
            raise KeyError(f"missing weights for {label}")
        w = weights_map[label]
        rng = _generator(seed, label)
        y = sample_y(w, rng, n)
        if w.is_real:
            values += y**2
            tail += w.tail_var
        else:
            values += np.abs(y) ** 2
            tail += 2.0 * w.tail_var
    return HqSampleBatch(q=q, seed=seed, n_samples=n, values=values,
                         tail_correction=tail)


def mgf_y_bessel(weights: YWeights, z: float) -> float:
    """E[e^{z Y}] (real chi) or E[e^{z Re Y}] (complex chi) as a Bessel product.

    Real chi: prod over positive ordinates of I0(2 z w); complex chi: prod over
    the merged two-sided list of I0(sqrt(2) z w).  Even in z in both cases.
    """
    w = weights.weights
    scale = 2.0 if weights.is_real else math.sqrt(2.0)
    if abs(z) * (scale / 2.0) * (np.max(w) if w.size else 0.0) > 50.0:
        raise OverflowError("z out of the guarded range")
    return float(np.prod(i0(scale * z * w)))


def mgf_tail_factor(weights: YWeights, z: float) -> float:
    """Gaussian MGF factor contributed by the tail completion of sample_y."""
    return math.exp(0.5 * z**2 * weights.tail_var)


def moment_bound_check(weights: YWeights, n: int, samples: np.ndarray) -> tuple[float, float]:
    """MC estimate of E[|Y|^{2n}] against the bound 5.7 n^{3/2} (4 n log q* / e)^n."""
    if not 1 <= n <= 6:
        raise ValueError("moment order limited to 1..6")
    qstar = int(weights.label.split(":")[0])
    mc = float(np.mean(np.abs(samples) ** (2 * n)))
    bound = 5.7 * n**1.5 * (4.0 * n * math.log(qstar) / math.e) ** n
    return mc, bound


def mgf_hq_bound_check(q: int, batch: HqSampleBatch, t: float) -> tuple[float, float]:
    """MC MGF of the centered H_q against (1+184 t^2 (log q)^2)^phi(q)."""
    logq = math.log(q)
    if abs(t) >= 1.0 / (40.0 * logq):
        raise ValueError("t outside the MGF lemma range")
    centered = batch.values - mean_hq_exact(q)
    mc = float(np.mean(np.exp(t * centered)))
    bound = (1.0 + 184.0 * t**2 * logq**2) ** euler_phi(q)
    return mc, bound


def chernoff_upper(q: int, eps: float) -> float:
    """Upper tail bound 2 exp(-eps^2 phi(q)/751)."""
    if not 0.0 <= eps <= 9.0:
        raise ValueError("eps outside the proof's working range")
    return 2.0 * math.exp(-(eps**2) * euler_phi(q) / 751.0)


def gaussian_reference_tail(q: int, eps: float) -> float:
    """Two-sided tail of N(phi log q, 2 phi (log q)^2) beyond eps phi log q."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    z = eps * math.sqrt(euler_phi(q) / 2.0)
    return float(erfc(z / math.sqrt(2.0)))


def paley_zygmund(samples: np.ndarray, a: float) -> tuple[float, float]:
    """(empirical P[X >= a E X], (1-a)^2 (E X)^2 / E[X^2]) for nonnegative X."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0 or np.any(samples < 0):
        raise ValueError("samples must be nonempty and nonnegative")
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    mean = float(np.mean(samples))
    second = float(np.mean(samples**2))
    lhs = float(np.mean(samples >= a * mean))
    rhs = 0.0 if second == 0 else (1.0 - a) ** 2 * mean**2 / second
    return lhs, rhs


@dataclass(frozen=True)
class TailReport:
    eps: float
    empirical: float
    stderr: float
    chernoff: float
    gaussian: float


def tail_report(q: int, batch: HqSampleBatch, eps_grid) -> list[TailReport]:
    """Empirical two-sided tails P[|H - phi log q| > eps phi log q] vs bounds."""
    center = euler_phi(q) * math.log(q)
    dev = np.abs(batch.values - center)
    out = []
    for eps in eps_grid:
        p = float(np.mean(dev > eps * center))
        stderr = math.sqrt(max(p * (1.0 - p), 1e-300) / batch.n_samples)
        out.append(
            TailReport(
                eps=float(eps),
                empirical=p,
                stderr=stderr,
                chernoff=chernoff_upper(q, eps),
                gaussian=gaussian_reference_tail(q, eps),
            )
        )
    return out


def lower_bound_evaluate(q: int, batch: HqSampleBatch, eps: float) -> dict:
    """Exponential-tilt lower-bound machinery at t = 1.4 eps / log q.

    Reports the Paley-Zygmund pieces for X = e^{t(H - phi log q)} together with
    the empirical upper-deviation probability; evaluation only, no assertion
    (the matching absolute constant is unspecified).
    """
    logq = math.log(q)
    phi = euler_phi(q)
    t = 1.4 * eps / logq
    centered = batch.values - phi * logq
    x = np.exp(t * centered)
    mean_x = float(np.mean(x))
    second_x = float(np.mean(x**2))
    threshold = math.exp(t * eps * phi * logq)
    a = threshold / mean_x
    implied = (1.0 - a) ** 2 * mean_x**2 / second_x if 0.0 < a < 1.0 else 0.0
    empirical = float(np.mean(centered >= eps * phi * logq))
    return {
        "eps": eps,
        "t": t,
        "mean_x": mean_x,
        "second_x": second_x,
        "a": a,
        "implied_lower": implied,
        "empirical_upper_dev": empirical,
    }


def weights_map(
    q: int, zeros: dict[str, ZeroSet], T_cut: float | None = None
) -> dict[str, YWeights]:
    """YWeights for every representative character of C(q).

    T_cut truncates the sampled zero lists below the cache height; the
    Gaussian completion absorbs the difference, so the sampled mean stays
    exact and the variance defect is only the (tiny) quartic tail above T_cut.
    """
    out = {}
    for chi in select_C(q):
        star = chi.primitive()
        if star.label not in out:
            zs = zeros[star.label]
            if T_cut is not None and T_cut < zs.T:
                zs = zs.truncate(T_cut)
            out[star.label] = y_weights(star, zs)
    return out
