"""Exact zero-sum identities and moment formulas for the random model:
b(chi), mean and variance of H_q, pair-correlation statistics.

All zero sums run over the merged two-sided lists of module lfun; S1-type
sums (linear in 1/(1/4+gamma^2)) are completed with the closed form of the
logarithmic-derivative identity, S2-type tails are bounded explicitly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import EULER_GAMMA, LOG_2PI, euler_phi, factorize
from .characters import Character, nonprincipal, select_C
from .lfun import ChowlaReport, ZeroSet, chowla_check, load_or_find_zeros, log_deriv_at_one


def b_closed_form(chi: Character) -> float:
    """b(chi) = log(q*/pi) - gamma_E - (1+chi(-1)) log 2 + 2 Re L'/L(1, chi*)."""
    chi = chi.primitive()
    parity_term = 2.0 * math.log(2.0) if chi.parity == 0 else 0.0
    return (
        math.log(chi.modulus / math.pi)
        - EULER_GAMMA
        - parity_term
        + 2.0 * _log_deriv_cached(chi).real
    )


@lru_cache(maxsize=4096)
def _log_deriv_cached(chi: Character) -> complex:
    return log_deriv_at_one(chi)


def b_tail_estimate(conductor: int, T: float) -> float:
    """(2/pi) int_T^inf log(q* t/(2 pi))/t^2 dt, the two-sided |gamma| > T mass."""
    return (2.0 / (math.pi * T)) * (math.log(conductor * T / (2.0 * math.pi)) + 1.0)


def s2_tail_estimate(conductor: int, T: float) -> float:
    """(2/pi) int_T^inf log(q* t/(2 pi))/t^4 dt, bounding the quartic tail."""
    return (2.0 / math.pi) * (
        math.log(conductor * T / (2.0 * math.pi)) / (3.0 * T**3) + 1.0 / (9.0 * T**3)
    )


@dataclass(frozen=True)
class BChiReport:
    label: str
    closed_form: float
    truncated_sum: float
    tail_estimate: float
    usable: bool

    @property
    def bracket_ok(self) -> bool:
        gap = self.closed_form - self.truncated_sum
        return 0.0 < gap <= 1.1 * self.tail_estimate


def b_chi(chi: Character, zeros: ZeroSet) -> BChiReport:
    """Truncated two-sided zero sum of 1/(1/4+gamma^2) against the closed form."""
    chi = chi.primitive()
    if zeros.label != chi.label:
        raise ValueError("zero set does not belong to this character")
    u = 1.0 / (0.25 + zeros.ordinates**2)
    truncated = float((2.0 if zeros.is_real else 1.0) * np.sum(u))
    return BChiReport(
        label=chi.label,
        closed_form=b_closed_form(chi),
        truncated_sum=truncated,
        tail_estimate=b_tail_estimate(chi.modulus, zeros.T),
        usable=zeros.certified,
    )


def zero_map(q: int, T: float, cache_dir: str | None = None) -> dict[str, ZeroSet]:
    """Certified ZeroSets for the primitive inducers of all chi != chi0 mod q.

    Keyed by the primitive character's label; conjugate characters share a
    merged ordinate list, so only representatives are ever computed.
    """
    out: dict[str, ZeroSet] = {}
    for chi in select_C(q):
        star = chi.primitive()
        if star.label not in out:
            out[star.label] = load_or_find_zeros(star, T, cache_dir)
        conj = star.conjugate()
        if conj.label not in out:
            zs = out[star.label]
            out[conj.label] = ZeroSet(
                label=conj.label,
                conductor=zs.conductor,
                parity=zs.parity,
                T=zs.T,
                ordinates=zs.ordinates,
                certified=zs.certified,
                is_real=zs.is_real,
                signs=None if zs.is_real else -zs.signs,
            )
    return out


def chowla_map(q: int) -> dict[str, ChowlaReport]:
    out: dict[str, ChowlaReport] = {}
    for chi in nonprincipal(q):
        star = chi.primitive()
        if star.label not in out:
            out[star.label] = chowla_check(star)
    return out


def mean_hq_exact(
    q: int,
    zeros: dict[str, ZeroSet] | None = None,
    chowla: dict[str, ChowlaReport] | None = None,
) -> float:
    """E[H_q] = sum_{chi != chi0} b(chi) - 4 sum z_chi, from closed forms."""
    if chowla is None:
        chowla = chowla_map(q)
    total = 0.0
    z_total = 0
    for chi in nonprincipal(q):
        total += b_closed_form(chi)
        rep = chowla[chi.primitive().label]
        if not rep.determinate:
            raise ArithmeticError(f"z_chi indeterminate for {rep.label}")
        z_total += rep.z_chi
    return total - 4.0 * z_total


def mean_hq_closed(q: int) -> float:
    """phi(q)(log q - gamma_E - log 2pi - sum_{p|q} log p/(p-1))."""
    if q < 3:
        raise ValueError("q must be >= 3")
    log_p = sum(math.log(p) / (p - 1) for p, _ in factorize(q).factors)
    return euler_phi(q) * (math.log(q) - EULER_GAMMA - LOG_2PI - log_p)


def fourth_moment_y(chi: Character, zeros: ZeroSet, complete_s1: bool = True) -> float:
    """E[|Y_chi|^4] from zero sums, with the closed form completing S1.

    Real chi (one-sided S1, S2 over gamma > 0): 12 S1^2 - 6 S2.
    Complex chi (two-sided sums): 8 S1^2 - 4 S2.
    With complete_s1=False both sums are taken over the truncated list only
    (used for toy fixtures and truncation diagnostics).
    """
    chi = chi.primitive()
    if zeros.label != chi.label:
        raise ValueError("zero set does not belong to this character")
    if not zeros.certified:
        raise ArithmeticError(f"uncertified zeros for {chi.label}")
    u = 1.0 / (0.25 + zeros.ordinates**2)
    s2 = float(np.sum(u**2))
    if complete_s1:
        b = b_closed_form(chi)
        s1 = b / 2.0 if zeros.is_real else b
    else:
        s1 = float(np.sum(u))
    if zeros.is_real:
        return 12.0 * s1**2 - 6.0 * s2
    return 8.0 * s1**2 - 4.0 * s2


@dataclass(frozen=True)
class HqMomentReport:
    q: int
    mean_exact: float
    mean_closed: float
    var_exact: float
    var_asymptotic: float


def var_hq_exact(
    q: int,
    zeros: dict[str, ZeroSet],
    chowla: dict[str, ChowlaReport] | None = None,
) -> HqMomentReport:
    """Var[H_q] = sum_{chi in C(q)} (E[|Y|^4] - E[|Y|^2]^2) from zero data."""
    var = 0.0
    for chi in select_C(q):
        star = chi.primitive()
        zs = zeros[star.label]
        b = b_closed_form(star)
        second = b if star.is_real else 2.0 * b
        var += fourth_moment_y(star, zs) - second**2
    if var <= 0:
        raise ArithmeticError("variance must be positive")
    return HqMomentReport(
        q=q,
        mean_exact=mean_hq_exact(q, zeros, chowla),
        mean_closed=mean_hq_closed(q),
        var_exact=var,
        var_asymptotic=2.0 * euler_phi(q) * math.log(q) ** 2,
    )


def average_l_log_deriv(q: int) -> float:
    """sum_{chi != chi0} Re L'/L(1, chi*)."""
    if q < 3:
        raise ValueError("q must be >= 3")
    return sum(_log_deriv_cached(chi.primitive()).real for chi in nonprincipal(q))


def pair_correlation_T(q: int, Y: float, zeros: dict[str, ZeroSet]) -> float:
    """|sum_{chi != chi0} sum_{gamma != gamma'} (e^{i(gamma-gamma')Y}-1) /
    ((gamma-gamma')(1/2+i gamma)(1/2-i gamma'))| over two-sided lists."""
    total = 0.0 + 0.0j
    for chi in nonprincipal(q):
        zs = zeros[chi.primitive().label]
        gam = zs.two_sided_ordinates()
        if gam.size < 2:
            continue
        diff = gam[:, None] - gam[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            num = np.exp(1j * diff * Y) - 1.0
            den = diff * (0.5 + 1j * gam[:, None]) * (0.5 - 1j * gam[None, :])
            term = num / den
        np.fill_diagonal(term, 0.0)
        total += term.sum()
    return float(abs(total))


def close_pair_count(q: int, U: float, S: float, zeros: dict[str, ZeroSet]) -> int:
    """Ordered pairs of distinct ordinates in [0, U] closer than S/log q,
    summed over all non-principal characters mod q."""
    window = S / math.log(q)
    count = 0
    for chi in nonprincipal(q):
        zs = zeros[chi.primitive().label]
        if U > zs.T + 1e-9:
            raise ValueError("U exceeds zero-set height")
        gam = zs.two_sided_ordinates()
        gam = np.sort(gam[(gam >= 0) & (gam <= U)])
        if gam.size < 2:
            continue
        diff = np.abs(gam[:, None] - gam[None, :])
        count += int(np.sum((diff > 0) & (diff <= window)))
    return count


def write_report_csv(q: int, zeros: dict[str, ZeroSet], path: str) -> None:
    """Per-character CSV: label, q*, parity, b_closed, b_truncated, tail, E|Y|^4."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["label", "conductor", "parity", "b_closed", "b_truncated", "tail",
             "fourth_moment"]
        )
        for chi in select_C(q):
            star = chi.primitive()
            zs = zeros[star.label]
            rep = b_chi(star, zs)
            writer.writerow(
                [
                    star.label,
                    star.modulus,
                    star.parity,
                    f"{rep.closed_form:.15g}",
                    f"{rep.truncated_sum:.15g}",
                    f"{rep.tail_estimate:.15g}",
                    f"{fourth_moment_y(star, zs):.15g}",
                ]
            )
