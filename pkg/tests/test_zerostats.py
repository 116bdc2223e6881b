import math

import numpy as np
import pytest

from apvar import lfun, zerostats as zst
from apvar.arith import EULER_GAMMA, LOG_2PI, euler_phi
from apvar.characters import nonprincipal, select_C


def real_char(q):
    return next(c for c in select_C(q) if c.is_real)


def complex_char(q):
    return next(c for c in select_C(q) if not c.is_real)


def test_b_closed_form_structure():
    chi3 = real_char(3)  # odd character: parity term vanishes
    expect = (
        math.log(3 / math.pi)
        - EULER_GAMMA
        + 2.0 * lfun.log_deriv_at_one(chi3).real
    )
    assert zst.b_closed_form(chi3) == pytest.approx(expect, abs=1e-10)
    chi5 = real_char(5)  # even: (1+chi(-1)) log 2 = 2 log 2
    expect5 = (
        math.log(5 / math.pi)
        - EULER_GAMMA
        - 2.0 * math.log(2.0)
        + 2.0 * lfun.log_deriv_at_one(chi5).real
    )
    assert zst.b_closed_form(chi5) == pytest.approx(expect5, abs=1e-10)


@pytest.mark.parametrize("qstar", [3, 4, 5, 7, 8, 11, 12])
def test_lemma_bracket(qstar, zero_maps):
    zeros = zero_maps(qstar)
    for chi in select_C(qstar):
        star = chi.primitive()
        if star.modulus != qstar:
            continue
        rep = zst.b_chi(star, zeros[star.label].truncate(200.0))
        gap = rep.closed_form - rep.truncated_sum
        assert rep.usable
        assert 0.0 < gap <= 1.1 * rep.tail_estimate, star.label


def test_mean_hq_exact_q3(zero_maps):
    # single non-principal character: mean is b(chi3) alone
    assert zst.mean_hq_exact(3) == pytest.approx(
        zst.b_closed_form(real_char(3)), abs=1e-10
    )


def test_mean_hq_exact_q5_structure():
    chars = nonprincipal(5)
    manual = sum(zst.b_closed_form(c) for c in chars)
    assert zst.mean_hq_exact(5) == pytest.approx(manual, abs=1e-9)
    # conjugates share b
    cc = complex_char(5)
    assert zst.b_closed_form(cc) == pytest.approx(
        zst.b_closed_form(cc.conjugate()), abs=1e-6
    )


def test_mean_hq_closed_examples():
    assert zst.mean_hq_closed(3) == pytest.approx(
        2 * (math.log(3) - EULER_GAMMA - LOG_2PI - math.log(3) / 2), abs=1e-12
    )
    assert zst.mean_hq_closed(4) == pytest.approx(
        2 * (math.log(4) - EULER_GAMMA - LOG_2PI - math.log(2)), abs=1e-12
    )


def test_fourth_moment_single_zero_toy():
    gamma = math.sqrt(2.0 - 0.25)  # 1/4 + gamma^2 = 2, u = 1/2
    toy = lfun.ZeroSet(
        label="3:1", conductor=3, parity=1, T=2.0,
        ordinates=np.array([gamma]), certified=True, is_real=True,
    )
    val = zst.fourth_moment_y(real_char(3), toy, complete_s1=False)
    # S1 = 1/2, S2 = 1/4: 12 S1^2 - 6 S2 = 3 - 1.5
    assert val == pytest.approx(1.5, abs=1e-12)


def test_fourth_moment_rejects_uncertified():
    toy = lfun.ZeroSet(
        label="3:1", conductor=3, parity=1, T=2.0,
        ordinates=np.array([1.0]), certified=False, is_real=True,
    )
    with pytest.raises(ArithmeticError):
        zst.fourth_moment_y(real_char(3), toy)


def test_var_hq_exact_q3_reduction(zero_maps):
    zeros = zero_maps(3)
    rep = zst.var_hq_exact(3, zeros)
    b = zst.b_closed_form(real_char(3))
    u = 1.0 / (0.25 + zeros["3:1"].ordinates ** 2)
    s2 = float(np.sum(u**2))
    assert rep.var_exact == pytest.approx(2 * b**2 - 6 * s2, rel=1e-10)
    assert rep.var_asymptotic == pytest.approx(2 * 2 * math.log(3) ** 2)
    assert rep.var_exact > 0


def test_average_l_log_deriv():
    assert zst.average_l_log_deriv(3) == pytest.approx(
        lfun.log_deriv_at_one(real_char(3)).real, abs=1e-10
    )
    for q in (51, 101):
        val = zst.average_l_log_deriv(q)
        assert abs(val) <= 50.0 * euler_phi(q) * math.log(q) ** 2 / q


def test_pair_correlation_zero_at_y0(zero_maps):
    assert zst.pair_correlation_T(3, 0.0, zero_maps(3)) == 0.0


def test_pair_correlation_two_zero_toy():
    g1, g2 = 2.0, 5.0
    toy = lfun.ZeroSet(
        label="3:1", conductor=3, parity=1, T=6.0,
        ordinates=np.array([g1, g2]), certified=True, is_real=True,
    )
    Y = 3.0
    gam = toy.two_sided_ordinates()
    expect = 0.0 + 0.0j
    for a in gam:
        for b in gam:
            if a != b:
                expect += (np.exp(1j * (a - b) * Y) - 1.0) / (
                    (a - b) * (0.5 + 1j * a) * (0.5 - 1j * b)
                )
    got = zst.pair_correlation_T(3, Y, {"3:1": toy})
    assert got == pytest.approx(abs(expect), rel=1e-12)


def test_close_pair_count_monotone(zero_maps):
    zeros = zero_maps(3)
    base = zst.close_pair_count(3, 50.0, 2.0, zeros)
    assert zst.close_pair_count(3, 50.0, 1e-12, zeros) == 0
    assert zst.close_pair_count(3, 50.0, 4.0, zeros) >= base
    assert zst.close_pair_count(3, 100.0, 2.0, zeros) >= base


def test_close_pair_count_first_gap(zero_maps):
    zeros = zero_maps(3)
    ords = zeros["3:1"].ordinates
    gap = ords[1] - ords[0]
    s = (gap + 1e-6) * math.log(3)
    n = zst.close_pair_count(3, ords[1] + 1.0, s, zeros)
    assert n >= 2  # the first pair, counted in both orders


def test_report_csv(tmp_path, zero_maps):
    path = tmp_path / "zerostats_q5.csv"
    zst.write_report_csv(5, zero_maps(5), str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("label,conductor,parity")
    assert len(lines) == 1 + len(select_C(5))
