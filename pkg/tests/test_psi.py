import math

import numpy as np
import pytest

from apvar import hq, psi, zerostats as zst
from apvar.characters import select_C


def test_psi_hand_values():
    table = psi.build_psi_table(4, 100)
    # prime powers <= 10: 1 mod 4 -> {5, 9}; 3 mod 4 -> {3, 7}
    i = np.searchsorted(table.x, 10, side="right") - 1
    row1 = table.psi_ap[table.residues.index(1), i]
    row3 = table.psi_ap[table.residues.index(3), i]
    assert row1 == pytest.approx(math.log(5) + math.log(3), abs=1e-12)
    assert row3 == pytest.approx(math.log(3) + math.log(7), abs=1e-12)


def test_psi_table_partition_identity():
    table = psi.build_psi_table(12, 10**4)
    assert np.allclose(table.psi_ap.sum(axis=0), table.psi0)
    assert np.all(np.diff(table.psi_ap, axis=1) >= 0)


def test_psi_chi_hand_value():
    chi4 = select_C(4)[0]
    val = psi.psi_chi(10, chi4)
    assert val.real == pytest.approx(math.log(5) - math.log(7), abs=1e-12)
    assert val.imag == pytest.approx(0.0, abs=1e-12)


def test_psi_chi_triangle_inequality():
    for q in (5, 7):
        cs = psi._ClassSums(q, 10**4)
        psi0 = float(sum(cs.psi(a, 9999) for a in cs.residues))
        for chi in select_C(q):
            assert abs(psi.psi_chi(9999, chi)) <= psi0 + 1e-9


def test_variance_hand_value():
    # prime powers <= 10: {4, 7} = 1 mod 3 and {2, 5, 8} = 2 mod 3
    s1 = math.log(2) + math.log(7)
    s2 = 2 * math.log(2) + math.log(5)
    mean = (s1 + s2) / 2
    expect = (s1 - mean) ** 2 + (s2 - mean) ** 2
    assert psi.variance_direct(10, 3) == pytest.approx(expect, abs=1e-12)


def test_variance_q2_zero():
    assert psi.variance_direct(1000, 2) == 0.0
    assert psi.variance_via_characters(1000, 2) == 0.0


@pytest.mark.parametrize("q", [3, 4, 7, 12, 25, 50])
@pytest.mark.parametrize("x", [10**3, 10**4])
def test_orthogonality_identity(q, x):
    vd = psi.variance_direct(x, q)
    vc = psi.variance_via_characters(x, q)
    assert abs(vd - vc) <= 1e-9 * max(vd, 1.0)


def test_variance_series_shape_and_sign():
    s = psi.variance_series(3, math.log(10**3), math.log(10**5), 2500)
    assert s.values.size == 2500
    assert np.all(s.values >= 0)
    s2 = psi.variance_series(2, 5.0, 9.0, 2500)
    assert np.all(s2.values == 0.0)


def test_log_average_constant_series():
    s = psi.VarianceSeries(q=3, y=np.linspace(0, 1, 2500), values=np.full(2500, 2.5))
    assert psi.log_average_m(s, 1) == pytest.approx(2.5, rel=1e-12)
    assert psi.log_average_m(s, 2) == pytest.approx(6.25, rel=1e-12)
    with pytest.raises(ValueError):
        psi.log_average_m(s, 4)


def test_log_average_matches_model_mean():
    s = psi.variance_series(3, math.log(10**3), math.log(10**6), 2500)
    avg = psi.log_average_m(s, 1)
    assert avg == pytest.approx(zst.mean_hq_exact(3), rel=0.25)


def test_average_over_q_small():
    emp, mont, hool = psi.average_over_q(100, 2)
    assert emp == 0.0  # V(x;1) = V(x;2) = 0
    assert mont == pytest.approx(100 * math.log(100))
    emp2, _, _ = psi.average_over_q(2000, 300)
    assert emp2 > 0


def test_average_over_q_vs_direct():
    x, Q = 2000, 50
    emp, _, _ = psi.average_over_q(x, Q)
    direct = sum(psi.variance_direct(x, q) for q in range(3, Q + 1)) / Q
    assert emp == pytest.approx(direct, rel=1e-12)


def test_average_budget_guard():
    with pytest.raises(ValueError):
        psi.average_over_q(10**8, 10**8)


def test_fg_regime_warning():
    with pytest.warns(UserWarning):
        psi.fg_secondary_compare(10**4, 7)


def test_fg_consistency_with_direct():
    ratio, lhs, rhs = psi.fg_secondary_compare(10**4, 101)
    assert lhs == pytest.approx(psi.variance_direct(10**4, 101) / 10**4, rel=1e-12)
    assert ratio == pytest.approx(lhs / rhs, rel=1e-12)


def test_explicit_formula_no_zeros():
    from apvar.lfun import ZeroSet

    chi3 = select_C(3)[0]
    empty = ZeroSet(label="3:1", conductor=3, parity=1, T=1.0,
                    ordinates=np.array([]), certified=True, is_real=True)
    res = psi.explicit_formula_residual(5000, chi3, empty)
    assert res == pytest.approx(abs(psi.psi_chi(5000, chi3)), abs=1e-9)


def test_explicit_formula_conjugation(zero_maps):
    zeros = zero_maps(5)
    chi = next(c for c in select_C(5) if not c.is_real).primitive()
    xs = np.array([2000, 5000])
    r = psi.explicit_formula_residual(xs, chi, zeros[chi.label])
    rc = psi.explicit_formula_residual(xs, chi.conjugate(), zeros[chi.conjugate().label])
    assert np.allclose(r, rc, rtol=1e-9)


def test_explicit_formula_truncation_trend(zero_maps):
    zeros = zero_maps(5)
    chi = next(c for c in select_C(5) if not c.is_real).primitive()
    xs = np.unique(np.floor(np.exp(np.linspace(math.log(1000), math.log(10**4), 40))).astype(int))
    zs = zeros[chi.label]
    r_low = np.median(psi.explicit_formula_residual(xs, chi, zs.truncate(100.0)))
    r_high = np.median(psi.explicit_formula_residual(xs, chi, zs.truncate(1000.0)))
    assert r_low >= 2.0 * r_high


def test_ks_self_zero(zero_maps):
    zeros = zero_maps(3)
    weights = hq.weights_map(3, zeros, T_cut=150.0)
    batch = hq.sample_hq(3, weights, seed=5, n=2000)
    fake = psi.VarianceSeries(q=3, y=np.arange(2000.0), values=batch.values)
    assert psi.empirical_vs_model_ks(3, fake, batch) == 0.0


def test_csv_writers(tmp_path):
    s = psi.variance_series(3, math.log(10**3), math.log(10**4), 2500)
    p = tmp_path / "variance_q3.csv"
    psi.write_variance_csv(s, str(p))
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "y,value" and len(lines) == 2501
    p2 = tmp_path / "avg.csv"
    psi.write_average_csv(100, 1.5, 2.5, str(p2))
    assert p2.read_text().startswith("Q,empirical,hooley_main")
