import numpy as np
import pytest

import panelforge as pf


@pytest.fixture(scope="module")
def pool():
    return pf.Pool(2)


def test_gemm_matches_numpy(pool):
    rng = np.random.default_rng(0)
    a = rng.random((37, 21))
    b = rng.random((21, 15))
    c = rng.random((37, 15))
    np.testing.assert_allclose(pf.gemm(c, a, b, pool=pool), c + a @ b, rtol=1e-13)
    np.testing.assert_allclose(pf.gemm(c, a.T.copy(), b, trans_a=True, pool=pool), c + a @ b, rtol=1e-13)


def test_gemm_shape_error(pool):
    with pytest.raises(ValueError):
        pf.gemm(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)), pool=pool)


@pytest.mark.parametrize("strategy", pf.STRATEGIES)
def test_lu_reconstructs(pool, strategy):
    a = np.random.default_rng(1).random((130, 130))
    f, piv, info = pf.lu(a, strategy=strategy, block=32, pool=pool)
    assert info == 0
    assert pf.lu_residual(a, f, piv) <= 50
    l = np.tril(f, -1) + np.eye(130)
    u = np.triu(f)
    pa = a.copy()
    for i, p in enumerate(piv):
        pa[[i, p - 1]] = pa[[p - 1, i]]
    np.testing.assert_allclose(l @ u, pa, atol=1e-12)


@pytest.mark.parametrize("strategy", pf.STRATEGIES)
def test_qr_reconstructs(pool, strategy):
    a = np.random.default_rng(2).random((120, 100))
    f, tau = pf.qr(a, strategy=strategy, block=32, pool=pool)
    factor, orth = pf.qr_residual(a, f, tau)
    assert factor <= 50 and orth <= 50
    q = pf.form_q(f, tau)
    np.testing.assert_allclose(q[:, :100] @ np.triu(f[:100]), a, atol=1e-12)


def test_strategies_agree_bitwise(pool):
    a = np.random.default_rng(3).random((150, 150))
    ref = pf.lu(a, "mtb", 48, pool)
    for s in pf.STRATEGIES[1:]:
        got = pf.lu(a, s, 48, pool)
        assert np.array_equal(got[0], ref[0])
        assert got[1] == ref[1]


def test_flops():
    assert pf.flops("lu", 3) == 18
    assert pf.flops("qr", 3) == 36
    assert pf.flops("LU", 1000) == 666666667
    with pytest.raises(ValueError):
        pf.flops("svd", 3)


def test_bad_strategy(pool):
    with pytest.raises(ValueError):
        pf.lu(np.eye(3), strategy="fastest", pool=pool)


def test_wide_matrix_rejected(pool):
    with pytest.raises(ValueError):
        pf.qr(np.zeros((3, 5)), pool=pool)


def test_input_not_modified(pool):
    a = np.random.default_rng(4).random((20, 20))
    before = a.copy()
    pf.lu(a, pool=pool)
    assert np.array_equal(a, before)
