import numpy as np
import pytest

from mhdblowup import crosscheck as cc
from mhdblowup.crosscheck import AxisymField, Component, GaussTerm


def _zero():
    return Component(())


def test_all_operators_second_order_on_random_fields():
    rng = np.random.default_rng(0)
    for _ in range(2):
        fld = cc.random_field(rng)
        res = cc.convergence_study(fld, cc.random_points(rng, 5))
        for k in cc.REQUIRED_OPERATORS:
            assert res[k].passed, (k, res[k].orders, res[k].discrepancy)
    assert res["UB"].exact


def test_divergence_of_bumped_radial_field():
    # u = r exp(-r^2 - z^2) e_r, B = 0
    ur = Component((GaussTerm(1.0, 1, 1.0, 1.0, 0.0),))
    fld = AxisymField(ur, _zero(), _zero(), _zero(), _zero(), _zero(), _zero())
    x = np.array([0.6, 0.2, 0.3])
    d = cc.cartesian_crosscheck(fld, x, 1e-3)
    assert d["divu"] < 1e-5


def test_curlBB_matches_reduced_formula():
    # B^theta = r exp(-r^2 - z^2), u = 0
    bt = Component((GaussTerm(1.0, 1, 1.0, 1.0, 0.0),))
    fld = AxisymField(_zero(), _zero(), _zero(), _zero(), bt, _zero(), _zero())
    r, z = 0.7, -0.4
    ops = cc.cylindrical_operators(fld, r, z)
    B = r * np.exp(-r * r - z * z)
    dBr = (1 - 2 * r * r) * np.exp(-r * r - z * z)
    dBz = -2 * z * B
    np.testing.assert_allclose(ops["curlBB"], [-B * dBr - B * B / r, 0.0, -B * dBz], atol=1e-15)


def test_zero_fields_give_zero_operators():
    fld = AxisymField(*[_zero() for _ in range(7)])
    ops = cc.cylindrical_operators(fld, 0.5, 0.1)
    for k in cc.OPERATORS:
        assert np.all(np.asarray(ops[k]) == 0.0)


def test_near_axis_point_rejected():
    rng = np.random.default_rng(1)
    fld = cc.random_field(rng)
    with pytest.raises(cc.CrosscheckError):
        cc.cartesian_crosscheck(fld, np.array([5e-3, 0.0, 0.0]), 1e-3)
