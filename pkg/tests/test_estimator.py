"""Estimator API tests: params round-trip, fit/predict, guards."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tnvd import IsingSpec, TNVDiagonalizer


def small_estimator(**overrides):
    kw = dict(n_layers=3, chi_a=4, chi_t=16, learning_rate=3e-3,
              max_steps=120, seed=5)
    kw.update(overrides)
    return TNVDiagonalizer(**kw)


def test_get_set_params_and_clone():
    est = small_estimator()
    params = est.get_params()
    assert params["chi_a"] == 4 and params["max_steps"] == 120
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(chi_t=8)
    assert est.get_params()["chi_t"] == 8


def test_unfitted_guards():
    est = small_estimator()
    with pytest.raises(NotFittedError):
        est.predict(np.zeros((1, 4), dtype=int))
    with pytest.raises(NotFittedError):
        est.score()


def test_fit_predict_sample_score():
    spec = IsingSpec(n_sites=4, h=0.5)
    est = small_estimator().fit(spec)
    assert est.best_F_ < est.log_[0].F  # training moved the loss
    assert est.score() == -est.best_F_

    bits = np.array([[0, 0, 0, 0], [1, 0, 1, 1]])
    pred = est.predict(bits)
    assert pred.shape == (2,)
    assert pred[0] == pytest.approx(est.spectrum_.evaluate_entry(bits[0]))
    single = est.predict([1, 0, 1, 1])
    assert single[0] == pred[1]
    with pytest.raises(ValueError, match="sites"):
        est.predict(np.zeros((1, 6), dtype=int))

    b1, v1 = est.sample(16, seed=3)
    b2, v2 = est.sample(16, seed=3)
    assert np.array_equal(b1, b2) and np.array_equal(v1, v2)
    assert b1.shape == (16, 4)

    psi = est.eigenstate(bits[1], chi=8)
    assert psi.n_sites == 4
    assert abs(psi.norm() - 1.0) < 1e-9


def test_fit_accepts_field_dict():
    est = small_estimator(max_steps=5)
    est.fit({"n_sites": 4, "h": 0.5})
    assert est.spec_ == IsingSpec(n_sites=4, h=0.5)
