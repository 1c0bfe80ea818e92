import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from coulomb_sobolev.estimators import FEATURES, EnergyEvaluator, QuotientMaximizer
from coulomb_sobolev.functionals import evaluate
from coulomb_sobolev.exponents import ParamSet, quotient_exponents
from coulomb_sobolev.radial import BumpParams, superposition


def profiles():
    return [superposition([BumpParams(lam, R, 1.0)], 3, 64) for lam, R in ((1, 5), (2, 10))]


def test_evaluator_rows_match_functionals():
    X = profiles()
    est = EnergyEvaluator(p=3).fit(X)
    out = est.transform(X)
    assert out.shape == (2, len(FEATURES))
    params = ParamSet(3, 1, 2, 2, 3)
    rep = evaluate(X[1], params, quotient_exponents(params))
    np.testing.assert_allclose(out[1], [rep.lp_power, rep.seminorm_sq, rep.coulomb,
                                        rep.quotient], rtol=1e-14)
    assert list(est.get_feature_names_out()) == list(FEATURES)


def test_evaluator_clone_and_params():
    est = EnergyEvaluator(d=3, s=0.5, alpha=1.5, q=2, p=3)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    twin.set_params(p=4)
    assert est.p == 3 and twin.p == 4
    with pytest.raises(NotFittedError):
        est.transform(profiles())


def test_evaluator_in_pipeline():
    pipe = make_pipeline(EnergyEvaluator(p=3), FunctionTransformer(np.log))
    out = pipe.fit_transform(profiles())
    assert np.all(np.isfinite(out))


def test_evaluator_rejects_invalid_params_on_fit():
    with pytest.raises(Exception, match="alpha"):
        EnergyEvaluator(alpha=5).fit(None)


def test_maximizer_fit_score():
    est = QuotientMaximizer(p=4, starts=3, random_state=1)
    assert est.fit() is est
    assert est.score() == est.Q_ == max(est.start_values_)
    assert est.spread_ < 0.01
    assert est.n_iter_ > 0
    assert est.best_state_.status.value == "Converged"
    again = clone(est).fit()
    assert again.Q_ == est.Q_
    with pytest.raises(NotFittedError):
        QuotientMaximizer().score()
