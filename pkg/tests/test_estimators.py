import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from care import CARE, CARECV, ClrTransformer, OracleCLIME, OracleCLIMECV
from care.clime import CvConfig, cross_validate, estimate_columns, oracle_estimate, symmetrize
from care.compositional import clr_transform, sample_clr_covariance
from care.estimators import check_compositions
from care.exceptions import InvalidDimension, InvalidInput, InvalidParameter, NotStrictlyPositive
from care.simgen import GraphModelSpec, gen_omega, sample_counts, sample_logistic_normal


@pytest.fixture(scope="module")
def data():
    truth = gen_omega(GraphModelSpec("band", 8, seed=0))
    y, x = sample_logistic_normal(truth, 50, seed=1)
    return truth, y, x


def test_check_compositions():
    with pytest.raises(NotStrictlyPositive):
        check_compositions([[0.5, 0.5, 0.0]])
    with pytest.raises(InvalidInput):
        check_compositions([[-1.0, 2.0]])
    with pytest.raises(InvalidParameter):
        check_compositions([[0.5, 0.5]], zero_correction="pseudo")
    np.testing.assert_allclose(check_compositions([[1, 3]], zero_correction="vc"), [[0.3, 0.7]])


def test_clr_transformer_round_trip(data):
    _, _, x = data
    t = ClrTransformer().fit(x)
    z = t.transform(x)
    np.testing.assert_allclose(z, clr_transform(x))
    np.testing.assert_allclose(t.inverse_transform(z), x, atol=1e-12)
    np.testing.assert_allclose(ClrTransformer().fit_transform(x), z)
    with pytest.raises(InvalidDimension):
        t.transform(x[:, :4] / x[:, :4].sum(axis=1, keepdims=True))
    with pytest.raises(NotFittedError):
        ClrTransformer().transform(x)


def test_care_matches_functional(data):
    _, _, x = data
    est = CARE(lam=0.2).fit(x)
    s = sample_clr_covariance(clr_transform(x))
    raw = estimate_columns(s, 0.2)
    np.testing.assert_array_equal(est.raw_precision_, raw.matrix)
    np.testing.assert_array_equal(est.precision_, symmetrize(raw).matrix)
    assert est.stage_ == "symmetrized" and est.n_features_in_ == 8
    np.testing.assert_array_equal(est.get_precision(), est.precision_)


def test_care_default_lambda_and_threshold(data):
    _, _, x = data
    est = CARE().fit(x)
    np.testing.assert_allclose(est.lambda_, np.sqrt(np.log(8) / 50))
    thr = CARE(threshold=0.05).fit(x)
    assert thr.stage_ == "thresholded"
    assert np.all((thr.precision_ == 0) | (np.abs(thr.precision_) > 0.05))
    with pytest.raises(InvalidParameter):
        CARE(threshold=-1).fit(x)


def test_care_fit_covariance():
    s = np.eye(3) - 1 / 3
    est = CARE(lam=0.0).fit_covariance(s)
    np.testing.assert_allclose(est.precision_, np.eye(3), atol=1e-12)
    with pytest.raises(InvalidParameter):
        CARE().fit_covariance(s)


def test_care_counts(data):
    _, _, x = data
    counts = sample_counts(x, 20, 30, seed=0)
    counts[0, 0] = 0
    with pytest.raises(NotStrictlyPositive):
        CARE(lam=0.3).fit(counts)
    est = CARE(lam=0.3, zero_correction="vc").fit(counts)
    assert np.all(np.isfinite(est.precision_))


def test_carecv_matches_functional(data):
    _, _, x = data
    est = CARECV(n_grid=10, random_state=3).fit(x)
    res = cross_validate(clr_transform(x), CvConfig(n_grid=10, seed=3))
    np.testing.assert_array_equal(est.lambda_, res.lambdas)
    np.testing.assert_array_equal(est.precision_, res.estimate.matrix)
    assert est.cv_scores_.shape == est.lambda_grid_.shape == (8, 10)
    split = CARECV(n_grid=10, scheme="split").fit(x)
    assert split.lambda_.shape == (8,)


def test_score_prefers_fitted_over_zero(data):
    _, _, x = data
    fitted = CARE(lam=0.2).fit(x[:25])
    empty = CARE(lam=1.0).fit(x[:25])
    assert empty.score(x[25:]) == 0
    assert fitted.score(x[25:]) > empty.score(x[25:])


def test_oracle_estimators(data):
    _, y, _ = data
    est = OracleCLIME(lam=0.3).fit(y)
    np.testing.assert_array_equal(est.precision_, oracle_estimate(y, lambdas=0.3).matrix)
    cv = OracleCLIMECV(n_grid=8).fit(y)
    np.testing.assert_array_equal(cv.precision_, oracle_estimate(y, config=CvConfig(n_grid=8)).matrix)
    np.testing.assert_allclose(cv.lambda_grid_[:, 0], 1.0)


@pytest.mark.parametrize(
    "est", [CARE(lam=0.1), CARECV(n_folds=3, delta=0.5), OracleCLIME(), OracleCLIMECV(scheme="split"), ClrTransformer()]
)
def test_sklearn_params_and_clone(est):
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params() == params
    key = next(iter(params))
    est.set_params(**{key: params[key]})
    assert "precision_" not in vars(twin)


def test_unfitted_errors(data):
    _, _, x = data
    with pytest.raises(NotFittedError):
        CARE().get_precision()
    with pytest.raises(NotFittedError):
        CARE().score(x)
