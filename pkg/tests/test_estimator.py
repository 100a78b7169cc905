import numpy as np
import pytest
from conftest import separable_dataset
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from qloan.data import load_csv
from qloan.estimator import LoanPreprocessor, QNNClassifier
from qloan.noise import NoiseSpec


@pytest.fixture(scope="module")
def fitted():
    ds = separable_dataset()
    clf = QNNClassifier(depth=2, n_iterations=40, random_state=0).fit(ds.X, ds.y)
    return clf, ds


def test_get_params_and_clone():
    clf = QNNClassifier(depth=3, optimizer="rmsprop")
    params = clf.get_params()
    assert params["depth"] == 3 and params["optimizer"] == "rmsprop"
    twin = clone(clf)
    assert twin.get_params() == params


def test_fit_predict(fitted):
    clf, ds = fitted
    assert clf.theta_.shape == (2, 2, 2)
    assert len(clf.loss_history_) == 40
    proba = clf.predict_proba(ds.X)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0)
    assert set(clf.predict(ds.X)) <= {0, 1}
    assert 0.0 <= clf.score(ds.X, ds.y) <= 1.0


def test_string_labels():
    ds = separable_dataset()
    y = np.where(ds.y == 1, "Y", "N")
    clf = QNNClassifier(depth=1, n_iterations=2).fit(ds.X, y)
    assert set(clf.predict(ds.X)) <= {"Y", "N"}


def test_noise_at_prediction(fitted):
    clf, ds = fitted
    noisy = clone(clf).set_params(noise=NoiseSpec("depolarizing", 1.0))
    noisy.theta_, noisy.classes_, noisy.n_features_in_ = clf.theta_, clf.classes_, clf.n_features_in_
    np.testing.assert_allclose(noisy.predict_proba(ds.X)[:, 1], 0.5, atol=1e-12)


def test_not_fitted():
    with pytest.raises(NotFittedError):
        QNNClassifier().predict(np.zeros((1, 2)))


def test_rejects_multiclass():
    with pytest.raises(ValueError):
        QNNClassifier(n_iterations=1).fit(np.zeros((3, 2)), [0, 1, 2])


def test_feature_count_checked(fitted):
    clf, _ = fitted
    with pytest.raises(ValueError):
        clf.predict(np.zeros((2, 3)))


def test_preprocessor_pipeline(loan_csv):
    records = load_csv(loan_csv(n=60))
    y = np.array([1 if r.loan_status == "Y" else 0 for r in records])
    pipe = make_pipeline(LoanPreprocessor(), QNNClassifier(depth=1, n_iterations=2))
    pipe.fit(records, y)
    assert pipe.predict(records).shape == (60,)


def test_preprocessor_dataframe(loan_csv):
    import pandas as pd

    path = loan_csv(n=30)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    from_frame = LoanPreprocessor().fit_transform(frame)
    from_records = LoanPreprocessor().fit_transform(load_csv(path))
    np.testing.assert_allclose(from_frame, from_records)
