import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mfearl.estimators import GaussianProjection, ResidualExpander, SkillFactorClassifier


def test_expander_shapes_and_params(rng):
    est = ResidualExpander(depth=2, hidden_channels=4, epochs=2, random_state=0)
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        est.transform(rng.random((2, 3)))
    X = rng.random((10, 3))
    out = est.fit(X).transform(X)
    assert out.shape == (10, 9) and len(est.loss_curve_) == 2
    with pytest.raises(ValueError):
        est.transform(rng.random((2, 4)))


def test_expander_is_seeded(rng):
    X = rng.random((8, 4))
    a = ResidualExpander(depth=2, hidden_channels=4, epochs=1, random_state=5).fit_transform(X)
    b = ResidualExpander(depth=2, hidden_channels=4, epochs=1, random_state=5).fit_transform(X)
    np.testing.assert_array_equal(a, b)


def test_classifier_on_separable_data():
    rng = np.random.default_rng(0)
    y = np.repeat(["a", "b"], 60)
    X = np.where(y[:, None] == "a", 0.2, 0.8) + 0.05 * rng.standard_normal((120, 16))
    clf = SkillFactorClassifier(n_blocks=1, channels=4, learning_rate=1e-2, epochs=30, random_state=0).fit(X, y)
    assert set(clf.classes_) == {"a", "b"}
    assert clf.score(X, y) >= 0.95
    assert clf.decision_function(X[:3]).shape == (3, 2)
    with pytest.raises(ValueError):
        SkillFactorClassifier().fit(X[:, :15], y)


def test_projection_estimator(rng):
    X = rng.random((5, 30))
    proj = GaussianProjection(n_components=7, random_state=1).fit(X)
    assert proj.transform(X).shape == (5, 7)
    np.testing.assert_allclose(proj.transform(X), X @ proj.components_)
    with pytest.raises(ValueError):
        GaussianProjection(n_components=40).fit(X)
