"""scikit-learn style wrappers around the networks and the random projection."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .nn import ResidualNet, SkillClassifier, TrainOptions, train_classifier, train_vdsr
from .projection import gaussian_projection


class ResidualExpander(TransformerMixin, BaseEstimator):
    """Maps genomes ``(n, D)`` to composed matrices, flattened to ``(n, D*D)``.

    ``fit(X, Y)`` trains the residual network towards target matrices ``Y``
    of shape ``(n, D, D)`` (or flattened ``(n, D*D)``). With ``Y=None`` the
    target is the row broadcast of ``X`` itself.
    """

    def __init__(self, depth=8, hidden_channels=64, learning_rate=1e-3, batch_size=20, epochs=5,
                 random_state=None):
        self.depth = depth
        self.hidden_channels = hidden_channels
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.random_state = random_state

    def fit(self, X, Y=None):
        X = check_array(X, dtype=np.float64)
        n, d = X.shape
        if Y is None:
            Y = np.broadcast_to(X[:, None, :], (n, d, d)).copy()
        Y = np.asarray(Y, dtype=np.float64).reshape(n, d, d)
        rng = np.random.default_rng(self.random_state)
        self.net_ = ResidualNet(d, self.depth, self.hidden_channels, seed=int(rng.integers(2**63)))
        opts = TrainOptions.vdsr(learning_rate=self.learning_rate, batch_size=self.batch_size, epochs=self.epochs)
        self.loss_curve_ = train_vdsr(self.net_, X, Y, opts, rng).losses
        self.n_features_in_ = d
        return self

    def transform(self, X):
        check_is_fitted(self, "net_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.net_.compose(X).reshape(X.shape[0], -1)


class SkillFactorClassifier(ClassifierMixin, BaseEstimator):
    """Residual CNN classifier over ``D x D`` matrices (flattened to ``D*D`` columns)."""

    def __init__(self, n_blocks=3, channels=16, learning_rate=1e-3, batch_size=32, epochs=50, patience=5,
                 val_fraction=0.2, random_state=None):
        self.n_blocks = n_blocks
        self.channels = channels
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.patience = patience
        self.val_fraction = val_fraction
        self.random_state = random_state

    def _images(self, X):
        d = int(round(np.sqrt(X.shape[1])))
        if d * d != X.shape[1]:
            raise ValueError(f"{X.shape[1]} columns do not form a square matrix")
        return X.reshape(-1, d, d), d

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, labels = np.unique(y, return_inverse=True)
        images, d = self._images(X)
        rng = np.random.default_rng(self.random_state)
        self.net_ = SkillClassifier(d, len(self.classes_), self.n_blocks, self.channels,
                                    seed=int(rng.integers(2**63)))
        opts = TrainOptions.resnet(learning_rate=self.learning_rate, batch_size=self.batch_size, epochs=self.epochs,
                                   patience=self.patience, val_fraction=self.val_fraction)
        res = train_classifier(self.net_, images, labels, opts, rng)
        self.validation_scores_ = res.val_accuracy
        self.best_epoch_ = res.best_epoch
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "net_")
        X = check_array(X, dtype=np.float64)
        return self.net_.forward(self._images(X)[0])

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


class GaussianProjection(TransformerMixin, BaseEstimator):
    """Fixed Gaussian map to ``n_components`` dims, entries N(0, 1/k)."""

    def __init__(self, n_components=16, random_state=None):
        self.n_components = n_components
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if self.n_components > X.shape[1]:
            raise ValueError("n_components exceeds the number of features")
        rng = np.random.default_rng(self.random_state)
        self.components_ = rng.standard_normal((X.shape[1], self.n_components)) / np.sqrt(self.n_components)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=np.float64)
        return X @ self.components_


__all__ = ["GaussianProjection", "ResidualExpander", "SkillFactorClassifier", "gaussian_projection"]
