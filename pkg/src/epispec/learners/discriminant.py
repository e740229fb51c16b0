"""Gaussian discriminant classifiers (linear and quadratic)."""
from __future__ import annotations

import numpy as np
from scipy import linalg

from ..errors import SingularCovarianceError
from .base import BinaryModel, register


def _regularized_cholesky(cov, ridge):
    d = cov.shape[0]
    cov = cov + ridge * np.trace(cov) / d * np.eye(d)
    try:
        return linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError:
        raise SingularCovarianceError("covariance is singular even after the ridge") from None


@register
class LinearDiscriminant(BinaryModel):
    """Pooled-covariance LDA; the score is the log posterior ratio, affine in x."""

    tag = "lda"

    def _fit(self, Z, y):
        pos, neg = Z[y == 1], Z[y == -1]
        mu_p, mu_n = pos.mean(axis=0), neg.mean(axis=0)
        scatter = (pos - mu_p).T @ (pos - mu_p) + (neg - mu_n).T @ (neg - mu_n)
        cov = scatter / max(Z.shape[0] - 2, 1)
        chol = _regularized_cholesky(cov, self.config.ridge)
        w = linalg.cho_solve((chol, True), mu_p - mu_n)
        prior = np.log(len(pos) / len(neg))
        self.coef_ = w
        self.intercept_ = float(-0.5 * (mu_p + mu_n) @ w + prior)

    def _scores(self, Z):
        return Z @ self.coef_ + self.intercept_

    def _params(self):
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_}

    def _load_params(self, p):
        self.coef_ = np.asarray(p["coef"], dtype=float)
        self.intercept_ = float(p["intercept"])


@register
class QuadraticDiscriminant(BinaryModel):
    """Per-class covariance QDA with the same ridge rule as LDA."""

    tag = "qda"

    def _fit(self, Z, y):
        n = Z.shape[0]
        self.classes_ = {}
        for label in (1, -1):
            part = Z[y == label]
            mu = part.mean(axis=0)
            dev = part - mu
            cov = dev.T @ dev / max(len(part) - 1, 1)
            chol = _regularized_cholesky(cov, self.config.ridge)
            logdet = 2.0 * np.sum(np.log(np.diag(chol)))
            self.classes_[label] = (mu, chol, logdet, np.log(len(part) / n))

    def _log_density(self, Z, label):
        mu, chol, logdet, prior = self.classes_[label]
        sol = linalg.solve_triangular(chol, (Z - mu).T, lower=True)
        return -0.5 * np.sum(sol ** 2, axis=0) - 0.5 * logdet + prior

    def _scores(self, Z):
        return self._log_density(Z, 1) - self._log_density(Z, -1)

    def _params(self):
        return {str(k): {"mean": mu.tolist(), "chol": chol.tolist(), "logdet": logdet, "log_prior": prior}
                for k, (mu, chol, logdet, prior) in self.classes_.items()}

    def _load_params(self, p):
        self.classes_ = {}
        for k, v in p.items():
            self.classes_[int(k)] = (np.asarray(v["mean"], dtype=float), np.asarray(v["chol"], dtype=float),
                                     float(v["logdet"]), float(v["log_prior"]))
