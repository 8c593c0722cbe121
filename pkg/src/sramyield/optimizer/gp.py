"""Small noise-free Gaussian-process regressor (Matern 5/2, ARD) in plain numpy/scipy."""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.optimize import minimize

JITTERS = (1e-10, 1e-8, 1e-6, 1e-4)


class GPFitError(RuntimeError):
    pass


def matern52(a: np.ndarray, b: np.ndarray, ls: np.ndarray) -> np.ndarray:
    a = a / ls
    b = b / ls
    d2 = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * (a @ b.T)
    d = np.sqrt(np.maximum(d2, 0.0))
    s5 = np.sqrt(5.0) * d
    return (1.0 + s5 + s5 * s5 / 3.0) * np.exp(-s5)


class GaussianProcess:
    """Zero-mean GP on standardised targets.

    Inputs are expected in the unit cube.  Hyperparameters are the ARD
    lengthscales, fitted by maximising the marginal likelihood (L-BFGS-B from
    a fixed start, so fits are deterministic).  Standardising the targets
    makes predictions shift-equivariant: adding a constant to ``y`` adds it
    to the posterior mean and leaves the std alone.
    """

    def __init__(self, lengthscales=None, bounds=(0.02, 5.0)):
        self.ls = None if lengthscales is None else np.asarray(lengthscales, dtype=float)
        self.bounds = bounds
        self.jitter = JITTERS[0]

    def _factor(self, x, ls):
        k = matern52(x, x, ls)
        for j in JITTERS:
            try:
                return cho_factor(k + j * np.eye(len(x)), lower=True), j
            except np.linalg.LinAlgError:
                continue
        raise GPFitError("kernel matrix not positive definite after jitter escalation")

    def _nll(self, log_ls, x, y):
        ls = np.exp(log_ls)
        try:
            (c, low), _ = self._factor(x, ls)
        except GPFitError:
            return 1e10
        alpha = cho_solve((c, low), y)
        return 0.5 * float(y @ alpha) + float(np.sum(np.log(np.diag(c))))

    def fit(self, x, y, optimize: bool = True) -> "GaussianProcess":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self.x = x
        self.mu = float(np.mean(y))
        sd = float(np.std(y))
        self.sd = sd if sd > 0 else 1.0
        yn = (y - self.mu) / self.sd
        if self.ls is None:
            self.ls = np.full(x.shape[1], 0.3)
        if optimize and len(x) > 2:
            lb, ub = np.log(self.bounds[0]), np.log(self.bounds[1])
            res = minimize(self._nll, np.log(self.ls), args=(x, yn), method="L-BFGS-B",
                           bounds=[(lb, ub)] * x.shape[1], options={"maxiter": 50})
            if np.all(np.isfinite(res.x)):
                self.ls = np.exp(res.x)
        self.cf, self.jitter = self._factor(x, self.ls)
        self.alpha = cho_solve(self.cf, yn)
        return self

    def predict(self, xq) -> tuple[np.ndarray, np.ndarray]:
        xq = np.atleast_2d(np.asarray(xq, dtype=float))
        ks = matern52(xq, self.x, self.ls)
        mean = ks @ self.alpha
        v = solve_triangular(self.cf[0], ks.T, lower=True)
        var = np.maximum(1.0 - np.sum(v * v, axis=0), 0.0)
        return self.mu + self.sd * mean, self.sd * np.sqrt(var)

    def sample(self, xq, n: int, gen: np.random.Generator) -> np.ndarray:
        """Independent (marginal) posterior draws, shape ``(n, len(xq))``."""
        m, s = self.predict(xq)
        return m[None, :] + s[None, :] * gen.standard_normal((n, len(m)))
