"""One-hidden-layer perceptron trained by backpropagation."""
from __future__ import annotations

import warnings

import numba
import numpy as np

from .base import BinaryModel, register


def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def init_params(n_in, n_hidden, init_range, rng):
    u = lambda *shape: rng.uniform(-init_range, init_range, size=shape)
    return {"W1": u(n_hidden, n_in), "b1": u(n_hidden), "w2": u(n_hidden), "b2": u(1)[0]}


def forward(params, Z):
    h = _sigmoid(Z @ params["W1"].T + params["b1"])
    o = _sigmoid(h @ params["w2"] + params["b2"])
    return h, o


def loss_and_grad(params, Z, t):
    """Summed squared error ``0.5 * sum (o - t)^2`` and its gradient.

    `t` holds targets in {0, 1}.
    """
    h, o = forward(params, Z)
    err = o - t
    loss = 0.5 * float(err @ err)
    delta_o = err * o * (1.0 - o)
    delta_h = np.outer(delta_o, params["w2"]) * h * (1.0 - h)
    grad = {
        "W1": delta_h.T @ Z,
        "b1": delta_h.sum(axis=0),
        "w2": h.T @ delta_o,
        "b2": float(delta_o.sum()),
    }
    return loss, grad


@numba.njit(cache=True)
def _online_epochs(W1, b1, w2, b2, Z, t, orders, lr, mom):
    """Per-example momentum updates; same arithmetic as `loss_and_grad` on one row."""
    n_hidden, n_in = W1.shape
    vW1 = np.zeros_like(W1)
    vb1 = np.zeros_like(b1)
    vw2 = np.zeros_like(w2)
    vb2 = 0.0
    h = np.empty(n_hidden)
    dh = np.empty(n_hidden)
    for e in range(orders.shape[0]):
        for r in range(orders.shape[1]):
            i = orders[e, r]
            x = Z[i]
            acc = b2
            for k in range(n_hidden):
                a = b1[k]
                for j in range(n_in):
                    a += W1[k, j] * x[j]
                h[k] = 0.5 * (1.0 + np.tanh(0.5 * a))
                acc += h[k] * w2[k]
            o = 0.5 * (1.0 + np.tanh(0.5 * acc))
            do = (o - t[i]) * o * (1.0 - o)
            for k in range(n_hidden):
                dh[k] = do * w2[k] * h[k] * (1.0 - h[k])
            for k in range(n_hidden):
                for j in range(n_in):
                    vW1[k, j] = mom * vW1[k, j] - lr * dh[k] * x[j]
                    W1[k, j] += vW1[k, j]
                vb1[k] = mom * vb1[k] - lr * dh[k]
                b1[k] += vb1[k]
                vw2[k] = mom * vw2[k] - lr * do * h[k]
                w2[k] += vw2[k]
            vb2 = mom * vb2 - lr * do
            b2 += vb2
    return b2


def train_online(params, Z, t, orders, lr, mom, accelerated=True):
    """Run the epochs listed in `orders` (one row of visiting order per epoch).

    `params` is copied; the trained copy is returned.  The numba kernel and
    the plain numpy loop compute the same updates.
    """
    p = {"W1": np.array(params["W1"], dtype=float), "b1": np.array(params["b1"], dtype=float),
         "w2": np.array(params["w2"], dtype=float), "b2": float(params["b2"])}
    orders = np.ascontiguousarray(orders, dtype=np.int64)
    if accelerated:
        p["b2"] = float(_online_epochs(p["W1"], p["b1"], p["w2"], p["b2"],
                                       np.ascontiguousarray(Z, dtype=float),
                                       np.ascontiguousarray(t, dtype=float), orders, lr, mom))
        return p
    velocity = {k: np.zeros_like(v) if isinstance(v, np.ndarray) else 0.0 for k, v in p.items()}
    for row in orders:
        for i in row:
            _, g = loss_and_grad(p, Z[i:i + 1], t[i:i + 1])
            for k in p:
                velocity[k] = mom * velocity[k] - lr * g[k]
                p[k] = p[k] + velocity[k]
    return p


@register
class MultilayerPerceptron(BinaryModel):
    """d -> H -> 1 logistic network, per-example gradient descent with momentum.

    Rows are visited in a seeded random order each epoch.  The score is the
    network output minus 0.5.
    """

    tag = "bp-mlp"

    def _fit(self, Z, y):
        cfg = self.config
        rng = np.random.default_rng([int(cfg.seed), 0x6D6C70])
        params = init_params(Z.shape[1], cfg.mlp_hidden, cfg.mlp_init_range, rng)
        t = (y == 1).astype(float)
        n = Z.shape[0]
        if cfg.mlp_shuffle:
            orders = np.stack([rng.permutation(n) for _ in range(cfg.mlp_epochs)]) \
                if cfg.mlp_epochs else np.empty((0, n), dtype=np.int64)
        else:
            orders = np.tile(np.arange(n), (cfg.mlp_epochs, 1))
        params = train_online(params, Z, t, orders, cfg.mlp_learning_rate, cfg.mlp_momentum)
        self.params_ = params
        loss, _ = loss_and_grad(params, Z, t)
        _, o = forward(params, Z)
        train_err = float(np.mean((o > 0.5) != (t == 1)))
        self.diagnostics = {"final_mse": loss / n, "training_error": train_err,
                            "converged": bool(np.isfinite(loss) and train_err == 0.0)}
        if not np.isfinite(loss):
            warnings.warn("MLP training diverged", RuntimeWarning, stacklevel=3)

    def _scores(self, Z):
        return forward(self.params_, Z)[1] - 0.5

    def _params(self):
        return {k: (v.tolist() if isinstance(v, np.ndarray) else float(v)) for k, v in self.params_.items()}

    def _load_params(self, p):
        self.params_ = {"W1": np.asarray(p["W1"], dtype=float), "b1": np.asarray(p["b1"], dtype=float),
                        "w2": np.asarray(p["w2"], dtype=float), "b2": float(p["b2"])}
