from __future__ import annotations

import numpy as np

from .._rng import derive_rng
from ..errors import NumericError
from .linear import cross_entropy, softmax
from .specs import MlpSpec

PARAM_NAMES = ("W1", "b1", "W2", "b2")
# validation loss must drop by more than this to reset the patience counter
MIN_IMPROVEMENT = 1e-4


def init_params(d: int, hidden: int, n_classes: int, rng: np.random.Generator) -> dict:
    """Glorot-uniform weights, zero biases."""
    lim1 = np.sqrt(6.0 / (d + hidden))
    lim2 = np.sqrt(6.0 / (hidden + n_classes))
    return {
        "W1": rng.uniform(-lim1, lim1, size=(d, hidden)),
        "b1": np.zeros(hidden),
        "W2": rng.uniform(-lim2, lim2, size=(hidden, n_classes)),
        "b2": np.zeros(n_classes),
    }


def forward(params: dict, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (hidden activations, output logits)."""
    H = np.maximum(X @ params["W1"] + params["b1"], 0.0)
    return H, H @ params["W2"] + params["b2"]


def loss_and_grad(params: dict, X: np.ndarray, y: np.ndarray) -> tuple[float, dict]:
    """Mean cross-entropy and its gradient with respect to every parameter."""
    n = X.shape[0]
    pre = X @ params["W1"] + params["b1"]
    H = np.maximum(pre, 0.0)
    Z = H @ params["W2"] + params["b2"]
    loss = cross_entropy(Z, y)
    dZ = softmax(Z)
    dZ[np.arange(n), y] -= 1.0
    dZ /= n
    dH = (dZ @ params["W2"].T) * (pre > 0)
    grads = {
        "W2": H.T @ dZ,
        "b2": dZ.sum(axis=0),
        "W1": X.T @ dH,
        "b1": dH.sum(axis=0),
    }
    return loss, grads


class Mlp:
    """One hidden ReLU layer with a softmax output.

    Trained by mini-batch gradient descent with classical momentum. A seeded
    10% validation split drives early stopping: training ends after
    ``patience`` epochs in which the validation loss failed to improve by
    more than ``MIN_IMPROVEMENT``; the parameters with the lowest validation
    loss are kept.
    """

    def __init__(self, spec: MlpSpec, n_classes: int, params: dict | None = None):
        self.spec = spec
        self.n_classes = n_classes
        self.params = params
        self.epochs_run = 0

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int) -> "Mlp":
        # overflow is detected below and raised as NumericError
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self._fit(X, y, seed)

    def _fit(self, X: np.ndarray, y: np.ndarray, seed: int) -> "Mlp":
        spec = self.spec
        n, d = X.shape
        rng = derive_rng(seed, 0)
        perm = rng.permutation(n)
        n_val = min(n - 1, max(1, int(round(0.1 * n))))
        val, tr = perm[:n_val], perm[n_val:]
        Xv, yv, Xt, yt = X[val], y[val], X[tr], y[tr]

        params = init_params(d, spec.hidden, self.n_classes, derive_rng(seed, 1))
        velocity = {k: np.zeros_like(v) for k, v in params.items()}
        best = {k: v.copy() for k, v in params.items()}
        best_val = cross_entropy(forward(params, Xv)[1], yv)
        stale = 0
        epoch_rng = derive_rng(seed, 2)
        for epoch in range(1, spec.max_epochs + 1):
            order = epoch_rng.permutation(len(tr))
            for lo in range(0, len(order), spec.batch):
                batch = order[lo:lo + spec.batch]
                loss, grads = loss_and_grad(params, Xt[batch], yt[batch])
                if not np.isfinite(loss):
                    raise NumericError(f"MLP: non-finite loss in epoch {epoch}")
                for k in PARAM_NAMES:
                    velocity[k] *= spec.momentum
                    velocity[k] -= spec.lr * grads[k]
                    params[k] += velocity[k]
            val_loss = cross_entropy(forward(params, Xv)[1], yv)
            if not np.isfinite(val_loss):
                raise NumericError(f"MLP: non-finite validation loss in epoch {epoch}")
            self.epochs_run = epoch
            if val_loss < best_val:
                best = {k: v.copy() for k, v in params.items()}
            if val_loss < best_val - MIN_IMPROVEMENT:
                stale = 0
            else:
                stale += 1
            best_val = min(best_val, val_loss)
            if stale >= spec.patience:
                break
        self.params = best
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(forward(self.params, np.asarray(X, dtype=np.float64))[1])

    def state(self) -> dict:
        return {k: self.params[k].tolist() for k in PARAM_NAMES}

    @classmethod
    def from_state(cls, spec: MlpSpec, n_classes: int, state: dict) -> "Mlp":
        params = {
            "W1": np.asarray(state["W1"], dtype=np.float64).reshape(-1, spec.hidden),
            "b1": np.asarray(state["b1"], dtype=np.float64),
            "W2": np.asarray(state["W2"], dtype=np.float64).reshape(spec.hidden, n_classes),
            "b2": np.asarray(state["b2"], dtype=np.float64),
        }
        return cls(spec, n_classes, params)
