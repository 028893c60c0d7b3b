from __future__ import annotations

import numpy as np

from ..errors import NumericError
from .specs import LogRegSpec


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def cross_entropy(Z: np.ndarray, y: np.ndarray) -> float:
    """Mean softmax cross-entropy of logits ``Z`` against integer labels."""
    zmax = Z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(Z - zmax).sum(axis=1)) + zmax[:, 0]
    return float(np.mean(lse - Z[np.arange(len(y)), y]))


class LogisticRegression:
    """Multinomial softmax regression, L2 penalty on the weights (not the bias).

    Fitted by full-batch gradient descent. A step that would raise the loss
    is rejected and retried with half the step size, so the accepted losses
    in ``loss_history`` never increase. Training stops when an accepted step
    improves the loss by less than ``tol`` or after ``max_iter`` iterations.
    """

    def __init__(self, spec: LogRegSpec, n_classes: int):
        self.spec = spec
        self.n_classes = n_classes
        self.W: np.ndarray | None = None
        self.b: np.ndarray | None = None
        self.loss_history: list[float] = []

    def _loss(self, Z, y, W) -> float:
        return cross_entropy(Z, y) + 0.5 * self.spec.l2 * float(np.sum(W * W))

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "LogisticRegression":
        # overflow is detected below and raised as NumericError
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self._fit(X, y, seed)

    def _fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "LogisticRegression":
        n, d = X.shape
        C = self.n_classes
        W = np.zeros((d, C))
        b = np.zeros(C)
        Y = np.zeros((n, C))
        Y[np.arange(n), y] = 1.0
        step = self.spec.lr
        Z = X @ W + b
        loss = self._loss(Z, y, W)
        if not np.isfinite(loss):
            raise NumericError("logistic regression: non-finite loss at iteration 0")
        history = [loss]
        for _ in range(self.spec.max_iter):
            G = (softmax(Z) - Y) / n
            gW = X.T @ G + self.spec.l2 * W
            gb = G.sum(axis=0)
            for _attempt in range(60):
                W_new = W - step * gW
                b_new = b - step * gb
                Z_new = X @ W_new + b_new
                new_loss = self._loss(Z_new, y, W_new)
                if np.isfinite(new_loss) and new_loss <= loss:
                    break
                step *= 0.5
            else:
                break
            W, b, Z = W_new, b_new, Z_new
            improvement = loss - new_loss
            loss = new_loss
            history.append(loss)
            if improvement < self.spec.tol:
                break
        self.W, self.b, self.loss_history = W, b, history
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(np.asarray(X, dtype=np.float64) @ self.W + self.b)

    def state(self) -> dict:
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_state(cls, spec: LogRegSpec, n_classes: int, state: dict) -> "LogisticRegression":
        m = cls(spec, n_classes)
        m.W = np.asarray(state["W"], dtype=np.float64).reshape(-1, n_classes)
        m.b = np.asarray(state["b"], dtype=np.float64)
        return m
