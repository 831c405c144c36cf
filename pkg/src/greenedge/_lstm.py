"""Minimal batched LSTM with analytic gradients, in plain numpy.

One LSTM layer unrolled over a fixed window of scalar inputs, followed by a
dense head that emits the whole forecast horizon at once. Parameters live
in a plain dict of float64 arrays so the finite-difference gradient check
can perturb them one entry at a time.

Gate layout along the first axis of the stacked matrices is
input, forget, cell, output.
"""

from __future__ import annotations

import numpy as np

PARAM_NAMES = ("wx", "wh", "b", "wy", "by")


def init_params(hidden: int, horizon: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; biases start at zero."""

    def uniform(shape: tuple[int, ...], fan_in: int) -> np.ndarray:
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    return {
        "wx": uniform((4 * hidden, 1), 1),
        "wh": uniform((4 * hidden, hidden), hidden),
        "b": np.zeros(4 * hidden),
        "wy": uniform((horizon, hidden), hidden),
        "by": np.zeros(horizon),
    }


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def forward(params: dict[str, np.ndarray], windows: np.ndarray) -> tuple[np.ndarray, list]:
    """Run the network on a (batch, window) array.

    Returns the (batch, horizon) outputs and the per-step caches needed by
    backward(); callers that only predict can ignore the caches.
    """
    batch, steps = windows.shape
    hidden = params["wh"].shape[1]
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    caches = []
    for t in range(steps):
        x_t = windows[:, t : t + 1]
        z = x_t @ params["wx"].T + h @ params["wh"].T + params["b"]
        i = _sigmoid(z[:, :hidden])
        f = _sigmoid(z[:, hidden : 2 * hidden])
        g = np.tanh(z[:, 2 * hidden : 3 * hidden])
        o = _sigmoid(z[:, 3 * hidden :])
        c_prev = c
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h_prev_cache = h
        h = o * tc
        caches.append((x_t, h_prev_cache, c_prev, i, f, g, o, tc))
    y = h @ params["wy"].T + params["by"]
    caches.append(h)
    return y, caches


def loss_and_grads(
    params: dict[str, np.ndarray], windows: np.ndarray, targets: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean-squared-error loss and its gradient for one batch."""
    y, caches = forward(params, windows)
    h_last = caches.pop()
    batch, steps = windows.shape
    hidden = params["wh"].shape[1]

    diff = y - targets
    loss = float(np.mean(diff * diff))
    dy = 2.0 * diff / diff.size

    grads = {
        "wx": np.zeros_like(params["wx"]),
        "wh": np.zeros_like(params["wh"]),
        "b": np.zeros_like(params["b"]),
        "wy": dy.T @ h_last,
        "by": dy.sum(axis=0),
    }
    dh = dy @ params["wy"]
    dc = np.zeros((batch, hidden))
    for t in range(steps - 1, -1, -1):
        x_t, h_prev, c_prev, i, f, g, o, tc = caches[t]
        dc = dc + dh * o * (1.0 - tc * tc)
        do = dh * tc
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        grads["wx"] += dz.T @ x_t
        grads["wh"] += dz.T @ h_prev
        grads["b"] += dz.sum(axis=0)
        dh = dz @ params["wh"]
        dc = dc * f
    return loss, grads


def numeric_grads(
    params: dict[str, np.ndarray],
    windows: np.ndarray,
    targets: np.ndarray,
    epsilon: float = 1e-6,
) -> dict[str, np.ndarray]:
    """Central finite differences of the loss; slow, for verification only."""

    def loss_at(p: dict[str, np.ndarray]) -> float:
        y, _ = forward(p, windows)
        d = y - targets
        return float(np.mean(d * d))

    out: dict[str, np.ndarray] = {}
    for name in PARAM_NAMES:
        base = params[name]
        grad = np.zeros_like(base)
        flat = base.reshape(-1)
        gflat = grad.reshape(-1)
        for idx in range(flat.size):
            saved = flat[idx]
            flat[idx] = saved + epsilon
            up = loss_at(params)
            flat[idx] = saved - epsilon
            down = loss_at(params)
            flat[idx] = saved
            gflat[idx] = (up - down) / (2.0 * epsilon)
        out[name] = grad
    return out


class AdamState:
    """Per-parameter Adam accumulators."""

    def __init__(self, params: dict[str, np.ndarray], learning_rate: float) -> None:
        self.lr = learning_rate
        self.beta1 = 0.9
        self.beta2 = 0.999
        self.eps = 1e-8
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def update(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bias1 = 1.0 - self.beta1 ** self.t
        bias2 = 1.0 - self.beta2 ** self.t
        for k in params:
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grads[k]
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grads[k] ** 2
            m_hat = self.m[k] / bias1
            v_hat = self.v[k] / bias2
            params[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
