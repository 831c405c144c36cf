"""Short-horizon forecasters for workload and harvest series.

Two interchangeable predictors, both exposing the estimator interface
(fit / predict / get_params / set_params):

* SeasonalNaivePredictor repeats the value observed one period earlier.
  It needs no training, which also makes it the reference any learned
  model has to beat.
* LstmPredictor is a small recurrent network trained with Adam on sliding
  windows of a normalized series. It emits the whole horizon in one shot.

Forecasts operate on normalized series (values in [0, 1]); predictions are
clipped back into that interval. Callers keep the scale and invert it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _lstm
from ._validation import as_float_array, require


class NotFittedError(RuntimeError):
    """predict() was called before fit()."""


@dataclass(frozen=True)
class PredictorConfig:
    """Training and shape settings shared by the forecasters."""

    window: int = 48  # input slots fed to the model
    horizon: int = 3  # slots predicted ahead
    hidden_units: int = 32
    epochs: int = 20
    batch_size: int = 4
    train_fraction: float = 0.7
    learning_rate: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        require(self.window >= 1, "window must be >= 1")
        require(self.horizon >= 1, "horizon must be >= 1")
        require(self.hidden_units >= 1, "hidden_units must be >= 1")
        require(self.epochs >= 1, "epochs must be >= 1")
        require(self.batch_size >= 1, "batch_size must be >= 1")
        require(0.0 < self.train_fraction <= 1.0, "train_fraction must lie in (0, 1]")
        require(self.learning_rate > 0.0, "learning_rate must be positive")


@dataclass(frozen=True)
class Forecast:
    """Predicted values for slots origin+1 .. origin+len(values)."""

    site_id: str
    origin_slot: int
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        require(len(self.values) >= 1, "forecast must cover at least one slot")


class SeasonalNaivePredictor:
    """Forecast slot t+k with the value observed at t+k-period."""

    def __init__(self, period: int = 48, horizon: int = 3):
        require(period >= 1, "period must be >= 1")
        require(horizon >= 1, "horizon must be >= 1")
        require(horizon <= period, "horizon beyond one period is not defined for this model")
        self.period = period
        self.horizon = horizon
        self.fitted_ = True  # stateless; fit is a no-op kept for interface parity

    def get_params(self, deep: bool = True) -> dict:
        return {"period": self.period, "horizon": self.horizon}

    def set_params(self, **params) -> "SeasonalNaivePredictor":
        allowed = self.get_params()
        for key, value in params.items():
            if key not in allowed:
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(self, values: Sequence[float]) -> "SeasonalNaivePredictor":
        as_float_array(values, "values")
        return self

    def predict(self, recent_window: Sequence[float]) -> np.ndarray:
        window = as_float_array(recent_window, "recent_window")
        if window.size < self.period:
            raise ValueError(
                f"seasonal lookup needs at least one period ({self.period}) of history, "
                f"got {window.size} values"
            )
        start = window.size - self.period
        return window[start : start + self.horizon].copy()


class LstmPredictor:
    """Recurrent forecaster trained on sliding windows of one series."""

    def __init__(
        self,
        window: int = 48,
        horizon: int = 3,
        hidden_units: int = 32,
        epochs: int = 20,
        batch_size: int = 4,
        train_fraction: float = 0.7,
        learning_rate: float = 0.01,
        seed: int = 0,
    ):
        self.window = window
        self.horizon = horizon
        self.hidden_units = hidden_units
        self.epochs = epochs
        self.batch_size = batch_size
        self.train_fraction = train_fraction
        self.learning_rate = learning_rate
        self.seed = seed
        self.params_: dict[str, np.ndarray] | None = None
        self.loss_history_: list[float] = []

    @classmethod
    def from_config(cls, cfg: PredictorConfig) -> "LstmPredictor":
        return cls(
            window=cfg.window,
            horizon=cfg.horizon,
            hidden_units=cfg.hidden_units,
            epochs=cfg.epochs,
            batch_size=cfg.batch_size,
            train_fraction=cfg.train_fraction,
            learning_rate=cfg.learning_rate,
            seed=cfg.seed,
        )

    def get_params(self, deep: bool = True) -> dict:
        return {
            "window": self.window,
            "horizon": self.horizon,
            "hidden_units": self.hidden_units,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "train_fraction": self.train_fraction,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
        }

    def set_params(self, **params) -> "LstmPredictor":
        allowed = self.get_params()
        for key, value in params.items():
            if key not in allowed:
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def _check_config(self) -> None:
        # late validation so set_params cannot leave a silently broken model
        PredictorConfig(
            window=self.window,
            horizon=self.horizon,
            hidden_units=self.hidden_units,
            epochs=self.epochs,
            batch_size=self.batch_size,
            train_fraction=self.train_fraction,
            learning_rate=self.learning_rate,
            seed=self.seed,
        )

    def fit(self, values: Sequence[float]) -> "LstmPredictor":
        """Train on the first train_fraction of a normalized series."""
        self._check_config()
        series = as_float_array(values, "values")
        if series.min() < -1e-9 or series.max() > 1.0 + 1e-9:
            raise ValueError("training series must be normalized to [0, 1]")
        n_train = int(math.floor(self.train_fraction * series.size))
        n_samples = n_train - self.window - self.horizon + 1
        if n_samples < 1:
            raise ValueError(
                f"training split of {n_train} slots is too short for window "
                f"{self.window} plus horizon {self.horizon}"
            )
        windows = np.empty((n_samples, self.window))
        targets = np.empty((n_samples, self.horizon))
        for i in range(n_samples):
            windows[i] = series[i : i + self.window]
            targets[i] = series[i + self.window : i + self.window + self.horizon]

        rng = np.random.default_rng(self.seed)
        params = _lstm.init_params(self.hidden_units, self.horizon, rng)
        adam = _lstm.AdamState(params, self.learning_rate)
        self.loss_history_ = []
        for _ in range(self.epochs):
            order = rng.permutation(n_samples)
            epoch_loss = 0.0
            for start in range(0, n_samples, self.batch_size):
                batch = order[start : start + self.batch_size]
                loss, grads = _lstm.loss_and_grads(params, windows[batch], targets[batch])
                adam.update(params, grads)
                epoch_loss += loss * batch.size
            self.loss_history_.append(epoch_loss / n_samples)
        self.params_ = params
        return self

    def predict(self, recent_window: Sequence[float]) -> np.ndarray:
        """Forecast the next horizon slots from the trailing window."""
        if self.params_ is None:
            raise NotFittedError("LstmPredictor.predict called before fit")
        window = as_float_array(recent_window, "recent_window")
        if window.size < self.window:
            raise ValueError(f"need at least {self.window} recent values, got {window.size}")
        inputs = window[-self.window :].reshape(1, -1)
        outputs, _ = _lstm.forward(self.params_, inputs)
        return np.clip(outputs[0], 0.0, 1.0)


def fit_predictor(values: Sequence[float], cfg: PredictorConfig, kind: str = "lstm"):
    """Build and train the predictor *kind* on a normalized series."""
    if kind == "lstm":
        return LstmPredictor.from_config(cfg).fit(values)
    if kind == "seasonal_naive":
        return SeasonalNaivePredictor(period=cfg.window, horizon=cfg.horizon).fit(values)
    raise ValueError(f"unknown predictor kind {kind!r}")


def predict(predictor, recent_window: Sequence[float], site_id: str = "site", origin_slot: int = 0) -> Forecast:
    """Wrap a predictor's raw output in a Forecast record."""
    values = predictor.predict(recent_window)
    return Forecast(site_id=site_id, origin_slot=origin_slot, values=tuple(float(v) for v in values))


def rmse(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Root mean squared error between two equal-length sequences."""
    p = as_float_array(predicted, "predicted")
    a = as_float_array(actual, "actual")
    if p.size != a.size:
        raise ValueError(f"length mismatch: {p.size} predictions vs {a.size} actuals")
    return float(np.sqrt(np.mean((p - a) ** 2)))


def evaluate(predictor, values: Sequence[float], cfg: PredictorConfig) -> dict:
    """Held-out accuracy of *predictor* on the last 1 - train_fraction of a series.

    Every forecast origin whose input window and targets both fit inside the
    held-out segment is scored. Returns per-horizon-step RMSE (index k holds
    the k+1-slots-ahead error), the pooled RMSE and the origin count.
    """
    series = as_float_array(values, "values")
    n_train = int(math.floor(cfg.train_fraction * series.size))
    first_origin = n_train + cfg.window
    last_origin = series.size - cfg.horizon
    if first_origin > last_origin:
        raise ValueError(
            f"held-out segment of {series.size - n_train} slots is shorter than "
            f"window {cfg.window} plus horizon {cfg.horizon}"
        )
    errors = np.zeros(cfg.horizon)
    count = 0
    for origin in range(first_origin, last_origin + 1):
        window = series[origin - cfg.window : origin]
        truth = series[origin : origin + cfg.horizon]
        pred = np.asarray(predictor.predict(window), dtype=float)[: cfg.horizon]
        errors += (pred - truth) ** 2
        count += 1
    per_step = tuple(float(v) for v in np.sqrt(errors / count))
    overall = float(np.sqrt(np.sum(errors) / (count * cfg.horizon)))
    return {"horizon_rmse": per_step, "overall": overall, "n_origins": count}


_FORMAT_TAG = "greenedge-predictor v1"


def save_predictor(predictor, path: str) -> None:
    """Write a predictor to a plain-text file (dimensions, then weights).

    Floats are written with 17 significant digits, which round-trips IEEE
    doubles exactly.
    """
    lines = [_FORMAT_TAG]
    if isinstance(predictor, SeasonalNaivePredictor):
        lines.append("kind seasonal_naive")
        lines.append(f"period {predictor.period}")
        lines.append(f"horizon {predictor.horizon}")
    elif isinstance(predictor, LstmPredictor):
        if predictor.params_ is None:
            raise NotFittedError("cannot save an unfitted LstmPredictor")
        lines.append("kind lstm")
        for key, value in predictor.get_params().items():
            lines.append(f"{key} {value}")
        for name in _lstm.PARAM_NAMES:
            arr = predictor.params_[name]
            shape = arr.shape if arr.ndim == 2 else (arr.shape[0], 1)
            lines.append(f"weights {name} {shape[0]} {shape[1]}")
            for row in arr.reshape(shape):
                lines.append(" ".join(f"{v:.17g}" for v in row))
    else:
        raise TypeError(f"cannot serialize predictor of type {type(predictor).__name__}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_predictor(path: str):
    """Inverse of save_predictor."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != _FORMAT_TAG:
        raise ValueError(f"{path}: not a recognized predictor file")
    header: dict[str, str] = {}
    idx = 1
    while idx < len(lines) and not lines[idx].startswith("weights "):
        key, _, value = lines[idx].partition(" ")
        header[key] = value
        idx += 1
    kind = header.get("kind")
    if kind == "seasonal_naive":
        return SeasonalNaivePredictor(period=int(header["period"]), horizon=int(header["horizon"]))
    if kind != "lstm":
        raise ValueError(f"{path}: unknown predictor kind {kind!r}")
    model = LstmPredictor(
        window=int(header["window"]),
        horizon=int(header["horizon"]),
        hidden_units=int(header["hidden_units"]),
        epochs=int(header["epochs"]),
        batch_size=int(header["batch_size"]),
        train_fraction=float(header["train_fraction"]),
        learning_rate=float(header["learning_rate"]),
        seed=int(header["seed"]),
    )
    params: dict[str, np.ndarray] = {}
    while idx < len(lines):
        tag, name, rows, cols = lines[idx].split()
        require(tag == "weights", f"{path}: malformed weight header at line {idx + 1}")
        rows, cols = int(rows), int(cols)
        block = np.array(
            [[float(v) for v in lines[idx + 1 + r].split()] for r in range(rows)]
        )
        params[name] = block if name in ("wx", "wh", "wy") else block.reshape(-1)
        idx += 1 + rows
    missing = set(_lstm.PARAM_NAMES) - set(params)
    if missing:
        raise ValueError(f"{path}: missing weight blocks {sorted(missing)}")
    model.params_ = params
    return model
