"""Estimator base utilities and input validation helpers.

The estimator classes in this package follow the scikit-learn parameter
protocol (``get_params`` / ``set_params``, constructor args stored verbatim,
fitted state in trailing-underscore attributes) so they compose with generic
tooling without requiring scikit-learn itself.
"""
from __future__ import annotations

import inspect

import numpy as np


class ParamsMixin:
    """get_params/set_params support compatible with the sklearn protocol."""

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [
            name
            for name, p in sig.parameters.items()
            if name != "self" and p.kind not in (p.VAR_POSITIONAL, p.VAR_KEYWORD)
        ]

    def get_params(self, deep: bool = True) -> dict:
        params = {}
        for name in self._param_names():
            value = getattr(self, name)
            params[name] = value
            if deep and hasattr(value, "get_params"):
                for sub, sub_val in value.get_params(deep=True).items():
                    params[f"{name}__{sub}"] = sub_val
        return params

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            key, _, sub = name.partition("__")
            if key not in valid:
                raise ValueError(f"invalid parameter {name!r} for {type(self).__name__}")
            if sub:
                getattr(self, key).set_params(**{sub: value})
            else:
                setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={getattr(self, k)!r}" for k in self._param_names())
        return f"{type(self).__name__}({args})"


def check_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )


def check_frame(frame: np.ndarray) -> np.ndarray:
    """Validate an RGB frame array of shape (H, W, 3), dtype uint8."""
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"frame must have shape (H, W, 3), got {frame.shape}")
    if frame.dtype != np.uint8:
        raise ValueError(f"frame must be uint8, got {frame.dtype}")
    return frame


def check_mask(labels: np.ndarray, shape=None) -> np.ndarray:
    """Validate a binary label array of shape (H, W) with values in {0, 1}."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError(f"mask must have shape (H, W), got {labels.shape}")
    if labels.dtype != np.uint8:
        labels = labels.astype(np.uint8)
    if labels.max(initial=0) > 1:
        raise ValueError("mask values must be 0 or 1")
    if shape is not None and labels.shape != tuple(shape):
        raise ValueError(f"mask shape {labels.shape} does not match frame shape {tuple(shape)}")
    return labels


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "arrays") -> None:
    if a.shape[:2] != b.shape[:2]:
        raise ValueError(f"{what} have mismatched dimensions: {a.shape[:2]} vs {b.shape[:2]}")
