"""RMSProp with global-norm gradient clipping."""

from __future__ import annotations

from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from ..autodiff import Tensor, global_norm
from ..config import TrainConfig
from ..errors import DivergenceError, ShapeError


def rmsprop_update(
    param: np.ndarray,
    grad: np.ndarray,
    cache: np.ndarray,
    cfg: TrainConfig,
    *,
    name: str = "",
) -> Tuple[np.ndarray, np.ndarray]:
    """Return the updated ``(param, cache)``; inputs are left untouched."""
    if param.shape != grad.shape or cache.shape != grad.shape:
        raise ShapeError(f"rmsprop_update '{name}': shapes {param.shape}, {grad.shape}, {cache.shape} differ")
    if not np.all(np.isfinite(grad)):
        raise DivergenceError(
            f"Non-finite gradient for parameter '{name}'",
            diagnostics={"parameter": name, "nonfinite_entries": int(np.count_nonzero(~np.isfinite(grad)))},
        )
    cache = cfg.decay * cache + (1.0 - cfg.decay) * grad * grad
    param = param - cfg.learning_rate * grad / (np.sqrt(cache) + cfg.epsilon)
    return param, cache


def clip_gradients(
    grads: Mapping[str, np.ndarray],
    max_norm: Optional[float],
) -> Tuple[Dict[str, np.ndarray], float]:
    """Rescale all gradients together when their global norm exceeds ``max_norm``."""
    norm = global_norm(grads.values())
    if max_norm is None or norm <= max_norm or norm == 0.0:
        return dict(grads), norm
    factor = max_norm / norm
    return {key: grad * factor for key, grad in grads.items()}, norm


class RMSProp:
    """Per-parameter running mean-square caches keyed by parameter name."""

    def __init__(self, cfg: TrainConfig):
        self.cfg = cfg
        self.caches: Dict[str, np.ndarray] = {}

    def step(self, params: Mapping[str, Tensor], grads: Mapping[str, np.ndarray]) -> None:
        """Update every parameter; nothing is modified if any gradient is non-finite."""
        updates = {}
        for key, tensor in params.items():
            grad = grads.get(key)
            if grad is None:
                grad = np.zeros_like(tensor.data)
            cache = self.caches.get(key)
            if cache is None:
                cache = np.zeros_like(tensor.data)
            updates[key] = rmsprop_update(tensor.data, grad, cache, self.cfg, name=key)
        for key, (value, cache) in updates.items():
            params[key].data = value
            self.caches[key] = cache

    def state_arrays(self) -> Dict[str, np.ndarray]:
        return {key: cache.copy() for key, cache in self.caches.items()}

    def load_state(self, arrays: Mapping[str, np.ndarray]) -> None:
        for key, cache in arrays.items():
            if np.any(cache < 0):
                raise ValueError(f"Optimizer cache '{key}' has negative entries")
        self.caches = {key: np.array(cache, dtype=np.float64) for key, cache in arrays.items()}
