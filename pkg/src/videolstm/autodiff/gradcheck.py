"""Central finite-difference checks for reverse-mode gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence

import numpy as np

from ..errors import UsageError
from .tensor import Tensor, backward


@dataclass
class GradCheckResult:
    """Worst agreement between analytic and numeric gradients, per parameter."""

    max_rel_error: float
    per_parameter: Dict[str, float] = field(default_factory=dict)

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_rel_error < tolerance

    def to_dict(self) -> dict:
        return {"max_rel_error": self.max_rel_error, "per_parameter": dict(self.per_parameter)}


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """Max elementwise relative error; entries with magnitude below ``floor`` compare absolutely."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    diff = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    err = np.where(scale < floor, diff, diff / np.maximum(scale, floor))
    return float(err.max()) if err.size else 0.0


def numeric_gradient(loss_fn: Callable[[], Tensor], param: Tensor, eps: float = 1e-5) -> np.ndarray:
    """Estimate d loss / d param by central differences, one entry at a time."""
    original = param.data
    grad = np.zeros_like(original)
    flat = grad.reshape(-1)
    for i in range(original.size):
        probe = original.copy().reshape(-1)
        probe[i] += eps
        param.data = probe.reshape(original.shape)
        plus = loss_fn().item()
        probe[i] -= 2.0 * eps
        param.data = probe.reshape(original.shape)
        minus = loss_fn().item()
        flat[i] = (plus - minus) / (2.0 * eps)
    param.data = original
    return grad


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    eps: float = 1e-5,
) -> GradCheckResult:
    """Compare :func:`backward` against central differences for every tensor in ``params``.

    ``loss_fn`` must rebuild the graph from the current ``data`` of ``params`` on
    every call and return a scalar tensor.
    """
    if not params:
        raise UsageError("check_gradients needs at least one parameter")
    grads = backward(loss_fn())
    result = GradCheckResult(max_rel_error=0.0)
    for index, param in enumerate(params):
        analytic = grads.get(param, np.zeros_like(param.data))
        numeric = numeric_gradient(loss_fn, param, eps)
        err = relative_error(analytic, numeric)
        result.per_parameter[param.name or f"param{index}"] = err
        result.max_rel_error = max(result.max_rel_error, err)
    return result
