"""Dense float64 tensors that record the operations producing them."""

from __future__ import annotations

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import UsageError

BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tensor:
    """A node of the computation graph.

    ``data`` is never modified in place once the tensor has been produced by an
    operation; ``grad`` is filled by :func:`backward` and has the same shape.
    """

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward", "_op")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        *,
        name: str = "",
        _parents: Sequence["Tensor"] = (),
        _backward: Optional[BackwardFn] = None,
        _op: str = "",
    ) -> None:
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = tuple(_parents)
        self._backward = _backward
        self._op = _op

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def backward(self) -> Dict["Tensor", np.ndarray]:
        return backward(self)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        op = f" op={self._op}" if self._op else ""
        return f"Tensor(shape={self.shape}{label}{op}, requires_grad={self.requires_grad})"

    # Operator sugar; the implementations live in ``ops``.
    def __add__(self, other: "Tensor") -> "Tensor":
        from .ops import add

        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        from .ops import sub

        return sub(self, other)

    def __mul__(self, other) -> "Tensor":
        from .ops import hadamard, scale

        if isinstance(other, Tensor):
            return hadamard(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        from .ops import scale

        return scale(self, -1.0)


def constant(data) -> Tensor:
    """Wrap an array as a graph input that never receives a gradient."""
    return Tensor(data, requires_grad=False)


def parameter(data, name: str = "") -> Tensor:
    """Wrap an array as a trainable leaf."""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)


def make_node(
    data: np.ndarray,
    parents: Sequence[Tensor],
    backward_fn: BackwardFn,
    op: str,
) -> Tensor:
    """Create an operation output, recording parents only when a gradient can flow."""
    if not np.all(np.isfinite(data)) and all(np.all(np.isfinite(p.data)) for p in parents):
        raise FloatingPointError(f"Operation '{op}' produced non-finite values from finite inputs")
    needs_grad = any(p.requires_grad for p in parents)
    if not needs_grad:
        return Tensor(data, requires_grad=False, _op=op)
    return Tensor(data, requires_grad=True, _parents=parents, _backward=backward_fn, _op=op)


def _topological_order(root: Tensor) -> List[Tensor]:
    order: List[Tensor] = []
    visited: set[int] = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> Dict[Tensor, np.ndarray]:
    """Propagate gradients from a scalar ``loss`` to every reachable leaf.

    Gradients of all reachable nodes are recomputed from scratch (seed 1) and
    accumulate additively across fan-out. Returns the gradients of the leaves
    that require them, keyed by tensor.
    """
    if loss.data.size != 1:
        raise UsageError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return {}

    order = _topological_order(loss)
    for node in order:
        node.grad = None
    loss.grad = np.ones_like(loss.data)

    leaves: Dict[Tensor, np.ndarray] = {}
    for node in reversed(order):
        grad = node.grad
        if grad is None:
            continue
        if node.is_leaf:
            leaves[node] = grad
            continue
        parent_grads = node._backward(grad)
        for parent, parent_grad in zip(node._parents, parent_grads):
            if parent_grad is None or not parent.requires_grad:
                continue
            if parent.grad is None:
                parent.grad = np.array(parent_grad, dtype=np.float64, copy=True)
            else:
                parent.grad = parent.grad + parent_grad
        # Intermediate gradients are not needed once propagated.
        node.grad = None
    return leaves
