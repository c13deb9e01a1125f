"""Recurrent state and attention records passed between timesteps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor, constant
from ..errors import ShapeError


@dataclass(frozen=True)
class CellState:
    """Hidden ``h`` and memory ``c`` of one layer; vectors or ``N×N×K`` maps."""

    h: Tensor
    c: Tensor

    def __post_init__(self) -> None:
        if self.h.shape != self.c.shape:
            raise ShapeError(f"CellState: hidden {self.h.shape} and memory {self.c.shape} differ")

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "CellState":
        return cls(constant(np.zeros(tuple(shape))), constant(np.zeros(tuple(shape))))

    @property
    def shape(self):
        return self.h.shape


@dataclass(frozen=True)
class AttentionMap:
    """Normalised ``(..., N, N)`` attention weights and the scores they came from."""

    weights: Tensor
    logits: Tensor

    def numpy(self) -> np.ndarray:
        return self.weights.numpy()

    @property
    def grid_size(self) -> int:
        return self.weights.shape[-1]


def gate_update(z: Tensor, state: CellState) -> CellState:
    """LSTM memory and output update from stacked ``(i, f, o, g)`` pre-activations on the last axis."""
    i, f, o, g = ad.split(z, 4, axis=-1)
    i, f, o, g = ad.sigmoid(i), ad.sigmoid(f), ad.sigmoid(o), ad.tanh(g)
    c = f * state.c + i * g
    h = o * ad.tanh(c)
    return CellState(h=h, c=c)
