"""Fused parameter blocks of the recurrent cells and their initialisation.

Gate pre-activations are computed in one product per input and split in the
order ``(i, f, o, g)``: input, forget, output gate and candidate memory.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import ClassVar, Dict, Mapping, Optional, Type, TypeVar

import numpy as np

from ..autodiff import Tensor, parameter
from ..errors import ConfigurationError

GATES = ("i", "f", "o", "g")
FORGET_BIAS = 1.0

B = TypeVar("B", bound="ParamBlock")


@dataclass
class ParamBlock:
    """Dataclass whose fields are parameter tensors or nested blocks."""

    _blocks: ClassVar[Dict[str, Type["ParamBlock"]]] = {}

    def named_tensors(self, prefix: str = "") -> Dict[str, Tensor]:
        out: Dict[str, Tensor] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            key = f"{prefix}{f.name}"
            if isinstance(value, ParamBlock):
                out.update(value.named_tensors(key + "."))
            else:
                out[key] = value
        return out

    @classmethod
    def from_arrays(cls: Type[B], arrays: Mapping[str, np.ndarray], prefix: str = "") -> B:
        kwargs = {}
        for f in fields(cls):
            key = f"{prefix}{f.name}"
            if f.name in cls._blocks:
                kwargs[f.name] = cls._blocks[f.name].from_arrays(arrays, key + ".")
            elif key in arrays:
                kwargs[f.name] = parameter(arrays[key], name=key)
            elif f.default is None:
                kwargs[f.name] = None
            else:
                raise ConfigurationError(f"Missing parameter '{key}'")
        return cls(**kwargs)


@dataclass
class VectorCellParams(ParamBlock):
    """Fully connected LSTM; optional attention perceptron and top-down input."""

    w_x: Tensor
    w_h: Tensor
    b: Tensor
    w_e: Optional[Tensor] = None
    w_xa: Optional[Tensor] = None
    w_ha: Optional[Tensor] = None
    b_a: Optional[Tensor] = None
    w_z: Optional[Tensor] = None

    @property
    def input_dim(self) -> int:
        return self.w_x.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w_h.shape[0]

    @property
    def has_attention(self) -> bool:
        return self.w_z is not None


@dataclass
class ConvCellParams(ParamBlock):
    """Convolutional LSTM kernels ``(k, k, Cin, 4K)``; optional attention kernels."""

    w_x: Tensor
    w_h: Tensor
    b: Tensor
    w_e: Optional[Tensor] = None
    w_xa: Optional[Tensor] = None
    w_ha: Optional[Tensor] = None
    b_a: Optional[Tensor] = None
    w_z: Optional[Tensor] = None

    def __post_init__(self) -> None:
        for name in ("w_x", "w_h", "w_e", "w_xa", "w_ha", "w_z"):
            kernel = getattr(self, name)
            if kernel is None:
                continue
            k, k2 = kernel.shape[:2]
            if k != k2 or k % 2 == 0:
                raise ConfigurationError(f"Kernel '{name}' must be square and odd-sized, got {k}×{k2}")
        if self.w_z is not None and self.w_z.shape[-1] != 1:
            raise ConfigurationError(f"Attention output kernel must produce 1 channel, got {self.w_z.shape}")

    @property
    def input_channels(self) -> int:
        return self.w_x.shape[2]

    @property
    def hidden_channels(self) -> int:
        return self.w_h.shape[2]

    @property
    def has_attention(self) -> bool:
        return self.w_z is not None


@dataclass
class MotionLayerParams(ConvCellParams):
    """Bottom layer of VideoLSTM; ``w_e`` convolves the previous top hidden state."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.w_e is None:
            raise ConfigurationError("MotionLayerParams requires the top-to-bottom kernel 'w_e'")


@dataclass
class VideoLSTMParams(ParamBlock):
    """Motion layer feeding the attention of a convolutional top layer."""

    _blocks: ClassVar[Dict[str, Type[ParamBlock]]] = {"bottom": MotionLayerParams, "top": ConvCellParams}

    bottom: MotionLayerParams
    top: ConvCellParams


@dataclass
class MotionALSTMParams(ParamBlock):
    """Vector counterpart of :class:`VideoLSTMParams`."""

    _blocks: ClassVar[Dict[str, Type[ParamBlock]]] = {"bottom": VectorCellParams, "top": VectorCellParams}

    bottom: VectorCellParams
    top: VectorCellParams


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int, name: str) -> Tensor:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return parameter(rng.uniform(-limit, limit, size=shape), name=name)


def gate_bias(hidden: int, name: str = "b") -> Tensor:
    bias = np.zeros(4 * hidden)
    bias[hidden : 2 * hidden] = FORGET_BIAS
    return parameter(bias, name=name)


def init_vector_cell(
    rng: np.random.Generator,
    input_dim: int,
    hidden: int,
    *,
    attention: bool = False,
    top_down: bool = False,
) -> VectorCellParams:
    params = VectorCellParams(
        w_x=glorot_uniform(rng, (input_dim, 4 * hidden), input_dim, hidden, "w_x"),
        w_h=glorot_uniform(rng, (hidden, 4 * hidden), hidden, hidden, "w_h"),
        b=gate_bias(hidden),
    )
    if top_down:
        params.w_e = glorot_uniform(rng, (hidden, 4 * hidden), hidden, hidden, "w_e")
    if attention:
        params.w_xa = glorot_uniform(rng, (input_dim, hidden), input_dim, hidden, "w_xa")
        params.w_ha = glorot_uniform(rng, (hidden, hidden), hidden, hidden, "w_ha")
        params.b_a = parameter(np.zeros(hidden), name="b_a")
        params.w_z = glorot_uniform(rng, (hidden, 1), hidden, 1, "w_z")
    return params


def _conv_kernel(rng: np.random.Generator, k: int, c_in: int, c_out: int, gates: int, name: str) -> Tensor:
    return glorot_uniform(rng, (k, k, c_in, gates * c_out), k * k * c_in, k * k * c_out, name)


def init_conv_cell(
    rng: np.random.Generator,
    in_channels: int,
    hidden: int,
    *,
    kernel: int = 3,
    attention: bool = False,
    attention_kernel: int = 1,
    top_down: bool = False,
) -> ConvCellParams:
    if kernel % 2 == 0 or attention_kernel % 2 == 0:
        raise ConfigurationError(f"Kernel sizes must be odd, got {kernel} and {attention_kernel}")
    w_x = _conv_kernel(rng, kernel, in_channels, hidden, 4, "w_x")
    w_h = _conv_kernel(rng, kernel, hidden, hidden, 4, "w_h")
    w_e = _conv_kernel(rng, kernel, hidden, hidden, 4, "w_e") if top_down else None
    extras = {}
    if attention:
        ka = attention_kernel
        extras = {
            "w_xa": _conv_kernel(rng, ka, in_channels, hidden, 1, "w_xa"),
            "w_ha": _conv_kernel(rng, ka, hidden, hidden, 1, "w_ha"),
            "b_a": parameter(np.zeros(hidden), name="b_a"),
            "w_z": _conv_kernel(rng, 1, hidden, 1, 1, "w_z"),
        }
    cls = MotionLayerParams if top_down else ConvCellParams
    return cls(w_x=w_x, w_h=w_h, b=gate_bias(hidden), w_e=w_e, **extras)
