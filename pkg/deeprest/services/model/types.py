"""
Numeric containers for the multi-layer transform model

These hold numpy arrays, so they are frozen dataclasses rather than
pydantic models; configuration objects stay in database.schemas.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from deeprest.core.errors import InvalidArgumentError
from deeprest.database.schemas import LayerConfig


def validate_layer_chain(configs: Sequence[LayerConfig]) -> None:
    """
    Check depth consistency: c_1 = 1 and c_{l+1} = keep_l

    Raises:
        InvalidArgumentError: on an empty or inconsistent chain
    """
    if not configs:
        raise InvalidArgumentError("at least one layer is required")
    if configs[0].patch.c != 1:
        raise InvalidArgumentError(f"layer 1 must have patch depth 1, got {configs[0].patch.c}")
    for index, (cfg, nxt) in enumerate(zip(configs, configs[1:]), start=1):
        if cfg.keep is None:
            raise InvalidArgumentError(f"layer {index} needs a keep count (it feeds layer {index + 1})")
        if nxt.patch.c != cfg.keep:
            raise InvalidArgumentError(
                f"layer {index + 1} patch depth {nxt.patch.c} must equal layer {index} keep={cfg.keep}"
            )


@dataclass(frozen=True)
class TransformLayer:
    """
    Learned unitary transform plus the residual maps it forwards
    """
    omega: np.ndarray
    retained: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        omega = np.array(self.omega, dtype=np.float64)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
            raise InvalidArgumentError(f"transform must be square, got shape {omega.shape}")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        if self.retained is not None:
            retained = tuple(int(i) for i in self.retained)
            if list(retained) != sorted(set(retained)):
                raise InvalidArgumentError("retained indices must be distinct and ascending")
            if retained and (retained[0] < 0 or retained[-1] >= omega.shape[0]):
                raise InvalidArgumentError(f"retained indices out of range [0, {omega.shape[0]})")
            object.__setattr__(self, "retained", retained)

    @property
    def filters(self) -> int:
        return self.omega.shape[0]


@dataclass(frozen=True)
class DeepRestModel:
    """
    Ordered transform layers with their configs and the training image size
    """
    layers: Tuple[TransformLayer, ...]
    configs: Tuple[LayerConfig, ...]
    image_dims: Tuple[int, int]

    def __post_init__(self):
        layers = tuple(self.layers)
        configs = tuple(self.configs)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "configs", configs)
        object.__setattr__(self, "image_dims", (int(self.image_dims[0]), int(self.image_dims[1])))
        if len(layers) != len(configs):
            raise InvalidArgumentError(f"{len(layers)} layers but {len(configs)} configs")
        validate_layer_chain(configs)
        for index, (layer, cfg) in enumerate(zip(layers, configs), start=1):
            if layer.filters != cfg.filters:
                raise InvalidArgumentError(
                    f"layer {index} transform has {layer.filters} rows, config expects {cfg.filters}"
                )
            is_last = index == len(layers)
            if not is_last and (layer.retained is None or len(layer.retained) != cfg.keep):
                raise InvalidArgumentError(f"layer {index} must retain exactly {cfg.keep} maps")

    @property
    def depth(self) -> int:
        """Layer count L"""
        return len(self.layers)


@dataclass(frozen=True)
class EncodedImage:
    """
    Coefficient maps Z^1..Z^L and the (depth, H, W) input volume of each layer
    """
    coeffs: Tuple[np.ndarray, ...]
    dims: Tuple[Tuple[int, int, int], ...]

    def sparsity(self) -> Tuple[float, ...]:
        """Nonzero fraction of each layer's coefficient maps"""
        return tuple(float(np.count_nonzero(z)) / z.size for z in self.coeffs)
