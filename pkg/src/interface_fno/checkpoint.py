"""
Binary model checkpoints (.fnck) with an optional AdamW state block.
"""

from __future__ import annotations

import logging
import math
import struct
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from .constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION, OPTIMIZER_BLOCK_MAGIC
from .errors import CheckpointError, InterfaceFnoError
from .model import FnoConfig, FnoModel, SpectralLayer
from .optim import AdamWState

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# magic, version, c_in, c_out, d_v, k_x, k_y, n_layers, use_norm
_HEADER = struct.Struct("<4sIIIIIIIB")
_STATE_HEADER = struct.Struct("<4sQ")
_F64 = np.dtype("<f8")
_C128 = np.dtype("<c16")


def _parameter_shapes(config: FnoConfig) -> List[Tuple[str, Tuple[int, ...], bool]]:
    d_v = config.d_v
    shapes = [("lift.weight", (d_v, config.c_in), False), ("lift.bias", (d_v,), False)]
    for index in range(config.n_layers):
        prefix = f"layers.{index}"
        shapes.append((f"{prefix}.spectral", (2 * config.k_x, config.k_y, d_v, d_v), True))
        shapes.append((f"{prefix}.weight", (d_v, d_v), False))
        shapes.append((f"{prefix}.bias", (d_v,), False))
        if config.use_norm:
            shapes.append((f"{prefix}.norm_scale", (d_v,), False))
            shapes.append((f"{prefix}.norm_shift", (d_v,), False))
    shapes.append(("proj.weight", (config.c_out, d_v), False))
    shapes.append(("proj.bias", (config.c_out,), False))
    return shapes


def _real_count(shape: Tuple[int, ...], is_complex: bool) -> int:
    return math.prod(shape) * (2 if is_complex else 1)


def encode_checkpoint(model: FnoModel, state: Optional[AdamWState] = None) -> bytes:
    """Serialise a model, and optionally its optimizer state, to .fnck bytes."""
    config = model.config
    chunks = [
        _HEADER.pack(
            CHECKPOINT_MAGIC,
            CHECKPOINT_VERSION,
            config.c_in,
            config.c_out,
            config.d_v,
            config.k_x,
            config.k_y,
            config.n_layers,
            1 if config.use_norm else 0,
        )
    ]
    params = model.named_parameters()
    for name, array in params:
        dtype = _C128 if np.iscomplexobj(array) else _F64
        chunks.append(np.ascontiguousarray(array, dtype=dtype).tobytes())
    if state is not None:
        chunks.append(_STATE_HEADER.pack(OPTIMIZER_BLOCK_MAGIC, state.step))
        for name, _ in params:
            chunks.append(np.ascontiguousarray(state.m[name], dtype=_F64).tobytes())
            chunks.append(np.ascontiguousarray(state.v[name], dtype=_F64).tobytes())
    return b"".join(chunks)


def save_model(model: FnoModel, path: PathLike, state: Optional[AdamWState] = None) -> Path:
    """
    Write a checkpoint.

    Args:
        model: Model to store.
        path: Destination file.
        state: Optional optimizer state appended after the parameters.

    Returns:
        The written path.
    """

    path = Path(path)
    path.write_bytes(encode_checkpoint(model, state))
    logger.info("Saved checkpoint to %s.", path)
    return path


def decode_checkpoint(data: bytes) -> Tuple[FnoModel, Optional[AdamWState]]:
    """
    Parse .fnck bytes.

    Raises:
        CheckpointError: On bad magic or version, an invalid config, a size
            that does not match the config, or non-finite parameters.
    """

    if len(data) < _HEADER.size:
        raise CheckpointError(f"Checkpoint is {len(data)} bytes, shorter than its {_HEADER.size}-byte header.")
    magic, version, c_in, c_out, d_v, k_x, k_y, n_layers, use_norm = _HEADER.unpack_from(data, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"Bad checkpoint magic {magic!r}, expected {CHECKPOINT_MAGIC!r}.")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version}.")
    if use_norm not in (0, 1):
        raise CheckpointError(f"Invalid use_norm flag {use_norm}.")
    try:
        config = FnoConfig(c_in, c_out, d_v, k_x, k_y, n_layers, bool(use_norm))
    except InterfaceFnoError as exc:
        raise CheckpointError(f"Invalid stored config: {exc}") from exc
    # Lower bound on one layer's bytes, checked before any per-layer sizing.
    layer_bytes = 8 * config.d_v * config.d_v + 16 * 2 * config.k_x * config.k_y * config.d_v * config.d_v
    if config.n_layers * layer_bytes > len(data):
        raise CheckpointError(
            f"Checkpoint is {len(data)} bytes, too short for {config.n_layers} layers of "
            f"width {config.d_v} with modes ({config.k_x}, {config.k_y})."
        )

    shapes = _parameter_shapes(config)
    params_end = _HEADER.size + 8 * sum(_real_count(shape, cplx) for _, shape, cplx in shapes)
    state_size = _STATE_HEADER.size + 2 * 8 * sum(_real_count(shape, cplx) for _, shape, cplx in shapes)
    if len(data) not in (params_end, params_end + state_size):
        raise CheckpointError(
            f"Checkpoint is {len(data)} bytes; config implies {params_end} "
            f"(or {params_end + state_size} with optimizer state)."
        )

    offset = _HEADER.size
    arrays = {}
    for name, shape, is_complex in shapes:
        dtype = _C128 if is_complex else _F64
        count = math.prod(shape)
        array = np.frombuffer(data, dtype=dtype, count=count, offset=offset).reshape(shape).copy()
        if not np.all(np.isfinite(array)):
            raise CheckpointError(f"Non-finite values in parameter '{name}'.")
        arrays[name] = array.astype(np.complex128 if is_complex else np.float64)
        offset += count * dtype.itemsize

    state = None
    if len(data) > params_end:
        block_magic, step = _STATE_HEADER.unpack_from(data, offset)
        if block_magic != OPTIMIZER_BLOCK_MAGIC:
            raise CheckpointError(f"Bad optimizer block magic {block_magic!r}.")
        offset += _STATE_HEADER.size
        state = AdamWState(step=int(step))
        for name, shape, is_complex in shapes:
            real_shape = shape[:-1] + (shape[-1] * 2,) if is_complex else shape
            count = math.prod(real_shape)
            for target in (state.m, state.v):
                target[name] = np.frombuffer(data, dtype=_F64, count=count, offset=offset).reshape(real_shape).copy()
                offset += count * 8
            if np.any(state.v[name] < 0) or not np.all(np.isfinite(state.m[name])) or not np.all(np.isfinite(state.v[name])):
                raise CheckpointError(f"Invalid optimizer moments for '{name}'.")

    layers = []
    for index in range(config.n_layers):
        prefix = f"layers.{index}"
        layers.append(
            SpectralLayer(
                arrays[f"{prefix}.spectral"],
                arrays[f"{prefix}.weight"],
                arrays[f"{prefix}.bias"],
                arrays.get(f"{prefix}.norm_scale"),
                arrays.get(f"{prefix}.norm_shift"),
            )
        )
    model = FnoModel(
        config, arrays["lift.weight"], arrays["lift.bias"], layers, arrays["proj.weight"], arrays["proj.bias"]
    )
    return model, state


def load_checkpoint(path: PathLike) -> Tuple[FnoModel, Optional[AdamWState]]:
    """Read a model and, when present, its optimizer state."""
    return decode_checkpoint(Path(path).read_bytes())


def load_model(path: PathLike, expected: Optional[FnoConfig] = None) -> FnoModel:
    """
    Read a model; the stored config always wins over `expected`.
    """

    model, _ = load_checkpoint(path)
    if expected is not None and expected != model.config:
        logger.warning("Checkpoint %s stores %s, ignoring expected %s.", path, model.config, expected)
    return model
