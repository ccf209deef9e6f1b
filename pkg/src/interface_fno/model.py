"""
Fourier Neural Operator: lifting, truncated spectral layers, projection, and
exact reverse-mode gradients of the relative L2 training loss.

Complex spectral weights are treated as independent real/imaginary pairs; a
gradient stored for a complex tensor holds dL/dRe in its real part and dL/dIm
in its imaginary part.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from .constants import (
    DEFAULT_IN_CHANNELS,
    DEFAULT_LAYERS,
    DEFAULT_MODES,
    DEFAULT_OUT_CHANNELS,
    DEFAULT_WIDTH,
    NORM_EPS,
)
from .errors import ConfigError, DegenerateTargetError, ModeRangeError, ShapeError
from .field_fft import retained_rows
from .fields import FieldBatch
from .parallel import ordered_map

logger = logging.getLogger(__name__)

ArrayOrBatch = Union[np.ndarray, FieldBatch]


@dataclass(frozen=True)
class FnoConfig:
    """
    Architecture hyperparameters.

    Args:
        c_in: Input channels.
        c_out: Output channels.
        d_v: Hidden width.
        k_x: Retained modes along the first spatial axis (each sign).
        k_y: Retained modes along the second spatial axis.
        n_layers: Number of spectral layers.
        use_norm: Per-channel normalization inside non-final layers.
    """

    c_in: int = DEFAULT_IN_CHANNELS
    c_out: int = DEFAULT_OUT_CHANNELS
    d_v: int = DEFAULT_WIDTH
    k_x: int = DEFAULT_MODES[0]
    k_y: int = DEFAULT_MODES[1]
    n_layers: int = DEFAULT_LAYERS
    use_norm: bool = True

    def __post_init__(self) -> None:
        for name in ("c_in", "c_out", "d_v", "k_x", "k_y", "n_layers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}.")

    @property
    def min_grid(self) -> Tuple[int, int]:
        """Smallest (H, W) the spectral layers accept."""
        return (2 * self.k_x, 2 * self.k_y)


@dataclass(eq=False)
class SpectralLayer:
    """
    One Fourier layer.

    Args:
        spectral: Complex kernel R [2*k_x, k_y, d_v(out), d_v(in)] over retained modes.
        weight: Local linear map W [d_v, d_v].
        bias: Bias b [d_v].
        norm_scale: Normalization scale [d_v], None when normalization is off.
        norm_shift: Normalization shift [d_v], None when normalization is off.
    """

    spectral: np.ndarray
    weight: np.ndarray
    bias: np.ndarray
    norm_scale: Optional[np.ndarray] = None
    norm_shift: Optional[np.ndarray] = None

    @property
    def k_x(self) -> int:
        return int(self.spectral.shape[0]) // 2

    @property
    def k_y(self) -> int:
        return int(self.spectral.shape[1])

    @property
    def width(self) -> int:
        return int(self.weight.shape[0])

    def named_parameters(self, prefix: str) -> List[Tuple[str, np.ndarray]]:
        params = [
            (f"{prefix}.spectral", self.spectral),
            (f"{prefix}.weight", self.weight),
            (f"{prefix}.bias", self.bias),
        ]
        if self.norm_scale is not None and self.norm_shift is not None:
            params.append((f"{prefix}.norm_scale", self.norm_scale))
            params.append((f"{prefix}.norm_shift", self.norm_shift))
        return params


@dataclass(eq=False)
class FnoModel:
    """
    Lifting P, spectral layers, projection Q.

    Parameters are numpy arrays updated in place by the optimizer.
    """

    config: FnoConfig
    lift_weight: np.ndarray
    lift_bias: np.ndarray
    layers: List[SpectralLayer]
    proj_weight: np.ndarray
    proj_bias: np.ndarray

    def named_parameters(self) -> List[Tuple[str, np.ndarray]]:
        """Parameters in fixed declaration order (also the checkpoint order)."""
        params = [("lift.weight", self.lift_weight), ("lift.bias", self.lift_bias)]
        for index, layer in enumerate(self.layers):
            params.extend(layer.named_parameters(f"layers.{index}"))
        params.append(("proj.weight", self.proj_weight))
        params.append(("proj.bias", self.proj_bias))
        return params

    def parameters(self) -> Dict[str, np.ndarray]:
        return dict(self.named_parameters())

    def no_decay(self) -> frozenset:
        """Names exempt from weight decay: biases and normalization affines."""
        return frozenset(
            name
            for name, _ in self.named_parameters()
            if name.endswith((".bias", ".norm_scale", ".norm_shift"))
        )

    def copy(self) -> "FnoModel":
        return _rebuild(self, lambda array: array.copy())

    def astype(self, dtype) -> "FnoModel":
        """Copy with real parameters in dtype and spectral kernels in the matching complex type."""
        dtype = np.dtype(dtype)
        complex_dtype = np.result_type(dtype, np.complex64)
        return _rebuild(
            self,
            lambda array: array.astype(complex_dtype if np.iscomplexobj(array) else dtype),
        )


def _rebuild(model: FnoModel, convert) -> FnoModel:
    layers = [
        SpectralLayer(
            convert(layer.spectral),
            convert(layer.weight),
            convert(layer.bias),
            None if layer.norm_scale is None else convert(layer.norm_scale),
            None if layer.norm_shift is None else convert(layer.norm_shift),
        )
        for layer in model.layers
    ]
    return FnoModel(
        model.config,
        convert(model.lift_weight),
        convert(model.lift_bias),
        layers,
        convert(model.proj_weight),
        convert(model.proj_bias),
    )


@dataclass(eq=False)
class GradientStore:
    """Gradients keyed by parameter name, shapes mirroring the model."""

    grads: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, model: FnoModel) -> "GradientStore":
        return cls({name: np.zeros_like(array) for name, array in model.named_parameters()})

    def __getitem__(self, name: str) -> np.ndarray:
        return self.grads[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.grads)

    def items(self):
        return self.grads.items()

    def add_(self, other: "GradientStore") -> "GradientStore":
        for name, grad in other.items():
            self.grads[name] += grad
        return self

    def scale_(self, factor: float) -> "GradientStore":
        for grad in self.grads.values():
            grad *= factor
        return self

    def global_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(np.abs(g) ** 2) for g in self.grads.values())))


def init_model(config: FnoConfig, seed: int = 0) -> FnoModel:
    """
    Initialise parameters deterministically.

    Real weights and biases draw from U(-s, s) with s = sqrt(1/fan_in); the
    real and imaginary parts of each spectral kernel from U(-1/d_v, 1/d_v);
    normalization scale 1 and shift 0.
    """

    rng = np.random.default_rng(seed)
    d_v = config.d_v

    def uniform(shape, fan_in: int) -> np.ndarray:
        bound = np.sqrt(1.0 / fan_in)
        return rng.uniform(-bound, bound, size=shape)

    lift_weight = uniform((d_v, config.c_in), config.c_in)
    lift_bias = uniform((d_v,), config.c_in)
    layers = []
    for _ in range(config.n_layers):
        shape = (2 * config.k_x, config.k_y, d_v, d_v)
        real = rng.uniform(-1.0 / d_v, 1.0 / d_v, size=shape)
        imag = rng.uniform(-1.0 / d_v, 1.0 / d_v, size=shape)
        layers.append(
            SpectralLayer(
                spectral=real + 1j * imag,
                weight=uniform((d_v, d_v), d_v),
                bias=uniform((d_v,), d_v),
                norm_scale=np.ones(d_v) if config.use_norm else None,
                norm_shift=np.zeros(d_v) if config.use_norm else None,
            )
        )
    proj_weight = uniform((config.c_out, d_v), d_v)
    proj_bias = uniform((config.c_out,), d_v)
    return FnoModel(config, lift_weight, lift_bias, layers, proj_weight, proj_bias)


def count_parameters(model: FnoModel) -> int:
    """Number of real scalars, counting each complex entry twice."""
    return int(sum(a.size * (2 if np.iscomplexobj(a) else 1) for _, a in model.named_parameters()))


def _values(batch: ArrayOrBatch) -> np.ndarray:
    values = batch.values if isinstance(batch, FieldBatch) else np.asarray(batch)
    if values.ndim != 4:
        raise ShapeError(f"Expected a 4-D [n, c, H, W] array, got {values.ndim}-D.")
    return values


def _pointwise(weight: np.ndarray, bias: Optional[np.ndarray], v: np.ndarray) -> np.ndarray:
    n, c, height, width = v.shape
    if weight.shape[1] != c:
        raise ShapeError(f"Pointwise map expects {weight.shape[1]} channels, got {c}.")
    out = np.matmul(weight, v.reshape(n, c, height * width)).reshape(n, weight.shape[0], height, width)
    if bias is not None:
        out += bias[:, np.newaxis, np.newaxis]
    return out


def _column_weights(k_y: int) -> np.ndarray:
    # Columns 1..k_y-1 stand for a Hermitian pair in the full spectrum.
    weights = np.full(k_y, 2.0)
    weights[0] = 1.0
    return weights


def _check_modes(layer: SpectralLayer, height: int, width: int) -> None:
    if height < 2 * layer.k_x or width < 2 * layer.k_y:
        raise ModeRangeError(
            f"Grid {height}x{width} is too small for modes ({layer.k_x}, {layer.k_y}); "
            f"need at least {2 * layer.k_x}x{2 * layer.k_y}."
        )


def _spectral_forward(layer: SpectralLayer, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n, channels, height, width = v.shape
    _check_modes(layer, height, width)
    if layer.spectral.shape[3] != channels:
        raise ShapeError(f"Spectral kernel expects {layer.spectral.shape[3]} channels, got {channels}.")
    rows = retained_rows(height, layer.k_x)
    v_hat = np.fft.rfft2(v, axes=(-2, -1))
    # [n, i, modes_x, modes_y] -> [modes_x, modes_y, n, i] for batched per-mode matmul.
    modes = v_hat[:, :, rows, : layer.k_y].transpose(2, 3, 0, 1)
    mixed = np.matmul(modes, layer.spectral.transpose(0, 1, 3, 2))
    out_hat = np.zeros((n, layer.spectral.shape[2], height, width // 2 + 1), dtype=v_hat.dtype)
    out_hat[:, :, rows, : layer.k_y] = mixed.transpose(2, 3, 0, 1)
    return np.fft.irfft2(out_hat, s=(height, width), axes=(-2, -1)), modes


def _spectral_backward(
    layer: SpectralLayer, modes: np.ndarray, grad_out: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    n, channels, height, width = grad_out.shape
    rows = retained_rows(height, layer.k_x)
    col_weights = _column_weights(layer.k_y)
    # Adjoint of irfft2: w * rfft2(g) / (H*W), restricted to retained modes.
    grad_hat = np.fft.rfft2(grad_out, axes=(-2, -1))[:, :, rows, : layer.k_y] * (
        col_weights / (height * width)
    )
    grad_mixed = grad_hat.transpose(2, 3, 0, 1)
    grad_spectral = np.matmul(grad_mixed.transpose(0, 1, 3, 2), np.conj(modes))
    grad_modes = np.matmul(grad_mixed, np.conj(layer.spectral))
    # Adjoint of rfft2: H*W * irfft2(G / w) with G zero outside retained modes.
    full = np.zeros((n, grad_modes.shape[3], height, width // 2 + 1), dtype=np.complex128)
    full[:, :, rows, : layer.k_y] = grad_modes.transpose(2, 3, 0, 1) / col_weights
    grad_v = (height * width) * np.fft.irfft2(full, s=(height, width), axes=(-2, -1))
    return grad_spectral, grad_v


@dataclass
class _LayerCache:
    v: np.ndarray
    modes: np.ndarray
    z: Optional[np.ndarray] = None
    y_hat: Optional[np.ndarray] = None
    centered: Optional[np.ndarray] = None
    std: Optional[np.ndarray] = None


def _layer_forward(layer: SpectralLayer, v: np.ndarray, final: bool) -> Tuple[np.ndarray, _LayerCache]:
    spectral_out, modes = _spectral_forward(layer, v)
    y = _pointwise(layer.weight, layer.bias, v) + spectral_out
    cache = _LayerCache(v=v, modes=modes)
    if final:
        return y, cache
    z = y
    if layer.norm_scale is not None:
        centered = y - y.mean(axis=(2, 3), keepdims=True)
        std = np.sqrt(np.mean(centered**2, axis=(2, 3), keepdims=True))
        y_hat = centered / (std + NORM_EPS)
        z = layer.norm_scale[:, np.newaxis, np.newaxis] * y_hat + layer.norm_shift[:, np.newaxis, np.newaxis]
        cache.y_hat, cache.centered, cache.std = y_hat, centered, std
    cache.z = z
    return np.maximum(z, 0.0), cache


def _layer_backward(
    layer: SpectralLayer, cache: _LayerCache, grad_out: np.ndarray, final: bool, prefix: str
) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    grads: Dict[str, np.ndarray] = {}
    grad_y = grad_out
    if not final:
        grad_z = grad_out * (cache.z > 0.0)
        if layer.norm_scale is not None:
            grads[f"{prefix}.norm_scale"] = np.sum(grad_z * cache.y_hat, axis=(0, 2, 3))
            grads[f"{prefix}.norm_shift"] = np.sum(grad_z, axis=(0, 2, 3))
            g = grad_z * layer.norm_scale[:, np.newaxis, np.newaxis]
            count = g.shape[2] * g.shape[3]
            denom = cache.std + NORM_EPS
            safe_std = np.where(cache.std > 0.0, cache.std, 1.0)
            projection = np.sum(g * cache.centered, axis=(2, 3), keepdims=True)
            grad_y = (g - g.mean(axis=(2, 3), keepdims=True)) / denom - cache.centered * projection / (
                denom**2 * count * safe_std
            )
        else:
            grad_y = grad_z
    elif layer.norm_scale is not None:
        grads[f"{prefix}.norm_scale"] = np.zeros_like(layer.norm_scale)
        grads[f"{prefix}.norm_shift"] = np.zeros_like(layer.norm_shift)

    n, channels, height, width = grad_y.shape
    flat_grad = grad_y.reshape(n, channels, height * width)
    flat_v = cache.v.reshape(n, cache.v.shape[1], height * width)
    grads[f"{prefix}.bias"] = grad_y.sum(axis=(0, 2, 3))
    grads[f"{prefix}.weight"] = np.matmul(flat_grad, flat_v.transpose(0, 2, 1)).sum(axis=0)
    grad_spectral, grad_v = _spectral_backward(layer, cache.modes, grad_y)
    grads[f"{prefix}.spectral"] = grad_spectral
    grad_v = grad_v + np.matmul(layer.weight.T, flat_grad).reshape(cache.v.shape)
    return grad_v, grads


def _forward_with_cache(model: FnoModel, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, List[_LayerCache]]:
    if x.shape[1] != model.config.c_in:
        raise ShapeError(f"Model expects {model.config.c_in} input channels, got {x.shape[1]}.")
    v = _pointwise(model.lift_weight, model.lift_bias, x)
    caches = []
    last = len(model.layers) - 1
    for index, layer in enumerate(model.layers):
        v, cache = _layer_forward(layer, v, final=index == last)
        caches.append(cache)
    return _pointwise(model.proj_weight, model.proj_bias, v), v, caches


def forward_array(model: FnoModel, x: np.ndarray) -> np.ndarray:
    """forward on a raw [n, c_in, H, W] array; runs in the model's precision."""
    dtype = model.lift_weight.dtype
    return _forward_with_cache(model, np.asarray(x, dtype=dtype))[0]


def lift(model: FnoModel, batch: FieldBatch) -> FieldBatch:
    """Pointwise lifting v0 = P·a + p."""
    return FieldBatch(batch.grid, _pointwise(model.lift_weight, model.lift_bias, _values(batch)))


def spectral_conv(layer: SpectralLayer, v: FieldBatch) -> FieldBatch:
    """
    Global convolution via retained Fourier modes.

    Raises:
        ModeRangeError: When the grid is smaller than 2*k_x by 2*k_y.
    """

    return FieldBatch(v.grid, _spectral_forward(layer, _values(v))[0])


def layer_forward(layer: SpectralLayer, v: FieldBatch, final: bool = False) -> FieldBatch:
    """
    y = W·v + K(v) + b, then (non-final layers) normalization and ReLU.
    """

    return FieldBatch(v.grid, _layer_forward(layer, _values(v), final)[0])


def forward(model: FnoModel, batch: FieldBatch) -> FieldBatch:
    """Lift, apply every layer, project. Resolution independent for H ≥ 2k_x, W ≥ 2k_y."""
    return FieldBatch(batch.grid, forward_array(model, _values(batch)))


def _sample_loss_and_grad(model: FnoModel, x: np.ndarray, target: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    pred, v_last, caches = _forward_with_cache(model, x)
    target_norm = float(np.sum(target**2))
    if target_norm == 0.0:
        raise DegenerateTargetError("Target field has zero norm; relative loss is undefined.")
    diff = pred - target
    loss = float(np.sum(diff**2)) / target_norm
    grad_pred = 2.0 * diff / target_norm

    grads: Dict[str, np.ndarray] = {}
    n, c_out, height, width = grad_pred.shape
    flat_grad = grad_pred.reshape(n, c_out, height * width)
    grads["proj.weight"] = np.matmul(flat_grad, v_last.reshape(n, v_last.shape[1], -1).transpose(0, 2, 1)).sum(axis=0)
    grads["proj.bias"] = grad_pred.sum(axis=(0, 2, 3))
    grad_v = np.matmul(model.proj_weight.T, flat_grad).reshape(v_last.shape)

    last = len(model.layers) - 1
    for index in range(last, -1, -1):
        grad_v, layer_grads = _layer_backward(
            model.layers[index], caches[index], grad_v, index == last, f"layers.{index}"
        )
        grads.update(layer_grads)

    flat_grad = grad_v.reshape(n, grad_v.shape[1], height * width)
    grads["lift.weight"] = np.matmul(flat_grad, x.reshape(n, x.shape[1], -1).transpose(0, 2, 1)).sum(axis=0)
    grads["lift.bias"] = grad_v.sum(axis=(0, 2, 3))
    return loss, grads


def loss_and_grad(
    model: FnoModel,
    batch: ArrayOrBatch,
    targets: ArrayOrBatch,
    workers: Optional[int] = None,
) -> Tuple[float, GradientStore]:
    """
    Mean relative squared L2 loss over the batch and its exact gradient.

    Per-sample passes may run concurrently; gradients are reduced in sample
    order so the result does not depend on the thread count.

    Args:
        model: Model to differentiate.
        batch: Inputs [n, c_in, H, W].
        targets: Targets [n, c_out, H, W].
        workers: Thread count; defaults to FNO_THREADS or CPU count.

    Returns:
        Tuple (loss, gradients).

    Raises:
        ShapeError: When inputs and targets disagree.
        DegenerateTargetError: When a target has zero norm.
    """

    x = np.asarray(_values(batch), dtype=np.float64)
    y = np.asarray(_values(targets), dtype=np.float64)
    if y.shape != (x.shape[0], model.config.c_out) + x.shape[2:]:
        raise ShapeError(f"Targets {y.shape} do not match inputs {x.shape} for c_out={model.config.c_out}.")
    results = ordered_map(
        lambda i: _sample_loss_and_grad(model, x[i : i + 1], y[i : i + 1]), range(x.shape[0]), workers
    )
    store = GradientStore.zeros_like(model)
    total = 0.0
    for loss, grads in results:
        total += loss
        store.add_(GradientStore(grads))
    n = x.shape[0]
    return total / n, store.scale_(1.0 / n)


def relative_loss(model: FnoModel, batch: ArrayOrBatch, targets: ArrayOrBatch) -> float:
    """Mean relative squared L2 loss without gradients."""
    pred = forward_array(model, _values(batch)).astype(np.float64)
    y = np.asarray(_values(targets), dtype=np.float64)
    axes = tuple(range(1, y.ndim))
    norms = np.sum(y**2, axis=axes)
    if np.any(norms == 0.0):
        raise DegenerateTargetError("Target field has zero norm; relative loss is undefined.")
    return float(np.mean(np.sum((pred - y) ** 2, axis=axes) / norms))
