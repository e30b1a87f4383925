"""Desk-scale MLP f = h ∘ g with hand-written backpropagation.

Layout: input → hidden (ReLU) → feature (linear) → classifier (linear) → softmax.
Weights are stored fan_in × fan_out so a batch propagates as ``X @ W + b``.
"""

from collections.abc import Collection
from dataclasses import dataclass
import hashlib
import math

import numpy as np
import numpy.typing as npt

from glc.core.errors import ModelError, NumericError
from glc.core.numeric import Matrix, RngState, ensure_finite, softmax
from glc.models.models import LAYER_NAMES, Layer, ModelParams, OptimizerState
from glc.services.types import ForwardPass

LOG_EPSILON = 1e-12
CLASSIFIER_FROZEN: frozenset[str] = frozenset({"classifier"})


def init_params(
    input_dim: int,
    hidden_dim: int,
    feature_dim: int,
    num_classes: int,
    rng: RngState,
) -> ModelParams:
    """Uniform ±1/sqrt(fan_in) initialisation for weights and biases."""
    if min(input_dim, hidden_dim, feature_dim, num_classes) < 1:
        raise ModelError("All layer widths must be positive.")

    def _layer(fan_in: int, fan_out: int) -> Layer:
        bound = 1.0 / math.sqrt(fan_in)
        weight = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        bias = rng.uniform(-bound, bound, size=fan_out)
        return Layer(weight=weight, bias=bias)

    return ModelParams(
        hidden=_layer(input_dim, hidden_dim),
        feature=_layer(hidden_dim, feature_dim),
        classifier=_layer(feature_dim, num_classes),
    )


def zeros_like(params: ModelParams) -> ModelParams:
    return ModelParams(
        **{
            name: Layer(np.zeros_like(layer.weight), np.zeros_like(layer.bias))
            for name, layer in params.layers()
        }
    )


def forward(params: ModelParams, batch: Matrix) -> ForwardPass:
    data = np.asarray(batch, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != params.input_dim:
        raise ModelError(
            f"Batch shape {data.shape} does not match input dim {params.input_dim}."
        )
    hidden_pre = data @ params.hidden.weight + params.hidden.bias
    hidden = np.maximum(hidden_pre, 0.0)
    features = hidden @ params.feature.weight + params.feature.bias
    logits = features @ params.classifier.weight + params.classifier.bias
    return ForwardPass(
        features=features,
        logits=logits,
        probs=softmax(logits),
        hidden_pre=hidden_pre,
    )


def predict_proba(params: ModelParams, X: Matrix, batch_size: int = 256) -> ForwardPass:
    """Forward the whole matrix in fixed-size chunks and stack the pieces."""
    data = np.asarray(X, dtype=np.float64)
    if batch_size < 1:
        raise ModelError(f"batch_size must be positive, got {batch_size}.")
    if data.ndim != 2 or data.shape[1] != params.input_dim:
        raise ModelError(
            f"Batch shape {data.shape} does not match input dim {params.input_dim}."
        )
    if data.shape[0] == 0:
        return forward(params, data)
    parts = [
        forward(params, data[start : start + batch_size])
        for start in range(0, data.shape[0], batch_size)
    ]
    return ForwardPass(
        features=np.concatenate([part.features for part in parts]),
        logits=np.concatenate([part.logits for part in parts]),
        probs=np.concatenate([part.probs for part in parts]),
        hidden_pre=np.concatenate([part.hidden_pre for part in parts]),
    )


def smoothed_targets(
    labels: npt.ArrayLike, num_classes: int, alpha: float
) -> Matrix:
    """q_k = (1 - α)·1[k = y] + α / C_s for each row."""
    label_array = np.asarray(labels, dtype=np.int64)
    if label_array.ndim != 1:
        raise ModelError("Labels must be a 1-D vector.")
    if label_array.size and (
        label_array.min() < 0 or label_array.max() >= num_classes
    ):
        raise ModelError(f"Labels must lie in [0, {num_classes}).")
    if not 0.0 <= alpha <= 1.0:
        raise ModelError(f"Smoothing alpha must lie in [0, 1], got {alpha}.")
    one_hot = np.zeros((label_array.size, num_classes), dtype=np.float64)
    one_hot[np.arange(label_array.size), label_array] = 1.0
    return (1.0 - alpha) * one_hot + alpha / num_classes


def _check_pair(probs: Matrix, targets: Matrix) -> tuple[Matrix, Matrix]:
    probs = np.asarray(probs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if probs.shape != targets.shape or probs.ndim != 2:
        raise ModelError(
            f"Prediction shape {probs.shape} does not match target shape "
            f"{targets.shape}."
        )
    if probs.shape[0] == 0:
        raise ModelError("Cannot compute a loss over an empty batch.")
    ensure_finite(targets, "Targets")
    if np.any(targets < 0.0) or not np.allclose(targets.sum(axis=1), 1.0, atol=1e-6):
        raise ModelError("Target rows must be probability vectors.")
    return probs, targets


def soft_ce_loss(probs: Matrix, targets: Matrix) -> float:
    """Mean over rows of -Σ_c target_c · log(max(prob_c, 1e-12))."""
    probs, targets = _check_pair(probs, targets)
    log_probs = np.log(np.maximum(probs, LOG_EPSILON))
    return float(-(targets * log_probs).sum(axis=1).mean()) + 0.0


def smoothed_ce_loss(probs: Matrix, labels: npt.ArrayLike, alpha: float) -> float:
    probs = np.asarray(probs, dtype=np.float64)
    return soft_ce_loss(probs, smoothed_targets(labels, probs.shape[1], alpha))


@dataclass(frozen=True)
class SoftTargetLoss:
    targets: Matrix
    weight: float = 1.0


@dataclass(frozen=True)
class SmoothedLabelLoss:
    labels: npt.NDArray[np.int64]
    alpha: float = 0.1


@dataclass(frozen=True)
class AdaptationLoss:
    """η·soft_ce(p, q̂) + soft_ce(p, l); a missing term contributes nothing."""

    global_targets: Matrix | None
    local_targets: Matrix | None
    eta: float


LossSpec = SoftTargetLoss | SmoothedLabelLoss | AdaptationLoss


def loss_terms(spec: LossSpec, num_classes: int) -> list[tuple[float, Matrix]]:
    """Resolve a loss spec into weighted soft-target cross-entropy terms."""
    match spec:
        case SoftTargetLoss(targets=targets, weight=weight):
            return [(weight, targets)]
        case SmoothedLabelLoss(labels=labels, alpha=alpha):
            return [(1.0, smoothed_targets(labels, num_classes, alpha))]
        case AdaptationLoss(global_targets=glb, local_targets=loc, eta=eta):
            terms: list[tuple[float, Matrix]] = []
            if glb is not None:
                terms.append((eta, glb))
            if loc is not None:
                terms.append((1.0, loc))
            return terms
        case _:
            raise ModelError(f"Unsupported loss spec: {type(spec).__name__}")


def loss_value(probs: Matrix, spec: LossSpec) -> float:
    probs = np.asarray(probs, dtype=np.float64)
    return float(
        sum(
            weight * soft_ce_loss(probs, targets)
            for weight, targets in loss_terms(spec, probs.shape[1])
        )
    )


def _soft_ce_logit_grad(probs: Matrix, targets: Matrix) -> Matrix:
    # d/dz of -mean Σ t·log(max(p, eps)); clamped entries pass no gradient.
    probs, targets = _check_pair(probs, targets)
    active = targets * (probs > LOG_EPSILON)
    mass = active.sum(axis=1, keepdims=True)
    return (probs * mass - active) / probs.shape[0]


def value_and_grad(
    params: ModelParams,
    batch: Matrix,
    loss_spec: LossSpec,
    frozen: Collection[str] = (),
) -> tuple[ForwardPass, ModelParams]:
    """Forward pass plus analytic gradients; frozen layers get exact zeros."""
    unknown = set(frozen) - set(LAYER_NAMES)
    if unknown:
        raise ModelError(f"Unknown layer(s) to freeze: {sorted(unknown)}")
    passed = forward(params, batch)
    terms = loss_terms(loss_spec, params.num_classes)
    grad_logits = np.zeros_like(passed.logits)
    for weight, targets in terms:
        grad_logits += weight * _soft_ce_logit_grad(passed.probs, targets)

    data = np.asarray(batch, dtype=np.float64)
    hidden = np.maximum(passed.hidden_pre, 0.0)

    grad_features = grad_logits @ params.classifier.weight.T
    grad_hidden = (grad_features @ params.feature.weight.T) * (passed.hidden_pre > 0.0)

    grads = {
        "classifier": Layer(passed.features.T @ grad_logits, grad_logits.sum(axis=0)),
        "feature": Layer(hidden.T @ grad_features, grad_features.sum(axis=0)),
        "hidden": Layer(data.T @ grad_hidden, grad_hidden.sum(axis=0)),
    }
    for name in frozen:
        layer = params.layer(name)
        grads[name] = Layer(np.zeros_like(layer.weight), np.zeros_like(layer.bias))
    return passed, ModelParams(**grads)


def backward(
    params: ModelParams,
    batch: Matrix,
    loss_spec: LossSpec,
    frozen: Collection[str] = (),
) -> ModelParams:
    return value_and_grad(params, batch, loss_spec, frozen)[1]


def init_optimizer(
    params: ModelParams, lr: float, momentum: float = 0.9
) -> OptimizerState:
    if not 0.0 <= momentum < 1.0:
        raise ModelError(f"Momentum must lie in [0, 1), got {momentum}.")
    return OptimizerState(velocity=zeros_like(params), lr=lr, momentum=momentum)


def sgd_step(
    params: ModelParams,
    state: OptimizerState,
    grads: ModelParams,
    frozen: Collection[str] = (),
) -> tuple[ModelParams, OptimizerState]:
    """v ← m·v + g; p ← p − lr·v. Frozen layers are returned untouched."""
    for name, tensor in grads.tensors():
        if not np.all(np.isfinite(tensor)):
            raise NumericError(f"Gradient {name} contains non-finite values.")

    new_layers: dict[str, Layer] = {}
    new_velocity: dict[str, Layer] = {}
    for name, layer in params.layers():
        velocity = state.velocity.layer(name)
        if name in frozen:
            new_layers[name] = layer
            new_velocity[name] = velocity
            continue
        grad = grads.layer(name)
        if grad.weight.shape != layer.weight.shape or grad.bias.shape != layer.bias.shape:
            raise ModelError(f"Gradient shape mismatch for layer {name}.")
        weight_velocity = state.momentum * velocity.weight + grad.weight
        bias_velocity = state.momentum * velocity.bias + grad.bias
        new_velocity[name] = Layer(weight_velocity, bias_velocity)
        new_layers[name] = Layer(
            layer.weight - state.lr * weight_velocity,
            layer.bias - state.lr * bias_velocity,
        )
    return (
        ModelParams(**new_layers),
        OptimizerState(
            velocity=ModelParams(**new_velocity),
            lr=state.lr,
            momentum=state.momentum,
        ),
    )


def classifier_checksum(params: ModelParams) -> str:
    digest = hashlib.sha256()
    for tensor in (params.classifier.weight, params.classifier.bias):
        digest.update(np.ascontiguousarray(tensor, dtype="<f8").tobytes())
    return digest.hexdigest()

