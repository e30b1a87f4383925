"""Source training and the source-free adaptation loop.

Adaptation minimizes η·L_glb + L_loc over the feature module only. The
classifier of the source model is frozen and must come back bit-identical.
"""

import logging
import math

import numpy as np
import numpy.typing as npt

from glc.core.config import settings
from glc.core.errors import DataError, NumericError, UsageError
from glc.core.logger import event_message
from glc.core.numeric import Matrix, make_rng
from glc.infrastructure.reports import write_pseudo_label_dump
from glc.models.models import LabeledDataset, ModelParams
from glc.models.schemas import AdaptConfig, EvalProtocol, SourceConfig, Variant
from glc.observability.events import LogEvent
from glc.observability.metrics import get_app_metrics
from glc.observability.telemetry import (
    add_current_span_event,
    set_current_span_attributes,
    start_span,
)
from glc.services.clustering import estimate_class_count
from glc.services.consensus import MemoryBank, bank_init, bank_update, knn_neighbor_targets
from glc.services.evaluation import evaluate_params
from glc.services.network import (
    CLASSIFIER_FROZEN,
    AdaptationLoss,
    SmoothedLabelLoss,
    classifier_checksum,
    init_optimizer,
    init_params,
    loss_value,
    predict_proba,
    sgd_step,
    soft_ce_loss,
    value_and_grad,
)
from glc.services.pseudo_labels import assign_pseudo_labels
from glc.services.types import AdaptHistory, AdaptResult, EpochRecord, PseudoLabelResult

logger = logging.getLogger(__name__)


def _batches(order: npt.NDArray[np.int64], batch_size: int) -> list[npt.NDArray[np.int64]]:
    # The last partial batch is kept.
    return [order[start : start + batch_size] for start in range(0, order.size, batch_size)]


def train_source(
    data: LabeledDataset,
    config: SourceConfig,
    num_classes: int | None = None,
) -> ModelParams:
    """Mini-batch SGD with momentum on the label-smoothed cross-entropy."""
    if data.num_samples == 0:
        raise DataError("Cannot train a source model on an empty dataset.")
    labels = np.asarray(data.y, dtype=np.int64)
    num_classes = num_classes if num_classes is not None else int(labels.max()) + 1
    if labels.min() < 0 or labels.max() >= num_classes:
        raise DataError(f"Source labels must lie in [0, {num_classes}).")
    missing = sorted(set(range(num_classes)) - {int(label) for label in np.unique(labels)})
    if missing:
        raise DataError(f"Source labels do not cover classes {missing}.")

    params = init_params(
        data.input_dim,
        config.hidden_dim,
        config.feature_dim,
        num_classes,
        make_rng(config.seed, "init"),
    )
    state = init_optimizer(params, config.lr, config.momentum)
    shuffle_rng = make_rng(config.seed, "source-shuffle")
    metrics = get_app_metrics()

    with start_span(
        "glc.train_source",
        {"classes": num_classes, "samples": data.num_samples, "epochs": config.epochs},
    ):
        for epoch in range(1, config.epochs + 1):
            losses: list[float] = []
            for rows in _batches(shuffle_rng.permutation(data.num_samples), config.batch_size):
                spec = SmoothedLabelLoss(labels=labels[rows], alpha=config.alpha)
                passed, grads = value_and_grad(params, data.X[rows], spec)
                loss = loss_value(passed.probs, spec)
                if not math.isfinite(loss):
                    raise NumericError(f"Non-finite source loss at epoch {epoch}.")
                losses.append(loss)
                params, state = sgd_step(params, state, grads)
            mean_loss = float(np.mean(losses))
            metrics.record_source_epoch(loss=mean_loss)
            logger.debug(
                event_message(LogEvent.SOURCE_EPOCH_COMPLETED, epoch=epoch, loss=mean_loss)
            )

    train_accuracy = float(
        np.mean(np.argmax(predict_proba(params, data.X).probs, axis=1) == labels)
    )
    logger.info(
        event_message(
            LogEvent.SOURCE_TRAINING_COMPLETED,
            epochs=config.epochs,
            classes=num_classes,
            train_accuracy=train_accuracy,
        )
    )
    return params


def ablation_variant(config: AdaptConfig, variant: Variant | str) -> AdaptConfig:
    """Switch loss terms for an ablation arm; ``full`` hands the config back as is."""
    try:
        resolved = Variant(variant)
    except ValueError as exc:
        choices = ", ".join(item.value for item in Variant)
        raise UsageError(f"Unknown variant {variant!r}; expected one of {choices}.") from exc
    if resolved is Variant.FULL:
        return config
    return config.model_copy(
        update={
            "variant": resolved,
            "use_global": resolved is not Variant.NO_GLOBAL,
            "use_local": resolved is not Variant.NO_LOCAL,
        }
    )


def _epoch_scores(
    params: ModelParams,
    X: Matrix,
    labels: npt.NDArray[np.int64] | None,
    config: AdaptConfig,
) -> dict[str, float | None]:
    if labels is None:
        return {}
    report = evaluate_params(params, X, labels, config.omega)
    if report.protocol is EvalProtocol.H_SCORE:
        return {
            "h_score": report.h_score,
            "acc_known": report.acc_known,
            "acc_unknown": report.acc_unknown,
        }
    return {"acc_known": report.accuracy}


def _check_target(
    source: ModelParams, target_X: Matrix, labels: npt.ArrayLike | None
) -> tuple[Matrix, npt.NDArray[np.int64] | None]:
    X = np.asarray(target_X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("Target data must be a non-empty 2-D matrix.")
    if X.shape[1] != source.input_dim:
        raise DataError(
            f"Target has {X.shape[1]} features, the checkpoint expects {source.input_dim}."
        )
    if labels is None:
        return X, None
    label_array = np.asarray(labels, dtype=np.int64)
    if label_array.shape != (X.shape[0],):
        raise DataError(f"{label_array.size} labels for {X.shape[0]} target samples.")
    return X, label_array


def adapt(
    source: ModelParams,
    target_X: Matrix,
    config: AdaptConfig,
    *,
    labels: npt.ArrayLike | None = None,
) -> AdaptResult:
    """Adapt the feature module to unlabeled target data.

    ``labels`` only fill the evaluation columns of the history; pseudo labels and
    losses never see them.
    """
    config = ablation_variant(config, config.variant)
    if not (config.use_global or config.use_local):
        raise UsageError("At least one of the global and local losses must be enabled.")
    X, eval_labels = _check_target(source, target_X, labels)
    num_samples = X.shape[0]
    checksum_before = classifier_checksum(source)
    logger.info(
        event_message(LogEvent.CLASSIFIER_CHECKSUM, stage="before", sha256=checksum_before)
    )
    if config.epochs == 0:
        return AdaptResult(
            params=source,
            history=AdaptHistory(),
            estimate=None,
            c_t_hat=0,
            checksum_before=checksum_before,
            checksum_after=checksum_before,
            variant=config.variant,
        )
    if config.use_local and not 1 <= config.knn_k < num_samples:
        raise DataError(f"knn_k={config.knn_k} needs more than {config.knn_k} target samples.")

    metrics = get_app_metrics()
    passed = predict_proba(source, X, config.batch_size)

    estimate = None
    c_t_hat = 0
    if config.use_global:
        if config.class_count is not None:
            c_t_hat = min(config.class_count, num_samples)
        else:
            estimate = estimate_class_count(
                passed.features,
                source.num_classes,
                make_rng(config.seed, "estimate"),
                metric=config.silhouette_metric,
                normalize=config.normalize_for_clustering,
                n_init=config.kmeans_restarts,
                max_iters=config.kmeans_max_iters,
                tol=config.kmeans_tol,
                workers=settings.estimate_workers,
            )
            c_t_hat = estimate.chosen

    params = source
    state = init_optimizer(source, config.lr, config.momentum)
    shuffle_rng = make_rng(config.seed, "adapt-shuffle")
    history = AdaptHistory()
    pseudo: PseudoLabelResult | None = None
    bank: MemoryBank | None = None

    for epoch in range(1, config.epochs + 1):
        with start_span("glc.adapt.epoch", {"epoch": epoch, "variant": config.variant.value}):
            if (epoch - 1) % config.pseudo_refresh == 0:
                if epoch > 1:
                    passed = predict_proba(params, X, config.batch_size)
                if config.use_global:
                    pseudo = assign_pseudo_labels(
                        passed.features,
                        passed.probs,
                        c_t_hat,
                        config.rho,
                        make_rng(config.seed, "pseudo", epoch),
                    )
                    metrics.record_pseudo_labels(unknown_fraction=pseudo.unknown_fraction)
                    add_current_span_event(
                        "pseudo_labels", {"unknown_fraction": pseudo.unknown_fraction}
                    )
                    if config.pseudo_dump_dir is not None:
                        write_pseudo_label_dump(
                            pseudo, config.pseudo_dump_dir / f"pseudo_epoch_{epoch:03d}.csv"
                        )
                if config.use_local:
                    bank = bank_init(passed.features, passed.probs)

            glb_losses: list[float] = []
            loc_losses: list[float] = []
            batches = _batches(shuffle_rng.permutation(num_samples), config.batch_size)
            for batch_number, rows in enumerate(batches, start=1):
                global_targets = pseudo.targets[rows] if pseudo is not None else None
                local_targets = (
                    knn_neighbor_targets(bank, rows, config.knn_k) if bank is not None else None
                )
                spec = AdaptationLoss(
                    global_targets=global_targets,
                    local_targets=local_targets,
                    eta=config.eta,
                )
                step, grads = value_and_grad(params, X[rows], spec, CLASSIFIER_FROZEN)
                loss_glb = (
                    soft_ce_loss(step.probs, global_targets) if global_targets is not None else 0.0
                )
                loss_loc = (
                    soft_ce_loss(step.probs, local_targets) if local_targets is not None else 0.0
                )
                if not (math.isfinite(loss_glb) and math.isfinite(loss_loc)):
                    raise NumericError(
                        f"Non-finite adaptation loss at epoch {epoch}, batch {batch_number}: "
                        f"glb={loss_glb}, loc={loss_loc}."
                    )
                glb_losses.append(loss_glb)
                loc_losses.append(loss_loc)
                params, state = sgd_step(params, state, grads, CLASSIFIER_FROZEN)
                if bank is not None:
                    bank = bank_update(bank, rows, step.features, step.probs)

            loss_glb = float(np.mean(glb_losses))
            loss_loc = float(np.mean(loc_losses))
            loss_tar = config.global_weight * loss_glb + loss_loc
            record = EpochRecord(
                epoch=epoch,
                loss_glb=loss_glb,
                loss_loc=loss_loc,
                loss_tar=loss_tar,
                c_t_hat=c_t_hat,
                unknown_fraction=pseudo.unknown_fraction if pseudo is not None else None,
                **_epoch_scores(params, X, eval_labels, config),
            )
            set_current_span_attributes({"c_t_hat": c_t_hat, "loss_tar": loss_tar})
            history = history.appended(record)
            metrics.record_adapt_epoch(
                variant=config.variant.value,
                loss_glb=loss_glb,
                loss_loc=loss_loc,
                loss_tar=loss_tar,
            )
            logger.info(
                event_message(
                    LogEvent.ADAPT_EPOCH_COMPLETED,
                    epoch=epoch,
                    loss_glb=loss_glb,
                    loss_loc=loss_loc,
                    loss_tar=loss_tar,
                    h_score=record.h_score if record.h_score is not None else "-",
                    unknown_fraction=(
                        record.unknown_fraction if record.unknown_fraction is not None else "-"
                    ),
                )
            )

    checksum_after = classifier_checksum(params)
    logger.info(
        event_message(LogEvent.CLASSIFIER_CHECKSUM, stage="after", sha256=checksum_after)
    )
    logger.info(
        event_message(
            LogEvent.ADAPT_COMPLETED,
            epochs=len(history),
            variant=config.variant.value,
            c_t_hat=c_t_hat,
            classifier_unchanged=checksum_before == checksum_after,
        )
    )
    return AdaptResult(
        params=params,
        history=history,
        estimate=estimate,
        c_t_hat=c_t_hat,
        checksum_before=checksum_before,
        checksum_after=checksum_after,
        variant=config.variant,
    )
