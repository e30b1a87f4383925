import logging
import math

import numpy as np
import numpy.typing as npt
from scipy.special import entr

from glc.core.errors import DataError
from glc.core.logger import event_message
from glc.core.numeric import Matrix, Vector, ensure_finite
from glc.models.models import UNKNOWN, ModelParams, PredictionOutcome
from glc.models.schemas import EvalProtocol
from glc.observability.events import LogEvent
from glc.observability.metrics import get_app_metrics
from glc.services.network import predict_proba
from glc.services.types import EvaluationReport, HScoreResult

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-6


def normalized_entropy_rows(probs: Matrix) -> Vector:
    """-(1 / log C_s)·Σ p log p per row, natural log, 0·log 0 = 0, kept in [0, 1]."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2:
        raise DataError(f"Expected a 2-D probability matrix, got {probs.shape}.")
    if probs.shape[1] < 2:
        raise DataError("Normalized entropy needs at least two classes.")
    ensure_finite(probs, "Probabilities")
    if np.any(probs < 0.0) or not np.allclose(
        probs.sum(axis=1), 1.0, rtol=0.0, atol=ROW_SUM_TOLERANCE
    ):
        raise DataError("Probability rows must be non-negative and sum to 1.")
    entropy = entr(probs).sum(axis=1) / math.log(probs.shape[1])
    return np.clip(entropy, 0.0, 1.0)


def normalized_entropy(prob_row: npt.ArrayLike) -> float:
    return float(normalized_entropy_rows(np.asarray(prob_row, dtype=np.float64)[None, :])[0])


def classify_with_rejection(probs: Matrix, omega: float) -> PredictionOutcome:
    """UNKNOWN when I(x) ≥ ω, otherwise argmax (ties to the smaller class)."""
    probs = np.asarray(probs, dtype=np.float64)
    entropy = normalized_entropy_rows(probs)
    predictions = np.where(entropy >= omega, UNKNOWN, np.argmax(probs, axis=1))
    return PredictionOutcome(
        predictions=predictions.astype(np.int64), entropy=entropy, omega=omega
    )


def harmonic_mean(a: float, b: float) -> float:
    if a + b == 0.0:
        return 0.0
    return 2.0 * a * b / (a + b)


def _check_lengths(outcome: PredictionOutcome, ground_truth: npt.ArrayLike) -> np.ndarray:
    labels = np.asarray(ground_truth, dtype=np.int64)
    if labels.shape != outcome.predictions.shape:
        raise DataError(
            f"{labels.size} labels for {outcome.num_samples} predictions."
        )
    return labels


def h_score(
    outcome: PredictionOutcome,
    ground_truth: npt.ArrayLike,
    known_classes: npt.ArrayLike,
    *,
    class_averaged: bool = False,
) -> HScoreResult:
    """Harmonic mean of known-class accuracy and unknown rejection rate.

    Known accuracy counts exact class matches. With ``class_averaged`` it is the
    mean of per-class accuracies over the known classes present.
    """
    labels = _check_lengths(outcome, ground_truth)
    known_mask = np.isin(labels, np.asarray(known_classes, dtype=np.int64))
    if not known_mask.any() or known_mask.all():
        raise DataError(
            "H-score needs both known and unknown samples; use overall accuracy."
        )
    correct = outcome.predictions == labels
    if class_averaged:
        per_class = [
            float(correct[labels == label].mean()) for label in np.unique(labels[known_mask])
        ]
        acc_known = float(np.mean(per_class))
    else:
        acc_known = float(correct[known_mask].mean())
    acc_unknown = float((outcome.predictions[~known_mask] == UNKNOWN).mean())
    return HScoreResult(
        h=harmonic_mean(acc_known, acc_unknown),
        acc_known=acc_known,
        acc_unknown=acc_unknown,
    )


def overall_accuracy(outcome: PredictionOutcome, ground_truth: npt.ArrayLike) -> float:
    labels = _check_lengths(outcome, ground_truth)
    if labels.size == 0:
        raise DataError("Accuracy is undefined for an empty dataset.")
    return float((outcome.predictions == labels).mean())


def infer_protocol(labels: npt.ArrayLike, num_source_classes: int) -> EvalProtocol:
    has_unknown = bool(np.any(np.asarray(labels) >= num_source_classes))
    return EvalProtocol.H_SCORE if has_unknown else EvalProtocol.ACCURACY


def evaluate(
    probs: Matrix,
    labels: npt.ArrayLike,
    num_source_classes: int,
    omega: float,
    *,
    protocol: EvalProtocol | None = None,
    class_averaged: bool = False,
) -> EvaluationReport:
    """Score predictions under the H-score (OSDA/OPDA) or accuracy (PDA/CLDA) protocol."""
    labels = np.asarray(labels, dtype=np.int64)
    protocol = protocol or infer_protocol(labels, num_source_classes)
    outcome = classify_with_rejection(probs, omega)
    accuracy = overall_accuracy(outcome, labels)
    unknown_rate = float(np.mean(outcome.predictions == UNKNOWN))
    if protocol is EvalProtocol.H_SCORE:
        scores = h_score(
            outcome,
            labels,
            np.arange(num_source_classes),
            class_averaged=class_averaged,
        )
        report = EvaluationReport(
            protocol=protocol,
            omega=omega,
            accuracy=accuracy,
            h_score=scores.h,
            acc_known=scores.acc_known,
            acc_unknown=scores.acc_unknown,
            unknown_rate=unknown_rate,
        )
    else:
        report = EvaluationReport(
            protocol=protocol, omega=omega, accuracy=accuracy, unknown_rate=unknown_rate
        )
    get_app_metrics().record_evaluation(protocol=protocol.value, h_score=report.h_score)
    logger.debug(
        event_message(
            LogEvent.EVALUATION_COMPLETED,
            protocol=protocol.value,
            omega=omega,
            headline=report.headline,
        )
    )
    return report


def evaluate_params(
    params: ModelParams,
    X: Matrix,
    labels: npt.ArrayLike,
    omega: float,
    *,
    protocol: EvalProtocol | None = None,
    class_averaged: bool = False,
) -> EvaluationReport:
    """Evaluate a checkpoint on a labeled set; on the source model this is the source-only row."""
    return evaluate(
        predict_proba(params, X).probs,
        labels,
        params.num_classes,
        omega,
        protocol=protocol,
        class_averaged=class_averaged,
    )
