from functools import lru_cache

from opentelemetry import metrics


class AppMetrics:
    def __init__(self) -> None:
        meter = metrics.get_meter(__name__)
        self._train_epochs_total = meter.create_counter(
            name="glc.train.epochs_total",
            description="Completed source-training epochs.",
            unit="1",
        )
        self._train_loss = meter.create_histogram(
            name="glc.train.loss",
            description="Mean smoothed cross-entropy per source epoch.",
            unit="1",
        )
        self._adapt_epochs_total = meter.create_counter(
            name="glc.adapt.epochs_total",
            description="Completed adaptation epochs.",
            unit="1",
        )
        self._adapt_loss = meter.create_histogram(
            name="glc.adapt.loss",
            description="Mean adaptation loss per epoch by term.",
            unit="1",
        )
        self._unknown_fraction = meter.create_histogram(
            name="glc.pseudo.unknown_fraction",
            description="Share of target samples given the uniform pseudo label.",
            unit="1",
        )
        self._h_score = meter.create_histogram(
            name="glc.eval.h_score",
            description="H-score of evaluated checkpoints.",
            unit="1",
        )
        self._sweep_cells_total = meter.create_counter(
            name="glc.sweep.cells_total",
            description="Sweep cells by outcome.",
            unit="1",
        )

    def record_source_epoch(self, *, loss: float) -> None:
        self._train_epochs_total.add(1)
        self._train_loss.record(loss)

    def record_adapt_epoch(
        self, *, variant: str, loss_glb: float, loss_loc: float, loss_tar: float
    ) -> None:
        self._adapt_epochs_total.add(1, attributes={"variant": variant})
        for term, value in (("glb", loss_glb), ("loc", loss_loc), ("tar", loss_tar)):
            self._adapt_loss.record(value, attributes={"term": term})

    def record_pseudo_labels(self, *, unknown_fraction: float) -> None:
        self._unknown_fraction.record(unknown_fraction)

    def record_evaluation(self, *, protocol: str, h_score: float | None) -> None:
        if h_score is not None:
            self._h_score.record(h_score, attributes={"protocol": protocol})

    def record_sweep_cell(self, *, outcome: str) -> None:
        self._sweep_cells_total.add(1, attributes={"outcome": outcome})


@lru_cache(maxsize=1)
def get_app_metrics() -> AppMetrics:
    return AppMetrics()
