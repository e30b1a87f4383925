from __future__ import annotations

import logging

import glc.observability.telemetry as telemetry
from glc.core.config import Settings
from glc.core.logger import (
    RunContextFilter,
    bind_run_context,
    event_message,
    get_run_id,
    reset_run_context,
)
from glc.observability.events import LogEvent
from glc.observability.metrics import get_app_metrics


class RecordingSpan:
    def __init__(self, *, recording: bool = True) -> None:
        self._recording = recording
        self.events: list[tuple[str, dict[str, object]]] = []
        self.attributes: list[dict[str, object]] = []

    def is_recording(self) -> bool:
        return self._recording

    def add_event(self, name: str, attributes: dict[str, object]) -> None:
        self.events.append((name, attributes))

    def set_attributes(self, attributes: dict[str, object]) -> None:
        self.attributes.append(attributes)


def test_add_current_span_event_records_event(monkeypatch) -> None:
    span = RecordingSpan()
    monkeypatch.setattr(telemetry.trace, "get_current_span", lambda: span)

    telemetry.add_current_span_event("pseudo_labels", {"unknown_fraction": 0.25, "epoch": 2})

    assert span.events == [("pseudo_labels", {"unknown_fraction": 0.25, "epoch": 2})]


def test_add_current_span_event_skips_non_recording_span(monkeypatch) -> None:
    span = RecordingSpan(recording=False)
    monkeypatch.setattr(telemetry.trace, "get_current_span", lambda: span)

    telemetry.add_current_span_event("pseudo_labels")

    assert span.events == []


def test_set_current_span_attributes_sets_attributes(monkeypatch) -> None:
    span = RecordingSpan()
    monkeypatch.setattr(telemetry.trace, "get_current_span", lambda: span)

    telemetry.set_current_span_attributes({"variant": "full", "c_t_hat": 12})

    assert span.attributes == [{"variant": "full", "c_t_hat": 12}]


def test_start_span_runs_the_body_without_an_sdk() -> None:
    ran = []

    with telemetry.start_span("glc.test", {"epoch": 1}):
        ran.append(True)

    assert ran == [True]


def test_event_message_formats_fields() -> None:
    message = event_message(LogEvent.ADAPT_EPOCH_COMPLETED, epoch=3, loss_tar=0.123456789)

    assert message == "event=adapt.epoch.completed epoch=3 loss_tar=0.123457"


def test_run_context_is_stamped_on_records() -> None:
    record = logging.LogRecord("glc", logging.INFO, __file__, 1, "msg", None, None)
    tokens = bind_run_context("abc123", "adapt", 7)
    try:
        RunContextFilter().filter(record)
        assert get_run_id() == "abc123"
    finally:
        reset_run_context(tokens)

    assert (record.run_id, record.run_command, record.run_seed) == ("abc123", "adapt", "7")
    assert record.trace_id == "-"
    assert get_run_id() == "-"


def test_app_metrics_accept_every_recording() -> None:
    metrics = get_app_metrics()

    metrics.record_source_epoch(loss=0.5)
    metrics.record_adapt_epoch(variant="full", loss_glb=1.0, loss_loc=0.5, loss_tar=0.8)
    metrics.record_pseudo_labels(unknown_fraction=0.1)
    metrics.record_evaluation(protocol="h-score", h_score=0.7)
    metrics.record_evaluation(protocol="accuracy", h_score=None)
    metrics.record_sweep_cell(outcome="completed")

    assert get_app_metrics() is metrics


def test_settings_read_prefixed_environment(monkeypatch) -> None:
    monkeypatch.setenv("GLC_SWEEP_WORKERS", "3")
    monkeypatch.setenv("GLC_ESTIMATE_WORKERS", "2")

    settings = Settings(_env_file=None)

    assert settings.sweep_workers == 3
    assert settings.estimate_workers == 2
    assert set(Settings.model_fields) == {"log_level", "sweep_workers", "estimate_workers"}
