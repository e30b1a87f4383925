from enum import StrEnum


class LogEvent(StrEnum):
    COMMAND_STARTED = "command.started"
    COMMAND_COMPLETED = "command.completed"
    COMMAND_FAILED = "command.failed"

    SCENARIO_GENERATED = "scenario.generated"
    DATASET_SAVED = "dataset.saved"
    DATASET_LOADED = "dataset.loaded"
    CHECKPOINT_SAVED = "checkpoint.saved"
    CHECKPOINT_LOADED = "checkpoint.loaded"

    SOURCE_EPOCH_COMPLETED = "source.epoch.completed"
    SOURCE_TRAINING_COMPLETED = "source.training.completed"

    KMEANS_EMPTY_CLUSTER = "kmeans.empty_cluster"
    CLASS_COUNT_ESTIMATED = "adapt.class_count.estimated"
    PSEUDO_LABELS_ASSIGNED = "adapt.pseudo_labels.assigned"
    ADAPT_EPOCH_COMPLETED = "adapt.epoch.completed"
    ADAPT_COMPLETED = "adapt.completed"
    CLASSIFIER_CHECKSUM = "adapt.classifier.checksum"

    EVALUATION_COMPLETED = "eval.completed"
    SWEEP_CELL_COMPLETED = "sweep.cell.completed"
    SWEEP_CELL_FAILED = "sweep.cell.failed"
    SWEEP_CELLS_SKIPPED = "sweep.cells.skipped"
