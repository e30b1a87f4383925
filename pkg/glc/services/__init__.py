from glc.services.adaptation import ablation_variant, adapt, train_source
from glc.services.clustering import estimate_class_count, kmeans, silhouette_values
from glc.services.consensus import bank_init, bank_update, knn_neighbor_targets
from glc.services.evaluation import evaluate, evaluate_params, h_score
from glc.services.pseudo_labels import assign_pseudo_labels
from glc.services.scenarios import generate_scenario
from glc.services.sweep import run_sweep
from glc.services.types import AdaptHistory, AdaptResult, EvaluationReport

__all__ = [
    "AdaptHistory",
    "AdaptResult",
    "EvaluationReport",
    "ablation_variant",
    "adapt",
    "assign_pseudo_labels",
    "bank_init",
    "bank_update",
    "estimate_class_count",
    "evaluate",
    "evaluate_params",
    "generate_scenario",
    "h_score",
    "kmeans",
    "knn_neighbor_targets",
    "run_sweep",
    "silhouette_values",
    "train_source",
]
