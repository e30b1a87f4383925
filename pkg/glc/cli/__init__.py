from . import adapt, evaluate, generate, sweep, train_source

__all__ = ["generate", "train_source", "adapt", "evaluate", "sweep"]
