"""Approximate kernel SVM training.

A precomputed low-rank factor of the kernel matrix turns kernel SVM training
into linear SVM training on the factor rows, solved by dual coordinate ascent
with shrinking. Includes one-vs-one multiclass, k-fold cross-validation and
(C, gamma) grid search with warm starts.
"""

from ._core import (
    Dataset,
    Model,
    ModelFormatError,
    ParseError,
    __version__,
    cross_validate,
    grid_search,
    load_dataset,
    load_model,
    parse_dataset,
    train,
)

__all__ = [
    "Dataset",
    "Model",
    "ModelFormatError",
    "ParseError",
    "__version__",
    "cross_validate",
    "grid_search",
    "load_dataset",
    "load_model",
    "parse_dataset",
    "train",
]
