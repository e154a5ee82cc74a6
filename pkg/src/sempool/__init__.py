"""sempool: semantic-pool OOD detection toolkit.

A library and CLI covering both halves of the problem: the statistical model
(activation-count distributions, closed-form FPR curves, critical-ratio
analysis, Monte Carlo oracles) and the practical pipeline (pool construction,
negative-label mining over embeddings, group-softmax scoring, AUROC/FPR@TPR
evaluation, binary embedding-file I/O).
"""

from . import errors, fileio, metrics, pool, scoring, selection, theory

__version__ = "0.1.0"

__all__ = ["errors", "fileio", "metrics", "pool", "scoring", "selection", "theory", "__version__"]
