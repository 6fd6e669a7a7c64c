"""scikit-learn compatible wrappers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import Multigraph, Partition, StepKernel
from .density import DEFAULT_CAP, t_moment
from .regularity import lift, stepping, weak_regularity_partition


class WeakRegularityPartitioner(TransformerMixin, BaseEstimator):
    """Weak regularity partition of a symmetric block matrix.

    ``fit`` takes a square matrix of block values; the block measures come
    from ``sample_weight`` (uniform by default).  ``transform`` returns the
    stepped kernel ``w_P`` expressed on the input blocks.

    Parameters
    ----------
    n_classes : int
        Target class count ``k`` (at least 2).
    method : {"exact", "heuristic", "auto"}
        Jumble-norm search mode.
    random_state : int
        Seed for the heuristic search.
    """

    def __init__(self, n_classes=16, method="exact", random_state=0):
        self.n_classes = n_classes
        self.method = method
        self.random_state = random_state

    def _kernel(self, X, sample_weight):
        X = check_array(X, dtype=float)
        if X.shape[0] != X.shape[1]:
            raise ValueError(f"expected a square block matrix, got shape {X.shape}")
        if sample_weight is None:
            lam = np.full(X.shape[0], 1.0 / X.shape[0])
        else:
            lam = np.asarray(sample_weight, dtype=float)
            lam = lam / lam.sum()
        return StepKernel(Partition(lam), X)

    def fit(self, X, y=None, sample_weight=None):
        w = self._kernel(X, sample_weight)
        res = weak_regularity_partition(w, self.n_classes, self.method, self.random_state)
        self.labels_ = res.labels
        self.partition_ = res.partition
        self.stepped_ = res.stepped
        self.residual_jumble_ = res.error
        self.bound_ = res.bound
        self.certified_ = res.certified
        self.n_features_in_ = w.k
        self._ground = w.partition
        return self

    def transform(self, X):
        check_is_fitted(self, "labels_")
        X = check_array(X, dtype=float)
        if X.shape != (self.labels_.size, self.labels_.size):
            raise ValueError(f"expected shape {(self.labels_.size,) * 2}, got {X.shape}")
        w = StepKernel(self._ground, X)
        return np.array(lift(stepping(w, self.labels_), self.labels_, self._ground).values)


class HomDensityEmbedding(TransformerMixin, BaseEstimator):
    """Embed multigraphs by their node-and-edge densities against a battery.

    ``transform`` maps a list of Multigraphs to an array of shape
    ``(n_graphs, len(battery))``.  Stateless; ``fit`` only validates.
    """

    def __init__(self, battery=None, cap=DEFAULT_CAP):
        self.battery = battery
        self.cap = cap

    def fit(self, X=None, y=None):
        battery = list(self.battery or [])
        if not battery or not all(isinstance(F, Multigraph) for F in battery):
            raise ValueError("battery must be a non-empty list of Multigraphs")
        self.n_features_out_ = len(battery)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        graphs = list(X)
        if not all(isinstance(G, Multigraph) for G in graphs):
            raise ValueError("X must be a sequence of Multigraphs")
        return np.array([[t_moment(F, G, self.cap) for F in self.battery] for G in graphs], dtype=float).reshape(
            len(graphs), len(self.battery)
        )
