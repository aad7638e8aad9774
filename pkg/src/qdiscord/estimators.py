"""scikit-learn compatible transformers over batches of density matrices.

``X`` is an array of shape ``(n_samples, d, d)`` (or a list of
:class:`~qdiscord.states.DensityMatrix`), with ``d = dim_a * dim_b``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .discord import OptimizerConfig, commutator_norms, discord
from .exceptions import InvalidDimensionError
from .states import DensityMatrix, check_state_matrix


def check_density_matrices(X, dims, validate=True):
    """Stack ``X`` into a complex ``(n, d, d)`` array, checking every entry is a state."""
    if isinstance(X, DensityMatrix):
        X = [X]
    arr = np.asarray([np.asarray(x) for x in X], dtype=np.complex128)
    d = dims[0] * dims[1]
    if arr.ndim != 3 or arr.shape[1:] != (d, d):
        raise InvalidDimensionError(f"expected shape (n, {d}, {d}) for dims {tuple(dims)}, got {arr.shape}")
    if validate:
        for m in arr:
            check_state_matrix(m)
    return arr


class CommutatorTransformer(TransformerMixin, BaseEstimator):
    """Maps each state to the Frobenius norm of [rho, rho_A (x) 1]."""

    def __init__(self, dims=(2, 2), validate=True):
        self.dims = dims
        self.validate = validate

    def fit(self, X, y=None):
        check_density_matrices(X, self.dims, self.validate)
        self.dims_ = tuple(self.dims)
        return self

    def transform(self, X):
        check_is_fitted(self, "dims_")
        arr = check_density_matrices(X, self.dims_, self.validate)
        return commutator_norms(arr, self.dims_)[:, None]


class DiscordTransformer(TransformerMixin, BaseEstimator):
    """Maps each state to (mutual information, classical correlations, discord) in bits."""

    def __init__(self, dims=(2, 2), restarts=20, tol=1e-8, random_state=0):
        self.dims = dims
        self.restarts = restarts
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        check_density_matrices(X, self.dims)
        self.dims_ = tuple(self.dims)
        self.config_ = OptimizerConfig(restarts=self.restarts, tol=self.tol, seed=self.random_state)
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        arr = check_density_matrices(X, self.dims_)
        out = np.empty((len(arr), 3))
        for i, m in enumerate(arr):
            res = discord(DensityMatrix(*self.dims_, m, check=False), self.config_)
            out[i] = (res.mutual_information, res.classical_correlations, res.discord)
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["mutual_information", "classical_correlations", "discord"], dtype=object)
