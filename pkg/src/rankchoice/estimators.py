"""Estimator facade over the two solvers, in the scikit-learn idiom.

The estimators wrap :func:`rankchoice.frank_wolfe.fw_run` and
:func:`rankchoice.mirror_descent.dual_run` behind ``fit`` / ``predict`` /
``get_params`` so they compose with ecosystem tooling.  ``fit`` takes the
training :class:`~rankchoice.instance.Instance` plus either an exact/static
choice vector ``p`` (with optional per-assortment ``mask``) or a streaming
``data`` source; fitted state lands in trailing-underscore attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .distances import make_distance
from .fitting import static_source
from .frank_wolfe import fw_run
from .instance import Instance, check_choice_vector, mae, predict
from .mirror_descent import dual_run


class _ChoiceEstimator(BaseEstimator):
    def _check_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    def _fit_inputs(self, instance: Instance, p, mask, data):
        if (p is None) == (data is None):
            raise ValueError("pass exactly one of p (static) or data (stream)")
        if p is not None:
            p = check_choice_vector(instance, p)
            data = static_source(p, mask)
        return data

    def _store(self, instance: Instance, result) -> None:
        self.instance_ = instance
        self.result_ = result
        self.model_ = result.model
        self.prediction_ = result.prediction
        self.n_iter_ = result.iterations_used
        self.train_mae_ = result.train_mae

    def predict(self, instance: Instance | None = None) -> np.ndarray:
        """Choice probabilities for every (item, assortment) pair of ``instance``.

        Defaults to the training instance; any instance over the same item
        universe works (e.g. held-out assortments).
        """
        self._check_fitted()
        inst = self.instance_ if instance is None else instance
        return predict(inst, self.model_)

    def score(self, instance: Instance, p) -> float:
        """Negative MAE against ``p`` on ``instance`` (higher is better)."""
        self._check_fitted()
        return -mae(self.predict(instance), np.asarray(p, dtype=np.float64))


class FrankWolfeEstimator(_ChoiceEstimator):
    """Sparse choice-model estimation by Frank-Wolfe over the rankings polytope.

    Parameters mirror the solver: ``distance`` must be a finite-curvature
    kind (``"sql2"``), ``iterations`` is the budget ``T`` (the solver takes
    ``T - 1`` steps), ``stop_train_mae`` the early-stopping threshold (None
    disables), ``init_ranking`` the starting vertex (identity by default).
    """

    def __init__(
        self,
        distance: str = "sql2",
        iterations: int = 10_000,
        stop_train_mae: float | None = 0.001,
        init_ranking=None,
    ):
        self.distance = distance
        self.iterations = iterations
        self.stop_train_mae = stop_train_mae
        self.init_ranking = init_ranking

    def fit(self, instance: Instance, p=None, mask=None, data=None):
        data = self._fit_inputs(instance, p, mask, data)
        result = fw_run(
            instance,
            make_distance(self.distance, instance),
            data,
            iterations=self.iterations,
            stop_train_mae=self.stop_train_mae,
            init=self.init_ranking,
        )
        self._store(instance, result)
        return self


class MirrorDescentEstimator(_ChoiceEstimator):
    """Sparse choice-model estimation by dual regret minimization.

    ``distance`` picks the norm being minimized (``"l1"``, ``"l2"`` or
    ``"linf"``); ``set_width`` and ``grad_bound`` override the step-size
    constants when given.  After ``fit``, ``certificate_`` holds the realized
    average regret and its a-priori bound.
    """

    def __init__(
        self,
        distance: str = "l2",
        iterations: int = 10_000,
        stop_train_mae: float | None = 0.001,
        set_width: float | None = None,
        grad_bound: float | None = None,
    ):
        self.distance = distance
        self.iterations = iterations
        self.stop_train_mae = stop_train_mae
        self.set_width = set_width
        self.grad_bound = grad_bound

    def fit(self, instance: Instance, p=None, mask=None, data=None):
        data = self._fit_inputs(instance, p, mask, data)
        result, certificate = dual_run(
            instance,
            make_distance(self.distance, instance),
            data,
            iterations=self.iterations,
            stop_train_mae=self.stop_train_mae,
            set_width=self.set_width,
            grad_bound=self.grad_bound,
        )
        self._store(instance, result)
        self.certificate_ = certificate
        return self
