"""scikit-learn style front end.

``BunkerLocator`` and ``BLRSASolver`` follow the estimator protocol
(``get_params``/``set_params``/``clone``, ``fit`` returning ``self``, fitted
attributes with a trailing underscore), so they can be driven by
``sklearn.model_selection.ParameterGrid`` and friends.

Example::

    solver = BLRSASolver(algorithm="2s-rsa", n_paths=2, n_bunkers=2)
    solver.fit(instance)
    solver.metrics_.avg_lost_flow
    solver.predict(other_attacks)     # lost Gbps per attack
"""

from __future__ import annotations

import time
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .evaluation import Metrics, attack_losses, compute_metrics
from .model import AttackScenario, ProblemInstance, Topology
from .solvers import Solution, SolverConfig, solve
from .tuning import recommended_lambda
from .validation import check_algorithm, check_count, check_instance, check_weights
from .vulnerability import BunkerPolicy, compute_vul_matrix, place_bunkers


def run_blrsa(
    instance: ProblemInstance,
    algorithm: str,
    policy,
    config: SolverConfig,
):
    """Place bunkers, solve RSA and score the result.

    Returns ``(solution, metrics, runtime_ms)``; the runtime covers bunker
    placement and routing, not the evaluation.
    """
    start = time.perf_counter()
    bunkers = place_bunkers(policy, instance.topology, instance.attacks, instance.num_bunkers)
    solution = solve(algorithm, instance, bunkers, config)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return solution, compute_metrics(solution, instance), runtime_ms


class BunkerLocator(BaseEstimator):
    """Choose bunker sites; ``transform`` maps attacks to link vulnerability."""

    def __init__(self, policy="AdaptiveAvg", n_bunkers=0):
        self.policy = policy
        self.n_bunkers = n_bunkers

    def fit(self, X, y=None):
        if isinstance(X, ProblemInstance):
            topology, attacks = X.topology, X.attacks
        else:
            topology, attacks = X
        if not isinstance(topology, Topology):
            raise TypeError("fit expects a ProblemInstance or a (Topology, attacks) pair")
        policy = BunkerPolicy.parse(self.policy)
        budget = check_count(self.n_bunkers, "n_bunkers")
        self.topology_ = topology
        self.bunkers_ = place_bunkers(policy, topology, list(attacks), budget)
        return self

    def transform(self, X: Sequence[AttackScenario]) -> np.ndarray:
        check_is_fitted(self, "bunkers_")
        return compute_vul_matrix(self.topology_, list(X), self.bunkers_)


class BLRSASolver(BaseEstimator):
    """Bunker placement plus one of the four RSA heuristics.

    Parameters left as ``None`` are taken from the instance passed to
    ``fit``. ``lam=None`` uses the tuned value for the bundled networks
    (30 elsewhere).
    """

    def __init__(
        self,
        algorithm="1s-rsa",
        bunker_policy="AdaptiveAvg",
        n_paths=None,
        n_bunkers=None,
        lam=None,
        k_candidates=40,
        c_spec=None,
        c_res=None,
    ):
        self.algorithm = algorithm
        self.bunker_policy = bunker_policy
        self.n_paths = n_paths
        self.n_bunkers = n_bunkers
        self.lam = lam
        self.k_candidates = k_candidates
        self.c_spec = c_spec
        self.c_res = c_res

    def _effective_instance(self, instance: ProblemInstance) -> ProblemInstance:
        changes = {}
        if self.n_paths is not None:
            changes["num_paths"] = check_count(self.n_paths, "n_paths", 1)
        if self.n_bunkers is not None:
            changes["num_bunkers"] = check_count(self.n_bunkers, "n_bunkers")
        if self.c_spec is not None or self.c_res is not None:
            c_spec = 1.0 - self.c_res if self.c_spec is None else self.c_spec
            c_res = 1.0 - c_spec if self.c_res is None else self.c_res
            changes["c_spec"], changes["c_res"] = check_weights(c_spec, c_res)
        return check_instance(instance.with_params(**changes) if changes else instance)

    def fit(self, X: ProblemInstance, y=None):
        instance = self._effective_instance(X)
        algorithm = check_algorithm(self.algorithm)
        policy = BunkerPolicy.parse(self.bunker_policy)
        lam = self.lam
        if lam is None:
            lam = recommended_lambda(instance.topology.name, policy, instance.c_spec)
        config = SolverConfig(lam=check_count(lam, "lam", 1), k_candidates=check_count(self.k_candidates, "k_candidates", 1))
        solution, metrics, runtime = run_blrsa(instance, algorithm, policy, config)
        self.instance_: ProblemInstance = instance
        self.lam_ = config.lam
        self.solution_: Solution = solution
        self.bunkers_ = solution.bunkers
        self.metrics_: Metrics = metrics
        self.runtime_ms_ = runtime
        return self

    def predict(self, X: Optional[Sequence[AttackScenario]] = None) -> np.ndarray:
        """Lost bitrate (Gbps) per attack for the fitted design."""
        check_is_fitted(self, "solution_")
        attacks = self.instance_.attacks if X is None else tuple(X)
        return attack_losses(self.solution_, self.instance_, attacks)

    def score(self, X: Optional[ProblemInstance] = None, y=None) -> float:
        """Negated weighted objective, so that larger is better."""
        check_is_fitted(self, "solution_")
        instance = self.instance_ if X is None else self._effective_instance(X)
        return -compute_metrics(self.solution_, instance).objective
