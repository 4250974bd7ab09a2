import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import ParameterGrid

from blrsa.estimator import BLRSASolver, BunkerLocator
from blrsa.evaluation import attack_losses, compute_metrics
from blrsa.io import bundled_topology
from blrsa.scenarios import GenSpec, make_instance
from blrsa.tuning import FALLBACK_LAMBDA, RECOMMENDED_LAMBDA, recommended_lambda
from blrsa.validation import check_count, check_weights
from blrsa.vulnerability import BunkerPolicy, compute_vul_matrix

from helpers import random_instance


def test_get_set_params_and_clone():
    est = BLRSASolver(algorithm="2s-rsa", n_paths=2)
    params = est.get_params()
    assert params["algorithm"] == "2s-rsa" and params["n_paths"] == 2
    twin = clone(est.set_params(lam=7))
    assert twin.get_params() == est.get_params()
    assert BunkerLocator(n_bunkers=3).get_params() == {"policy": "AdaptiveAvg", "n_bunkers": 3}


def test_solver_fit_predict_score():
    inst = random_instance(5, nodes=(5, 5), num_slices=40)
    est = BLRSASolver(algorithm="1s-rsa", n_paths=2, n_bunkers=1, lam=5, c_spec=0.2)
    assert est.fit(inst) is est
    assert est.instance_.num_paths == 2 and est.instance_.c_res == pytest.approx(0.8)
    assert len(est.bunkers_) == 1
    losses = est.predict()
    assert losses.shape == (len(inst.attacks),)
    assert np.array_equal(losses, attack_losses(est.solution_, est.instance_))
    assert est.score() == pytest.approx(-est.metrics_.objective)
    assert est.predict(inst.attacks[:1]).shape == (1,)


def test_solver_defaults_come_from_instance():
    inst = random_instance(6, num_slices=40)
    est = BLRSASolver(lam=3).fit(inst)
    assert est.instance_ == inst
    assert est.metrics_ == compute_metrics(est.solution_, inst)


def test_auto_lambda_uses_table():
    inst = make_instance(GenSpec("small", 0, 200.0, bundled_topology("euro16")), c_spec=0.5, c_res=0.5)
    est = BLRSASolver(algorithm="1s-rsa", bunker_policy="AdaptiveAvg").fit(inst)
    assert est.lam_ == 5


def test_parameter_grid_drives_solver():
    inst = random_instance(7, num_slices=40)
    scores = [clone(BLRSASolver(lam=2)).set_params(**p).fit(inst).score()
              for p in ParameterGrid({"algorithm": ["2s-rsa", "ff-rsa"], "n_bunkers": [0, 1]})]
    assert len(scores) == 4


@pytest.mark.parametrize(
    "params",
    [{"algorithm": "greedy"}, {"n_paths": 0}, {"lam": 0}, {"c_spec": 1.5}, {"bunker_policy": "random"},
     {"c_spec": 0.5, "c_res": 0.6}, {"n_bunkers": True}],
)
def test_bad_params_rejected(params):
    with pytest.raises(ValueError):
        BLRSASolver(**params).fit(random_instance(0))


def test_fit_needs_instance():
    with pytest.raises(TypeError):
        BLRSASolver().fit("pl12")
    with pytest.raises(TypeError):
        BunkerLocator().fit(("pl12", []))


def test_not_fitted():
    with pytest.raises(NotFittedError):
        BLRSASolver().predict()
    with pytest.raises(NotFittedError):
        BunkerLocator().transform([])


def test_bunker_locator():
    inst = random_instance(8, nodes=(5, 5))
    loc = BunkerLocator("NodalDegree", 2).fit(inst)
    assert len(loc.bunkers_) == 2
    vul = loc.transform(inst.attacks)
    assert np.array_equal(vul, compute_vul_matrix(inst.topology, inst.attacks, loc.bunkers_))
    same = BunkerLocator("NodalDegree", 2).fit((inst.topology, inst.attacks))
    assert same.bunkers_ == loc.bunkers_


def test_lambda_table():
    assert recommended_lambda("PL12", "AdaptiveAvg", 0.0) == 30
    assert recommended_lambda("dt14", BunkerPolicy.ADAPTIVE_MAX, 0.2) == 5
    assert recommended_lambda("euro16", "NodalDegree", 0.5) == 15
    assert recommended_lambda("euro16", "AvgNeighbour", 0.6) == 15
    assert recommended_lambda("custom", "AdaptiveAvg", 0.5) == FALLBACK_LAMBDA
    assert recommended_lambda("pl12", "AdaptiveAvg", 0.55) == FALLBACK_LAMBDA
    assert len(RECOMMENDED_LAMBDA) == 11 * 5 * 3


def test_validation_helpers():
    assert check_weights(1, 0) == (1.0, 0.0)
    assert check_count(3, "x", 1) == 3
    for bad in (-1, 1.5, "2", False):
        with pytest.raises(ValueError):
            check_count(bad, "x")
