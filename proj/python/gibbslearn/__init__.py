"""Hamiltonian learning from simulated Gibbs-state measurements."""

import json

from . import _gibbslearn
from ._gibbslearn import (
    BudgetError,
    GibbsLearnError,
    MalformedInput,
    ModeMismatch,
    RangeError,
    ResourceError,
    SchemaError,
    f_hat,
    g_beta,
    g_hat,
    pauli_matrix,
    sample_expectation,
    set_threads,
)

__all__ = [
    "BudgetError",
    "GibbsLearnError",
    "MalformedInput",
    "ModeMismatch",
    "RangeError",
    "ResourceError",
    "SchemaError",
    "aggregate",
    "f_hat",
    "g_beta",
    "g_hat",
    "gibbs_state",
    "hamiltonian_matrix",
    "identifiability_lhs",
    "learn",
    "make_model",
    "pauli_matrix",
    "q_value",
    "sample_expectation",
    "set_threads",
    "verify",
]


def _text(spec):
    return spec if isinstance(spec, str) else json.dumps(spec)


def make_model(geometry, extents, model="tfim", seed=1, random_coefficients=False, periodic=False):
    """Hamiltonian file contents as a dict."""
    return json.loads(_gibbslearn.make_model(geometry, list(extents), model, seed, random_coefficients, periodic))


def hamiltonian_matrix(spec):
    return _gibbslearn.hamiltonian_matrix(_text(spec))


def gibbs_state(spec, beta):
    return _gibbslearn.gibbs_state(_text(spec), beta)


def q_value(o, g, a, k, truth, beta, omega_cut, sigma=0.0, path="frequency", tol=1e-8):
    """Returns (Q, error estimate). sigma <= 0 selects 1/beta."""
    return _gibbslearn.q_value(o, _text(g), a, _text(k), _text(truth), beta, omega_cut, sigma, path, tol)


def identifiability_lhs(o, a, h, h_prime, beta):
    return _gibbslearn.identifiability_lhs(o, a, _text(h), _text(h_prime), beta)


def learn(spec, config=None, algorithm="simple"):
    """Runs a learner and returns the report dict (no timestamp)."""
    return json.loads(_gibbslearn.learn(_text(spec), json.dumps(config or {}), algorithm))


def verify(suites=("all",), seed=1, sizes=(2, 3, 4), instances=20):
    return json.loads(_gibbslearn.verify(list(suites), seed, list(sizes), instances))


def aggregate(reports):
    """(aggregate CSV text, trend CSV text) for a list of report dicts."""
    return _gibbslearn.aggregate([_text(r) for r in reports])
