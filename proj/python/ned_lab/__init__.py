"""Python access to the ned_lab library."""

import json

from ._ned_lab import (  # noqa: F401
    ArgumentError,
    ContractError,
    InapplicableError,
    NedError,
    NumericError,
    Process,
    dirichlet_eigenvalue,
    discrete_laplacian_eigenvalues,
    gallery_names,
    gallery_process,
    planted_process,
)
from . import _ned_lab as _core


def process_from_config(config):
    return _core.process_from_json(json.dumps(config))


def gallery_claims(name, **params):
    return json.loads(_core.gallery_claims_json(name, params))


def check_certificate(process, certificate, horizon=40.0, step=0.25):
    return json.loads(_core.check_certificate_json(process, json.dumps(certificate), horizon, step))


def convert_halfline(certificate):
    return json.loads(_core.convert_halfline_json(json.dumps(certificate)))


def dual_certificate(certificate):
    return json.loads(_core.dual_certificate_json(json.dumps(certificate)))


def classify(process, projection="zero", side="full", horizon=10.0, step=0.25):
    return json.loads(_core.classify_json(process, projection, side, horizon, step))


def robustness_constants(M, omega, upsilon, eps, L=None):
    return json.loads(_core.robustness_json(M, omega, upsilon, eps, L))
