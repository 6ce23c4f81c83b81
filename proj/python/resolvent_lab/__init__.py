"""Crossing integrals of lattice dispersion relations.

The heavy entry points return the same JSON artifacts as the command line
tool, decoded into dicts.
"""

import json as _json

from . import _core
from ._core import (
    DispersionModel,
    Error,
    builtin_model,
    builtin_names,
    gtilde,
    parse_model,
    resolve_model,
    schema_version,
    select_nu,
)

__all__ = [
    "DispersionModel",
    "Error",
    "builtin_model",
    "builtin_names",
    "classify",
    "crossing_integral",
    "f_omega",
    "gtilde",
    "parse_model",
    "probe",
    "resolve_model",
    "schema_version",
    "select_nu",
    "sweep",
    "trace",
    "verify",
]


def _model(m):
    return resolve_model(m) if isinstance(m, str) else m


def crossing_integral(model, alpha, beta, k0=(), samples=100000, seed=1, workers=0, record_time=True):
    return _json.loads(_core.crossing_integral(_model(model), list(alpha), beta, list(k0), samples, seed, workers,
                                               record_time))


def f_omega(model, s, samples=100000, seed=1, workers=0, record_time=True):
    return _json.loads(_core.f_omega(_model(model), s, samples, seed, workers, record_time))


def classify(model, fit_f_omega=True, samples=1000000, seed=1, workers=0, n_max=4, record_time=True):
    return _json.loads(_core.classify(_model(model), fit_f_omega, samples, seed, workers, n_max, record_time))


def sweep(model, betas=(), samples=100000, seed=1, workers=0, alpha_points=5, k0_per_axis=2, top_k=8,
          final_samples=0, record_time=True):
    return _json.loads(_core.sweep(_model(model), list(betas), samples, seed, workers, alpha_points, k0_per_axis,
                                   top_k, final_samples, record_time))


def trace(model, x0, v, lambda_=0.0, extent=1.5, points=31, n_max=4):
    return _json.loads(_core.trace(_model(model), list(x0), list(v), lambda_, extent, points, n_max))


def probe(model, n_max=4, grid=0, workers=0):
    return _json.loads(_core.probe(_model(model), n_max, grid, workers))


def verify(profile="smoke", seed=20240601, workers=0, record_time=True):
    return _json.loads(_core.verify(profile, seed, workers, record_time))
