"""Shared numeric defaults and small helpers."""

from __future__ import annotations

import hashlib
import json
import os

# Certificate tolerance (idempotency, self-adjointness, positivity, DS checks).
DEFAULT_TOL = 1e-9

# Eigenvalues closer than this are merged into one spectral cluster.
EIG_CLUSTER_TOL = 1e-8

# Kernel threshold used when intersecting projection ranges.
MEET_KERNEL_TOL = 1e-8

TOL_ENV_VAR = "NCERG_TOL"


def resolve_tol(tol=None):
    """Pick the effective certificate tolerance.

    Explicit argument wins, then the NCERG_TOL environment variable,
    then DEFAULT_TOL.
    """
    if tol is not None:
        return float(tol)
    env = os.environ.get(TOL_ENV_VAR)
    if env:
        return float(env)
    return DEFAULT_TOL


def dyadic_schedule(n_max):
    """Evaluation points 1, 2, 4, ... up to and including n_max."""
    if n_max < 1:
        raise ValueError("horizon must be >= 1")
    points = []
    n = 1
    while n < n_max:
        points.append(n)
        n *= 2
    points.append(n_max)
    return points


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def short_hash(obj) -> str:
    """12-hex content hash of a JSON-serializable object."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:12]


def fmt_cell(value) -> str:
    """Deterministic CSV cell formatting (shortest round-trip floats)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)
