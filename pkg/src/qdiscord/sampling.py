"""Random states, zero-discord ensembles, perturbations and depolarizing segments.

Mixed states are drawn from the Hilbert-Schmidt measure (normalized
Ginibre products).  All samplers take ``random_state``: an int seed, a
:class:`~qdiscord.rng.SeededSampler`, a ``numpy.random.Generator`` or None.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .discord import ProjectiveMeasurement, make_zero_discord
from .exceptions import InvalidDimensionError, InvalidParameterError
from .rng import PRNG_ID, SeededSampler, check_random_state, ginibre, random_unitary
from .states import DensityMatrix, as_matrix

__all__ = [
    "SeededSampler",
    "random_unitary",
    "random_pure_state",
    "random_mixed_state",
    "random_zero_discord",
    "random_simplex",
    "perturb",
    "depolarize_toward_identity",
    "write_ensemble",
    "read_ensemble",
]


def _hermitize(m):
    return 0.5 * (m + m.conj().T)


def _dims(d, dims):
    if dims is None:
        return d, 1
    if dims[0] * dims[1] != d:
        raise InvalidDimensionError(f"dims {dims} do not multiply to {d}")
    return dims


def random_pure_state(d, random_state=None, dims=None):
    """|psi><psi| with psi a normalized standard complex Gaussian vector."""
    if d < 2:
        raise InvalidDimensionError(f"d must be >= 2, got {d}")
    v = ginibre(d, 1, random_state)[:, 0]
    v /= np.linalg.norm(v)
    return DensityMatrix(*_dims(d, dims), _hermitize(np.outer(v, v.conj())))


def random_mixed_state(d, rank=None, random_state=None, dims=None):
    """G G^dag / Tr[G G^dag] with G a d x rank Ginibre matrix.

    ``rank=d`` (the default) samples the Hilbert-Schmidt measure on all
    density matrices.
    """
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise InvalidParameterError(f"rank must lie in [1, {d}], got {rank}")
    g = ginibre(d, rank, random_state)
    m = g @ g.conj().T
    return DensityMatrix(*_dims(d, dims), _hermitize(m / np.trace(m).real))


def random_simplex(n, random_state=None):
    """Uniform point on the probability simplex (normalized exponentials)."""
    e = check_random_state(random_state).standard_exponential(n)
    return e / e.sum()


def random_zero_discord(dim_a, dim_b, random_state=None):
    """Block-diagonal state with Haar basis, flat weights and HS-random blocks."""
    if dim_a < 2 or dim_b < 2:
        raise InvalidDimensionError("both dimensions must be >= 2")
    rng = check_random_state(random_state)
    basis = ProjectiveMeasurement(random_unitary(dim_a, rng))
    p = random_simplex(dim_a, rng)
    sigmas = [random_mixed_state(dim_b, random_state=rng).matrix for _ in range(dim_a)]
    return make_zero_discord(p, basis, sigmas)


def perturb(rho, eta, random_state=None, direction=None):
    """(1 - eta) rho + eta sigma with sigma a full-rank HS-random state.

    Pass ``direction`` to reuse a fixed sigma, e.g. when sweeping eta.
    """
    if not 0 < eta <= 1:
        raise InvalidParameterError(f"eta must lie in (0, 1], got {eta}")
    if direction is None:
        sigma = random_mixed_state(rho.dim, random_state=random_state).matrix
    else:
        sigma = as_matrix(direction)
    return DensityMatrix(rho.dim_a, rho.dim_b, (1 - eta) * rho.matrix + eta * sigma)


def depolarize_toward_identity(rho, lam):
    """Point ``lam`` of the way along the segment from rho to 1/d."""
    if not 0 <= lam <= 1:
        raise InvalidParameterError(f"lam must lie in [0, 1], got {lam}")
    m = (1 - lam) * as_matrix(rho) + lam * np.eye(rho.dim) / rho.dim
    return DensityMatrix(rho.dim_a, rho.dim_b, m)


def write_ensemble(path, states, header):
    """JSON-lines dump: a header record, then one state record per line."""
    head = {"prng": PRNG_ID, **header}
    with Path(path).open("w") as fh:
        fh.write(json.dumps(head) + "\n")
        for rho in states:
            fh.write(json.dumps(rho.to_dict()) + "\n")


def read_ensemble(path):
    with Path(path).open() as fh:
        header = json.loads(fh.readline())
        states = [DensityMatrix.from_dict(json.loads(line)) for line in fh if line.strip()]
    return header, states
