"""Quantum discord with measurements on subsystem A, and zero-discord tests.

Classical correlations are optimized over rank-1 projective measurements
only.  For POVM-based definitions the returned discord is an upper bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bloch import build_generator_basis
from .exceptions import InvalidParameterError, NumericalInconsistencyError
from .rng import SeededSampler, random_unitary
from .states import (
    EIGENVALUE_CUTOFF,
    DensityMatrix,
    as_matrix,
    check_state_matrix,
    mutual_information,
    partial_trace,
    ptrace,
    von_neumann_entropy,
)

PROJECTOR_ATOL = 1e-10
ZERO_PROBABILITY = 1e-14
DISCORD_CLAMP = 1e-9
DEGENERACY_GAP = 1e-8
C0_TOL = 1e-10
# commutator norms below NORM_FLOOR * d are rounding noise of O(1/d) entries
NORM_FLOOR = 1e-15


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the multi-start Nelder-Mead search over measurement bases.

    Restart 0 starts from the eigenbasis of rho_A; restarts 1.. start from
    Haar-random bases drawn from ``SeededSampler(seed, r)``.
    """

    restarts: int = 20
    tol: float = 1e-8
    xtol: float = 1e-5
    max_iter: int = 2000
    initial_step: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise InvalidParameterError("restarts must be >= 1")
        if self.tol <= 0 or self.xtol <= 0:
            raise InvalidParameterError("tolerances must be positive")

    def to_dict(self):
        return {
            "restarts": self.restarts,
            "tol": self.tol,
            "xtol": self.xtol,
            "max_iter": self.max_iter,
            "initial_step": self.initial_step,
            "seed": self.seed,
        }


DEFAULT_CONFIG = OptimizerConfig()


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """Rank-1 von Neumann measurement, stored as a unitary whose columns are the basis."""

    basis: np.ndarray

    def __post_init__(self):
        u = np.array(self.basis, dtype=np.complex128, copy=True)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise InvalidParameterError(f"basis must be a square matrix, got shape {u.shape}")
        err = np.max(np.abs(u.conj().T @ u - np.eye(len(u))))
        if err > PROJECTOR_ATOL:
            raise InvalidParameterError(f"basis is not orthonormal (deviation {err:.3e})")
        u.flags.writeable = False
        object.__setattr__(self, "basis", u)

    @property
    def dim(self):
        return len(self.basis)

    @property
    def projectors(self):
        return np.einsum("aj,bj->jab", self.basis, self.basis.conj())

    @classmethod
    def computational(cls, d):
        return cls(np.eye(d))

    @classmethod
    def from_projectors(cls, projectors):
        cols = []
        for p in projectors:
            w, v = np.linalg.eigh(p)
            cols.append(v[:, -1])
        return cls(np.column_stack(cols))

    def to_dict(self):
        return {"basis": [[[float(z.real), float(z.imag)] for z in row] for row in self.basis]}


@dataclass(frozen=True)
class DiscordResult:
    mutual_information: float
    classical_correlations: float
    discord: float
    optimal_measurement: ProjectiveMeasurement = field(compare=False)
    optimizer_restarts_used: int
    converged: bool

    def to_dict(self):
        return {
            "mutual_information": self.mutual_information,
            "classical_correlations": self.classical_correlations,
            "discord": self.discord,
            "optimal_measurement": self.optimal_measurement.to_dict(),
            "optimizer_restarts_used": self.optimizer_restarts_used,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class ClassicalCorrelationResult:
    value: float
    measurement: ProjectiveMeasurement
    converged: bool
    restarts_used: int


@dataclass(frozen=True)
class Omega0Result:
    residual: float
    basis: ProjectiveMeasurement
    converged: bool

    def member(self, tol=C0_TOL):
        return self.residual <= tol


# -- commutator criterion -------------------------------------------------

def reduced_commutator(matrix, dims):
    """[rho, rho_A (x) 1] for a raw matrix or a stack of them.

    Evaluated on the traceless parts, which gives the same operator but keeps
    round-off relative to the deviation from 1/d instead of to 1/d itself.
    """
    dim_a, dim_b = dims
    d = dim_a * dim_b
    m = np.asarray(matrix, dtype=np.complex128)
    dev = m - np.eye(d) / d
    dev_a = ptrace(m, dims, "A") - np.eye(dim_a) / dim_a
    lifted = np.einsum("...ij,kl->...ikjl", dev_a, np.eye(dim_b)).reshape(*m.shape[:-2], d, d)
    return dev @ lifted - lifted @ dev


def commutator_norms(matrices, dims):
    """Frobenius norms of the A-marginal commutator, vectorized over a stack."""
    c = reduced_commutator(matrices, dims)
    norms = np.sqrt(np.sum(np.abs(c) ** 2, axis=(-2, -1)))
    return np.where(norms < NORM_FLOOR * dims[0] * dims[1], 0.0, norms)


def commutator_criterion(rho):
    """Frobenius norm of [rho, rho_A (x) 1].  Positive values certify nonzero discord."""
    return float(commutator_norms(rho.matrix, rho.dims))


def in_c0(rho, tol=C0_TOL):
    return commutator_criterion(rho) <= tol


# -- measurement optimization ---------------------------------------------

def _conditional_entropy_objective(rho):
    """Closure u -> sum_j p_j S(rho_{B|j}) with u's columns as the basis on A."""
    dim_a, dim_b = rho.dims
    # m[b, d] is the (dA x dA) matrix <a b| rho |c d> over (a, c)
    m = rho.matrix.reshape(dim_a, dim_b, dim_a, dim_b).transpose(1, 3, 0, 2)

    def objective(u):
        # blocks[b, d, j] = <u_j| m[b, d] |u_j>, unnormalized conditional states
        blocks = np.sum(u.conj() * (m @ u), axis=-2).transpose(2, 0, 1)
        w = np.linalg.eigvalsh(blocks)
        probs = w.sum(axis=1)
        keep = probs >= ZERO_PROBABILITY
        w = w[keep] / probs[keep, None]
        w = np.where(w > EIGENVALUE_CUTOFF, w, 1.0)
        return float(-np.sum(probs[keep, None] * w * np.log2(w)))

    return objective


def conditional_entropy(rho, m):
    """sum_j p_j S(rho_{B|j}) for the measurement ``m`` on subsystem A."""
    if m.dim != rho.dim_a:
        raise InvalidParameterError(f"measurement dim {m.dim} != dim_a {rho.dim_a}")
    return _conditional_entropy_objective(rho)(m.basis)


def _unitary(x, generators):
    # generators flattened to (n, d*d)
    d = int(np.sqrt(generators.shape[1]))
    h = (x @ generators).reshape(d, d)
    if d == 2:
        # exp(i x.sigma) = cos|x| + i sin|x| (x/|x|).sigma
        r = np.sqrt(x @ x)
        if r == 0.0:
            return np.eye(2, dtype=np.complex128)
        return np.cos(r) * np.eye(2) + (1j * np.sin(r) / r) * h
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


def _eigenbasis(matrix):
    w, v = np.linalg.eigh(matrix)
    return w, v[:, ::-1]


def _multistart(objective, d, anchor, cfg):
    """Minimize ``objective(U)`` over unitaries U = W_r exp(i x.g).

    Returns (best value, best unitary, converged flag).  Ties go to the
    lowest restart index.
    """
    gens = build_generator_basis(d).generators.reshape(d * d - 1, d * d)
    n = len(gens)
    simplex = np.vstack([np.zeros(n), cfg.initial_step * np.eye(n)])
    best = (np.inf, None, False)
    for r in range(cfg.restarts):
        start = anchor if r == 0 else random_unitary(d, SeededSampler(cfg.seed, r))

        def f(x, start=start):
            return objective(start @ _unitary(x, gens))

        res = minimize(
            f,
            np.zeros(n),
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "fatol": cfg.tol,
                "xatol": cfg.xtol,
                "maxiter": cfg.max_iter,
            },
        )
        if res.fun < best[0]:
            best = (float(res.fun), start @ _unitary(res.x, gens), bool(res.success))
    return best


def classical_correlations(rho, cfg=DEFAULT_CONFIG):
    """J = S(rho_B) - min over projective measurements on A of the conditional entropy."""
    _, anchor = _eigenbasis(partial_trace(rho, "A"))
    value, u, converged = _multistart(
        _conditional_entropy_objective(rho), rho.dim_a, anchor, cfg
    )
    j = von_neumann_entropy(partial_trace(rho, "B")) - value
    return ClassicalCorrelationResult(max(j, 0.0), ProjectiveMeasurement(u), converged, cfg.restarts)


def discord(rho, cfg=DEFAULT_CONFIG):
    """One-way discord D = I - J with the measurement acting on A."""
    mi = mutual_information(rho)
    cc = classical_correlations(rho, cfg)
    d = mi - cc.value
    if d < -DISCORD_CLAMP:
        raise NumericalInconsistencyError(f"discord came out negative ({d:.3e})")
    return DiscordResult(
        mutual_information=mi,
        classical_correlations=cc.value,
        discord=max(d, 0.0),
        optimal_measurement=cc.measurement,
        optimizer_restarts_used=cc.restarts_used,
        converged=cc.converged,
    )


# -- zero-discord set -----------------------------------------------------

def _dephasing_residual(tensor, u):
    t = np.einsum("ja,abcd,ck->jbkd", u.conj().T, tensor, u)
    da = t.shape[0]
    t[np.arange(da), :, np.arange(da), :] = 0
    return float(np.sqrt(np.sum(np.abs(t) ** 2)))


def omega0_residual(rho, cfg=DEFAULT_CONFIG, optimize=False):
    """min over bases of ||rho - sum_j (P_j (x) 1) rho (P_j (x) 1)||_F.

    The eigenbasis of rho_A is exact when its spectrum is nondegenerate.
    Otherwise (or with ``optimize=True``) a multi-start search refines it and
    the residual is an upper bound flagged by ``converged``.
    """
    t = rho.matrix.reshape(rho.dim_a, rho.dim_b, rho.dim_a, rho.dim_b)
    w, anchor = _eigenbasis(partial_trace(rho, "A"))
    residual = _dephasing_residual(t, anchor)
    degenerate = bool(np.any(np.diff(w) < DEGENERACY_GAP))
    if not (degenerate or optimize) or residual == 0.0:
        return Omega0Result(residual, ProjectiveMeasurement(anchor), True)
    value, u, converged = _multistart(lambda u: _dephasing_residual(t, u), rho.dim_a, anchor, cfg)
    if value < residual:
        return Omega0Result(value, ProjectiveMeasurement(u), converged)
    return Omega0Result(residual, ProjectiveMeasurement(anchor), converged)


def make_zero_discord(p, basis, sigmas):
    """sum_j p_j P_j (x) sigma_j, block diagonal in ``basis`` on A."""
    p = np.asarray(p, dtype=float)
    if not isinstance(basis, ProjectiveMeasurement):
        basis = ProjectiveMeasurement(basis)
    dim_a = basis.dim
    if p.shape != (dim_a,):
        raise InvalidParameterError(f"need {dim_a} probabilities, got shape {p.shape}")
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
        raise InvalidParameterError("p must be a probability vector")
    if len(sigmas) != dim_a:
        raise InvalidParameterError(f"need {dim_a} conditional states, got {len(sigmas)}")
    mats = [as_matrix(s) for s in sigmas]
    dim_b = mats[0].shape[0]
    for s in mats:
        if s.shape != (dim_b, dim_b):
            raise InvalidParameterError("conditional states must share one dimension")
        check_state_matrix(s)
    rho = sum(pj * np.kron(proj, s) for pj, proj, s in zip(p, basis.projectors, mats))
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(dim_a, dim_b, rho)
