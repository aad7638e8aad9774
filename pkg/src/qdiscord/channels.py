"""CPTP channels, their spectral decomposition, and iterated (Markovian) dynamics.

Superoperators use column stacking: ``vec(X) = X.reshape(-1, order="F")``,
so ``rho -> K rho K^dag`` becomes ``conj(K) (x) K``.  Left and right
eigenoperators are normalized to be biorthogonal under Tr[X^dag Y].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse.csgraph import connected_components

from .discord import DEFAULT_CONFIG, commutator_norms, discord
from .exceptions import (
    InvalidParameterError,
    NoDecoherenceError,
    NonUniqueSteadyStateError,
    NotAStateError,
    UnsupportedMapError,
)
from .rng import random_unitary
from .states import DensityMatrix, as_matrix, check_state_matrix

CHANNEL_ATOL = 1e-10
CLUSTER_TOL = 1e-8
CROSSING_THRESHOLD = 1e-8
MAX_CONDITION = 1e10
UNIT_CIRCLE_TOL = 1e-10

CHANNEL_KINDS = ("global_depolarizing", "local_depolarizing", "local_dephasing", "amplitude_damping")
_PARAM_NAMES = {
    "global_depolarizing": "p",
    "local_depolarizing": "p",
    "local_dephasing": "q",
    "amplitude_damping": "gamma",
}


def vec(x):
    """Column-stacking vectorization, applied to the last two axes."""
    x = np.asarray(x)
    return np.swapaxes(x, -1, -2).reshape(*x.shape[:-2], -1)


def unvec(v, d):
    v = np.asarray(v)
    return np.swapaxes(v.reshape(*v.shape[:-1], d, d), -1, -2)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A channel on H_A (x) H_B given by Kraus operators.

    Construction checks trace preservation and Choi positivity.
    """

    dim_a: int
    dim_b: int
    kraus: tuple
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.dim_a * self.dim_b
        ks = tuple(np.array(k, dtype=np.complex128) for k in self.kraus)
        if not ks or any(k.shape != (d, d) for k in ks):
            raise InvalidParameterError(f"Kraus operators must be {d}x{d}")
        for k in ks:
            k.flags.writeable = False
        object.__setattr__(self, "kraus", ks)
        tp = sum(k.conj().T @ k for k in ks)
        err = np.max(np.abs(tp - np.eye(d)))
        if err > CHANNEL_ATOL:
            raise InvalidParameterError(f"channel is not trace preserving (deviation {err:.3e})")
        min_eig = float(np.linalg.eigvalsh(self.choi)[0])
        if min_eig < -CHANNEL_ATOL:
            raise InvalidParameterError(f"channel is not completely positive (Choi eigenvalue {min_eig:.3e})")

    @property
    def dim(self):
        return self.dim_a * self.dim_b

    @property
    def dims(self):
        return (self.dim_a, self.dim_b)

    @cached_property
    def superop(self):
        s = sum(np.kron(k.conj(), k) for k in self.kraus)
        s.flags.writeable = False
        return s

    @cached_property
    def choi(self):
        """sum_ij |i><j| (x) Lambda(|i><j|), built from the superoperator."""
        d = self.dim
        # column (j*d + i) of the superop is vec(Lambda(|i><j|))
        images = unvec(self.superop.T, d).reshape(d, d, d, d)  # [j, i, a, b]
        return images.transpose(1, 2, 0, 3).reshape(d * d, d * d)

    def apply(self, rho):
        m = as_matrix(rho)
        return sum(k @ m @ k.conj().T for k in self.kraus)

    def __call__(self, rho):
        out = self.apply(rho)
        return DensityMatrix(self.dim_a, self.dim_b, 0.5 * (out + out.conj().T))

    def to_descriptor(self):
        return {"kind": self.kind, "params": dict(self.params), "dims": [self.dim_a, self.dim_b]}


def _weyl(d):
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(d) for b in range(d)]


def _depolarizing_kraus(d, p):
    ops = _weyl(d)
    return [np.sqrt(1 - p + p / d**2) * ops[0]] + [np.sqrt(p) / d * w for w in ops[1:]]


def _on_a(kraus_a, dim_b):
    return [np.kron(k, np.eye(dim_b)) for k in kraus_a]


def _strength(kind, params):
    name = _PARAM_NAMES[kind]
    if isinstance(params, dict):
        if name not in params:
            raise InvalidParameterError(f"{kind} needs parameter {name!r}")
        value = params[name]
    else:
        value = params
    value = float(value)
    if not 0 <= value <= 1:
        raise InvalidParameterError(f"{kind}: {name} must lie in [0, 1], got {value}")
    return name, value


def make_channel(kind, params, dims):
    """Built-in channels.  Local kinds act on A and as the identity on B.

    global_depolarizing(p):  rho -> (1-p) rho + p 1/d
    local_depolarizing(p):   same on A alone
    local_dephasing(q):      Kraus {sqrt(1-q) 1, sqrt(q) Z} on A (Z = sigma_z for qubits,
                             the clock matrix otherwise)
    amplitude_damping(gamma): every excited level of A decays to |0> with probability gamma
    """
    kind = kind.replace("-", "_")
    if kind not in CHANNEL_KINDS:
        raise InvalidParameterError(f"unknown channel kind {kind!r}; expected one of {CHANNEL_KINDS}")
    dim_a, dim_b = (int(x) for x in dims)
    name, s = _strength(kind, params)
    if kind == "global_depolarizing":
        kraus = _depolarizing_kraus(dim_a * dim_b, s)
    elif kind == "local_depolarizing":
        kraus = _on_a(_depolarizing_kraus(dim_a, s), dim_b)
    elif kind == "local_dephasing":
        clock = _weyl(dim_a)[1]
        kraus = _on_a([np.sqrt(1 - s) * np.eye(dim_a), np.sqrt(s) * clock], dim_b)
    else:
        k0 = np.diag([1.0] + [np.sqrt(1 - s)] * (dim_a - 1)).astype(complex)
        ks = [k0]
        for j in range(1, dim_a):
            kj = np.zeros((dim_a, dim_a), dtype=complex)
            kj[0, j] = np.sqrt(s)
            ks.append(kj)
        kraus = _on_a(ks, dim_b)
    return QuantumChannel(dim_a, dim_b, tuple(kraus), kind, {name: s})


def replacement_channel(target, p):
    """rho -> (1-p) rho + p Tr[rho] target.  Its steady state is ``target``."""
    if not 0 < p <= 1:
        raise InvalidParameterError(f"p must lie in (0, 1], got {p}")
    d = target.dim
    w, v = np.linalg.eigh(target.matrix)
    kraus = [np.sqrt(1 - p) * np.eye(d)]
    for wi, vi in zip(w, v.T):
        if wi <= 0:
            continue
        for k in range(d):
            op = np.zeros((d, d), dtype=complex)
            op[:, k] = np.sqrt(p * wi) * vi
            kraus.append(op)
    return QuantumChannel(target.dim_a, target.dim_b, tuple(kraus), "replacement",
                          {"p": float(p), "target": target.to_dict()})


def random_channel(dims, n_kraus=2, random_state=None):
    """Kraus operators cut from a Haar-random isometry."""
    dim_a, dim_b = dims
    d = dim_a * dim_b
    u = random_unitary(d * n_kraus, random_state)[:, :d]
    return QuantumChannel(dim_a, dim_b, tuple(u[i * d:(i + 1) * d] for i in range(n_kraus)), "random",
                          {"n_kraus": n_kraus})


def channel_from_descriptor(desc):
    kind = desc["kind"].replace("-", "_")
    dims = desc["dims"]
    if kind == "replacement":
        params = desc["params"]
        return replacement_channel(DensityMatrix.from_dict(params["target"]), params["p"])
    return make_channel(kind, desc.get("params", {}), dims)


def cluster_values(values, tol=CLUSTER_TOL):
    """Labels grouping complex values whose chained distance is below ``tol``."""
    z = np.asarray(values)
    close = np.abs(z[:, None] - z[None, :]) < tol
    _, labels = connected_components(close, directed=False)
    return labels


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    dims: tuple
    eigenvalues: np.ndarray
    right_ops: np.ndarray  # (d**2, d, d), |mu_i)
    left_ops: np.ndarray   # (d**2, d, d), (nu_i|
    labels: np.ndarray     # cluster index of each eigenvalue
    condition_number: float
    diagonalizable: bool = True

    @property
    def dim(self):
        return self.dims[0] * self.dims[1]

    @property
    def n_distinct(self):
        return int(self.labels.max()) + 1

    @property
    def distinct_eigenvalues(self):
        return np.array([self.eigenvalues[self.labels == c].mean() for c in range(self.n_distinct)])

    @property
    def no_decoherence(self):
        """True when every eigenvalue lies on the unit circle (unitary dynamics)."""
        return bool(np.all(np.abs(self.eigenvalues) >= 1 - UNIT_CIRCLE_TOL))

    @property
    def n_distinct_products(self):
        """Number of distinct values lambda_i lambda_j over all pairs, equal pairs included."""
        c = self.distinct_eigenvalues
        i, j = np.triu_indices(len(c))
        return int(cluster_values(c[i] * c[j]).max()) + 1

    def reconstruct(self):
        r = vec(self.right_ops).T
        left = vec(self.left_ops).conj()
        return (r * self.eigenvalues) @ left

    def coefficients(self, rho):
        """rho_i = (nu_i | rho)."""
        return vec(self.left_ops).conj() @ vec(as_matrix(rho))


def spectral_decompose(ch):
    """Diagonalize the superoperator into eigenvalues and biorthogonal eigenoperators.

    Raises :class:`UnsupportedMapError` when the eigenvector matrix is too
    ill-conditioned for the map to be treated as diagonalizable.
    """
    d = ch.dim
    w, r = np.linalg.eig(ch.superop)
    cond = float(np.linalg.cond(r))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise UnsupportedMapError(
            f"superoperator is not diagonalizable to working precision "
            f"(eigenvector condition number {cond:.3e})",
            condition_number=cond,
        )
    left = np.linalg.inv(r)
    right_ops = unvec(r.T, d)
    left_ops = unvec(left.conj(), d)
    for a in (w, right_ops, left_ops):
        a.flags.writeable = False
    return SpectralDecomposition(tuple(ch.dims), w, right_ops, left_ops, cluster_values(w), cond)


def crossing_bound(sd):
    """Maximum number of C0 entries: n(n-1)/2 - 1 for n distinct eigenvalues, floored at 0."""
    n = sd.n_distinct
    return max(n * (n - 1) // 2 - 1, 0)


def product_crossing_bound(sd):
    """Alternative count: (number of distinct eigenvalue products) - 1."""
    return max(sd.n_distinct_products - 1, 0)


def _state(matrix, dims):
    return DensityMatrix(dims[0], dims[1], 0.5 * (matrix + matrix.conj().T))


def evolve(ch, rho, n):
    """Apply the channel ``n`` times."""
    if n < 0:
        raise InvalidParameterError("n must be >= 0")
    v = vec(as_matrix(rho))
    s = ch.superop
    for _ in range(n):
        v = s @ v
    return _state(unvec(v, ch.dim), ch.dims)


def evolve_spectral(sd, rho, n):
    """sum_i rho_i lambda_i**n |mu_i)."""
    if n < 0:
        raise InvalidParameterError("n must be >= 0")
    coeffs = sd.coefficients(rho) * sd.eigenvalues ** n
    return _state(np.tensordot(coeffs, sd.right_ops, axes=1), sd.dims)


def _unit_eigenspace(sd):
    if sd.no_decoherence:
        raise NoDecoherenceError("all eigenvalues have unit modulus; the map describes no decoherence")
    return np.abs(sd.eigenvalues - 1) < CLUSTER_TOL


def steady_state(sd):
    """The unique fixed point, rescaled to unit trace."""
    mask = _unit_eigenspace(sd)
    mult = int(mask.sum())
    if mult != 1:
        raise NonUniqueSteadyStateError(f"eigenvalue 1 has multiplicity {mult}", multiplicity=mult)
    mu = sd.right_ops[mask][0]
    tr = np.trace(mu)
    if abs(tr) < CHANNEL_ATOL:
        raise NotAStateError("fixed-point eigenoperator is traceless")
    return _state(mu / tr, sd.dims)


def asymptotic_state(sd, rho):
    """Projection of rho onto the eigenvalue-1 eigenspace.

    Equals the long-time limit when no other eigenvalue lies on the unit
    circle, and the time-averaged limit otherwise.
    """
    mask = _unit_eigenspace(sd)
    coeffs = sd.coefficients(rho)[mask]
    return _state(np.tensordot(coeffs, sd.right_ops[mask], axes=1), sd.dims)


def steady_state_in_c0(sd, tol=1e-10):
    return float(commutator_norms(steady_state(sd).matrix, sd.dims)) <= tol


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Iterates rho_n for n = 0..n_max, with commutator norms and C0 runs.

    ``crossings`` lists every maximal run of steps whose norm is below the
    threshold as inclusive ``(enter_step, exit_step)`` pairs.
    """

    dims: tuple
    matrices: np.ndarray
    commutator_norms: np.ndarray
    crossings: list
    threshold: float
    discord_values: np.ndarray | None = None

    @property
    def times(self):
        return np.arange(len(self.matrices))

    @property
    def n_max(self):
        return len(self.matrices) - 1

    @property
    def states(self):
        return [DensityMatrix(self.dims[0], self.dims[1], m) for m in self.matrices]

    @property
    def tail(self):
        """The run reaching the last step, if any."""
        if self.crossings and self.crossings[-1][1] == self.n_max:
            return self.crossings[-1]
        return None

    def entries(self, include_tail=True):
        """Number of times the trajectory enters the below-threshold region from above.

        Runs starting at step 0 are not entries.  With ``include_tail=False`` a
        run still open at the last step is treated as asymptotic approach and
        not counted.
        """
        count = 0
        for enter, leave in self.crossings:
            if enter == 0:
                continue
            if not include_tail and leave == self.n_max:
                continue
            count += 1
        return count

    def to_csv(self, path):
        with open(path, "w") as fh:
            has_discord = self.discord_values is not None
            fh.write("step,commutator_norm," + ("discord," if has_discord else "") + "in_c0\n")
            for i, norm in enumerate(self.commutator_norms):
                cols = [str(i), repr(float(norm))]
                if has_discord:
                    cols.append(repr(float(self.discord_values[i])))
                cols.append(str(int(norm < self.threshold)))
                fh.write(",".join(cols) + "\n")


def below_threshold_runs(values, threshold):
    below = np.concatenate([[False], np.asarray(values) < threshold, [False]])
    edges = np.flatnonzero(np.diff(below.astype(np.int8)))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def run_trajectory(ch, rho0, n_max, c0_threshold=CROSSING_THRESHOLD, compute_discord=False,
                   discord_config=DEFAULT_CONFIG):
    """Iterate the channel and record commutator norms and C0 runs."""
    if n_max < 1:
        raise InvalidParameterError("n_max must be >= 1")
    check_state_matrix(as_matrix(rho0))
    d = ch.dim
    s = ch.superop
    vecs = np.empty((n_max + 1, d * d), dtype=np.complex128)
    vecs[0] = vec(as_matrix(rho0))
    for n in range(n_max):
        vecs[n + 1] = s @ vecs[n]
    mats = unvec(vecs, d)
    mats = 0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2)))
    mats.flags.writeable = False
    norms = commutator_norms(mats, ch.dims)
    discords = None
    if compute_discord:
        discords = np.array([
            discord(DensityMatrix(ch.dim_a, ch.dim_b, m), discord_config).discord for m in mats
        ])
    return Trajectory(tuple(ch.dims), mats, norms, below_threshold_runs(norms, c0_threshold),
                      c0_threshold, discords)
