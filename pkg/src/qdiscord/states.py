"""Dense bipartite density matrices and the elementary operations on them.

The composite basis is ordered A-major: index ``a * dim_b + b`` labels
``|a>|b>``, which is the ordering produced by :func:`numpy.kron`.
Entropies are in bits.
"""
from __future__ import annotations

import json
from dataclasses import InitVar, dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import InvalidDimensionError, NotAStateError, NumericalInconsistencyError

STATE_ATOL = 1e-10
EIGENVALUE_CUTOFF = 1e-12
MI_CLAMP = 1e-9


def check_state_matrix(matrix, atol=STATE_ATOL):
    """Raise :class:`NotAStateError` unless ``matrix`` is Hermitian, unit-trace and PSD."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotAStateError(f"expected a square matrix, got shape {m.shape}")
    herm_err = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if herm_err > atol:
        raise NotAStateError(f"matrix is not Hermitian (max deviation {herm_err:.3e})")
    tr = np.trace(m)
    if abs(tr - 1) > atol:
        raise NotAStateError(f"trace is {tr.real:.12g}, expected 1")
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    if min_eig < -atol:
        raise NotAStateError(
            f"matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})",
            min_eigenvalue=min_eig,
        )


def _check_dim(d, name="dimension"):
    if isinstance(d, (bool, np.bool_)) or int(d) != d or d <= 0:
        raise InvalidDimensionError(f"{name} must be a positive integer, got {d!r}")
    return int(d)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Immutable bipartite state on H_A (x) H_B.

    The stored matrix is a read-only complex copy of the input.  Pass
    ``check=False`` only for matrices already known to be valid.
    """

    dim_a: int
    dim_b: int
    matrix: np.ndarray = field(repr=False)
    check: InitVar[bool] = True

    def __post_init__(self, check):
        dim_a = _check_dim(self.dim_a, "dim_a")
        dim_b = _check_dim(self.dim_b, "dim_b")
        m = np.array(self.matrix, dtype=np.complex128, copy=True)
        d = dim_a * dim_b
        if m.shape != (d, d):
            raise InvalidDimensionError(f"matrix shape {m.shape} does not match dims ({dim_a}, {dim_b})")
        if check:
            check_state_matrix(m)
        m.flags.writeable = False
        object.__setattr__(self, "dim_a", dim_a)
        object.__setattr__(self, "dim_b", dim_b)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.dim_a * self.dim_b

    @property
    def dims(self):
        return (self.dim_a, self.dim_b)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim_a={self.dim_a}, dim_b={self.dim_b})"

    def to_dict(self):
        return {
            "dim_a": self.dim_a,
            "dim_b": self.dim_b,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            dim_a, dim_b = data["dim_a"], data["dim_b"]
            entries = np.asarray(data["matrix"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise NotAStateError(f"malformed state record: {exc}") from exc
        if entries.ndim != 3 or entries.shape[-1] != 2:
            raise NotAStateError("matrix entries must be [re, im] pairs")
        return cls(dim_a, dim_b, entries[..., 0] + 1j * entries[..., 1])


def as_matrix(rho):
    """Return the raw complex matrix behind a state or array-like."""
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=np.complex128)


def maximally_mixed(dim_a, dim_b):
    d = _check_dim(dim_a) * _check_dim(dim_b)
    return DensityMatrix(dim_a, dim_b, np.eye(d) / d)


def pure_state(vector, dim_a, dim_b):
    v = np.asarray(vector, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return DensityMatrix(dim_a, dim_b, np.outer(v, v.conj()))


def bell_state(index=0):
    """One of the four two-qubit Bell states: 0=Phi+, 1=Phi-, 2=Psi+, 3=Psi-."""
    vectors = {
        0: [1, 0, 0, 1],
        1: [1, 0, 0, -1],
        2: [0, 1, 1, 0],
        3: [0, 1, -1, 0],
    }
    return pure_state(vectors[index], 2, 2)


def tensor_product(rho_a, rho_b):
    """Kronecker product of two single-party states, as a bipartite state."""
    a = as_matrix(rho_a)
    b = as_matrix(rho_b)
    for m in (a, b):
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise InvalidDimensionError(f"factor must be a non-empty square matrix, got shape {m.shape}")
        check_state_matrix(m)
    return DensityMatrix(a.shape[0], b.shape[0], np.kron(a, b))


def ptrace(matrix, dims, keep):
    """Partial trace of a raw ``(dA*dB, dA*dB)`` matrix (or stack of them)."""
    dim_a, dim_b = dims
    m = np.asarray(matrix)
    lead = m.shape[:-2]
    t = m.reshape(*lead, dim_a, dim_b, dim_a, dim_b)
    if keep in ("A", "a", 0):
        return np.einsum("...ibjb->...ij", t)
    if keep in ("B", "b", 1):
        return np.einsum("...aiaj->...ij", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_trace(rho, keep="A"):
    """Reduced state on the subsystem named by ``keep``."""
    return ptrace(rho.matrix, rho.dims, keep)


def swap_subsystems(rho):
    """The same state with the roles of A and B exchanged."""
    t = rho.matrix.reshape(rho.dim_a, rho.dim_b, rho.dim_a, rho.dim_b)
    swapped = t.transpose(1, 0, 3, 2).reshape(rho.dim, rho.dim)
    return DensityMatrix(rho.dim_b, rho.dim_a, swapped, check=False)


def entropy_from_eigenvalues(eigenvalues):
    p = np.asarray(eigenvalues, dtype=float)
    p = p[p > EIGENVALUE_CUTOFF]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho):
    """Von Neumann entropy in bits. Eigenvalues below 1e-12 contribute nothing."""
    m = as_matrix(rho)
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if w[0] < -STATE_ATOL:
        raise NotAStateError(f"negative eigenvalue {w[0]:.3e}", min_eigenvalue=float(w[0]))
    return max(entropy_from_eigenvalues(w), 0.0)


def mutual_information(rho):
    """S(rho_A) + S(rho_B) - S(rho), in bits."""
    value = (
        von_neumann_entropy(partial_trace(rho, "A"))
        + von_neumann_entropy(partial_trace(rho, "B"))
        - von_neumann_entropy(rho)
    )
    if value < -MI_CLAMP:
        raise NumericalInconsistencyError(f"mutual information came out negative ({value:.3e})")
    return max(value, 0.0)


def trace_distance(x, y):
    diff = as_matrix(x) - as_matrix(y)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def save_state(rho, path):
    Path(path).write_text(json.dumps(rho.to_dict()))


def load_state(path):
    return DensityMatrix.from_dict(json.loads(Path(path).read_text()))
