"""SU(d) generator bases, structure constants and Bloch coordinates.

A bipartite state is written as

    rho = 1/(dA dB) [ 1 + sum_i tA_i g_i (x) 1 + sum_k tB_k 1 (x) g_k
                        + sum_hk beta_hk g_h (x) g_k ]

with generators normalized as Tr[g_i g_j] = 2 delta_ij.  Under this scaling
the reduced state is rho_A = (1/dA)(1 + sum_i tA_i g_i), so

    tA_i    = (dA / 2)      Tr[rho_A g_i]
    tB_k    = (dB / 2)      Tr[rho_B g_k]
    beta_hk = (dA dB / 4)   Tr[rho (g_h (x) g_k)]

and the commutator with the A-marginal is

    [rho, rho_A (x) 1] = 2i / (dA^2 dB) * sum_mk c_mk g_m (x) g_k,
    c_mk = sum_hl beta_hk tA_l f_hlm.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import InvalidDimensionError, NotAStateError, NumericalInconsistencyError
from .states import STATE_ATOL, DensityMatrix, check_state_matrix

IMAG_CUTOFF = 1e-12


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    dim: int
    generators: np.ndarray  # (dim**2 - 1, dim, dim)

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)


@dataclass(frozen=True, eq=False)
class StructureConstants:
    dim: int
    tensor: np.ndarray  # real, (n, n, n) with n = dim**2 - 1


@dataclass(frozen=True, eq=False)
class BlochRepresentation:
    tau_a: np.ndarray
    tau_b: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        tau_a = np.asarray(self.tau_a, dtype=float)
        tau_b = np.asarray(self.tau_b, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (tau_a.size, tau_b.size):
            raise InvalidDimensionError(
                f"beta shape {beta.shape} inconsistent with tau lengths ({tau_a.size}, {tau_b.size})"
            )
        for name, arr in (("tau_a", tau_a), ("tau_b", tau_b), ("beta", beta)):
            object.__setattr__(self, name, _readonly(arr))
        _dim_from_length(tau_a.size)
        _dim_from_length(tau_b.size)

    @property
    def dim_a(self):
        return _dim_from_length(self.tau_a.size)

    @property
    def dim_b(self):
        return _dim_from_length(self.tau_b.size)

    def to_dict(self):
        return {
            "dim_a": self.dim_a,
            "dim_b": self.dim_b,
            "tau_a": self.tau_a.tolist(),
            "tau_b": self.tau_b.tolist(),
            "beta": self.beta.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        n_a, n_b = data["dim_a"] ** 2 - 1, data["dim_b"] ** 2 - 1
        return cls(data["tau_a"], data["tau_b"], np.reshape(data["beta"], (n_a, n_b)))


def _dim_from_length(n):
    d = int(round(np.sqrt(n + 1)))
    if d < 2 or d * d - 1 != n:
        raise InvalidDimensionError(f"coefficient vector of length {n} is not d**2 - 1 for any d >= 2")
    return d


@lru_cache(maxsize=None)
def build_generator_basis(d):
    """Generalized Gell-Mann matrices for SU(d), normalized to Tr[g_i g_j] = 2 delta_ij.

    Ordering extends the Pauli and Gell-Mann conventions: for each column
    index k = 1..d-1, the symmetric and antisymmetric pairs (j, k) for j < k,
    followed by the k-th diagonal generator.  For d = 2 this yields
    (sigma_x, sigma_y, sigma_z); for d = 3 the standard lambda_1..lambda_8.
    """
    if isinstance(d, bool) or int(d) != d or d < 2:
        raise InvalidDimensionError(f"SU(d) basis needs an integer d >= 2, got {d!r}")
    d = int(d)
    gens = []
    for k in range(1, d):
        for j in range(k):
            sym = np.zeros((d, d), dtype=np.complex128)
            sym[j, k] = sym[k, j] = 1
            anti = np.zeros((d, d), dtype=np.complex128)
            anti[j, k] = -1j
            anti[k, j] = 1j
            gens.extend((sym, anti))
        diag = np.zeros(d)
        diag[:k] = 1
        diag[k] = -k
        gens.append(np.diag(np.sqrt(2.0 / (k * (k + 1))) * diag).astype(np.complex128))
    return GeneratorBasis(d, _readonly(np.array(gens)))


def _real_or_raise(values, what):
    imag = np.max(np.abs(values.imag)) if values.size else 0.0
    if imag > IMAG_CUTOFF:
        raise NumericalInconsistencyError(f"{what} has imaginary residue {imag:.3e}")
    return np.ascontiguousarray(values.real)


def _structure_tensor(basis):
    g = basis.generators
    prod = np.einsum("iab,jbc->ijac", g, g)
    comm = prod - prod.transpose(1, 0, 2, 3)
    return _real_or_raise(np.einsum("ijab,kba->ijk", comm, g) / 4j, "structure constants")


@lru_cache(maxsize=None)
def _cached_structure_constants(d):
    return StructureConstants(d, _readonly(_structure_tensor(build_generator_basis(d))))


def structure_constants(basis):
    """f_ijk = Tr([g_i, g_j] g_k) / (4i), dense, shape (d**2-1,)*3.

    Memory grows as d**6; intended for d <= 8.
    """
    if basis is build_generator_basis(basis.dim):
        return _cached_structure_constants(basis.dim)
    return StructureConstants(basis.dim, _readonly(_structure_tensor(basis)))


def _resolve_basis(basis, d, label):
    if basis is None:
        return build_generator_basis(d)
    if basis.dim != d:
        raise InvalidDimensionError(f"basis for subsystem {label} has dim {basis.dim}, state has {d}")
    return basis


def to_bloch(rho, basis_a=None, basis_b=None):
    """Bloch coordinates (tau_a, tau_b, beta) of a bipartite state."""
    ga = _resolve_basis(basis_a, rho.dim_a, "A").generators
    gb = _resolve_basis(basis_b, rho.dim_b, "B").generators
    da, db = rho.dim_a, rho.dim_b
    t = rho.matrix.reshape(da, db, da, db)
    rho_a = np.einsum("ibjb->ij", t)
    rho_b = np.einsum("aiaj->ij", t)
    tau_a = da / 2 * np.einsum("ij,nji->n", rho_a, ga)
    tau_b = db / 2 * np.einsum("ij,nji->n", rho_b, gb)
    beta = da * db / 4 * np.einsum("abcd,hca,kdb->hk", t, ga, gb)
    return BlochRepresentation(
        _real_or_raise(tau_a, "tau_a"),
        _real_or_raise(tau_b, "tau_b"),
        _real_or_raise(beta, "beta"),
    )


def bloch_matrix(b):
    """Operator assembled from Bloch coordinates, without any state checks."""
    da, db = b.dim_a, b.dim_b
    ga = build_generator_basis(da).generators
    gb = build_generator_basis(db).generators
    eye_a, eye_b = np.eye(da), np.eye(db)
    m = np.eye(da * db, dtype=np.complex128)
    m += np.kron(np.einsum("i,iab->ab", b.tau_a, ga), eye_b)
    m += np.kron(eye_a, np.einsum("k,kab->ab", b.tau_b, gb))
    m += np.einsum("hk,hac,kbd->abcd", b.beta, ga, gb).reshape(da * db, da * db)
    return m / (da * db)


def from_bloch(b, dim_a=None, dim_b=None):
    """Rebuild the state; raises :class:`NotAStateError` if it is not PSD."""
    if (dim_a is not None and dim_a != b.dim_a) or (dim_b is not None and dim_b != b.dim_b):
        raise InvalidDimensionError(
            f"coefficients describe dims ({b.dim_a}, {b.dim_b}), requested ({dim_a}, {dim_b})"
        )
    m = bloch_matrix(b)
    min_eig = float(np.linalg.eigvalsh(m)[0])
    if min_eig < -STATE_ATOL:
        raise NotAStateError(
            f"coefficients do not describe a positive operator (min eigenvalue {min_eig:.3e})",
            min_eigenvalue=min_eig,
        )
    check_state_matrix(m)
    return DensityMatrix(b.dim_a, b.dim_b, m, check=False)


def commutator_bloch(b):
    """c[m, k] = sum_{h,l} beta[h, k] tau_a[l] f[h, l, m]."""
    f = _cached_structure_constants(b.dim_a).tensor
    return np.einsum("hk,l,hlm->mk", b.beta, b.tau_a, f)


def commutator_operator(b):
    """[rho, rho_A (x) 1] rebuilt from :func:`commutator_bloch` coefficients."""
    da, db = b.dim_a, b.dim_b
    ga = build_generator_basis(da).generators
    gb = build_generator_basis(db).generators
    c = commutator_bloch(b)
    op = np.einsum("mk,mac,kbd->abcd", c, ga, gb).reshape(da * db, da * db)
    return 2j / (da * da * db) * op


def c0_residuals(b):
    """Residuals of the C0 constraints, indexed [k, m].

    All entries vanish exactly when the state commutes with rho_A (x) 1.
    The Frobenius norm of the commutator equals 4 / (dA^2 dB) times the
    Frobenius norm of this matrix.
    """
    return commutator_bloch(b).T
