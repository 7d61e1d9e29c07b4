"""Dense operator substrate: Weyl generators, Hilbert-Schmidt geometry,
state/POVM validation and seeded fixture generators.

Operators are plain ``(d, d)`` complex numpy arrays. Validation returns
the small wrapper types :class:`DensityOp` and :class:`Povm` so that
downstream code can rely on the invariants having been checked.

Phase convention
----------------
``Z = diag(w**k)`` with ``w = exp(2j*pi/d)`` and ``X|k> = |k+1>``. With
these definitions ``Z @ X == w * X @ Z``, equivalently
``X @ Z == w**-1 * Z @ X`` (see :func:`commutation_sign`, which detects
the exponent numerically and returns ``-1``).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import (
    DimensionError,
    IncompletePovmError,
    NotHermitianError,
    NotNormalizedError,
    NotPositiveError,
    UnsupportedDimensionError,
    ValidationError,
)

HERM_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
ROUNDOFF_TOL = 1e-12


def _check_dim(d) -> int:
    if int(d) != d or d < 2:
        raise UnsupportedDimensionError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def as_operator(a, dim: int | None = None) -> np.ndarray:
    """Coerce ``a`` (array or DensityOp) to a square complex array, optionally checking its size."""
    m = np.asarray(getattr(a, "matrix", a), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionError(f"expected a {dim}x{dim} matrix, got {m.shape[0]}x{m.shape[0]}")
    return m


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def as_hermitian(a, dim: int | None = None, tol: float = HERM_TOL) -> np.ndarray:
    m = as_operator(a, dim)
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M^dag| = {defect:.3e})")
    return m


def herm_eigvalsh(a: np.ndarray) -> np.ndarray:
    """Real eigenvalues of the Hermitian part of ``a``, ascending."""
    return np.linalg.eigvalsh(0.5 * (a + a.conj().T))


def min_eig(a: np.ndarray) -> float:
    return float(herm_eigvalsh(a)[0])


@lru_cache(maxsize=None)
def _generators(d: int):
    omega = np.exp(2j * np.pi / d)
    k = np.arange(d)
    Z = np.diag(omega**k)
    X = np.zeros((d, d), dtype=complex)
    X[(k + 1) % d, k] = 1.0
    P = np.zeros((d, d), dtype=complex)
    P[(-k) % d, k] = 1.0
    for m in (X, Z, P):
        m.setflags(write=False)
    return X, Z, P


def generators(d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the generalized Pauli shift ``X``, clock ``Z`` and parity ``P``.

    ``X`` maps basis vector ``k`` to ``k+1 mod d``, ``Z = diag(w**k)`` and
    ``P`` maps ``k`` to ``-k mod d``. All three are unitary. The returned
    arrays are read-only.
    """
    return _generators(_check_dim(d))


def commutation_sign(d: int) -> int:
    """Return ``s`` with ``X @ Z == w**s * Z @ X``, detected numerically."""
    X, Z, _ = generators(d)
    omega = np.exp(2j * np.pi / d)
    for s in (1, -1):
        if np.allclose(X @ Z, omega**s * (Z @ X), atol=1e-14, rtol=0):
            return s
    raise AssertionError("generators satisfy neither commutation convention")


def weyl(d: int, a: int, b: int) -> np.ndarray:
    """Displacement ``X**a @ Z**b`` (exponents taken mod ``d``)."""
    X, Z, _ = generators(d)
    return np.linalg.matrix_power(X, a % d) @ np.linalg.matrix_power(Z, b % d)


def hs_inner(a, b) -> float:
    """Hilbert-Schmidt inner product ``tr(a @ b)`` of two Hermitian operators."""
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # tr(AB) = sum_ij A_ij B_ji
    val = np.sum(a * b.T)
    if abs(val.imag) > HERM_TOL * max(1.0, abs(val.real)):
        raise NotHermitianError(f"tr(AB) has imaginary part {val.imag:.3e}; inputs are not Hermitian")
    return float(val.real)


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


# -- validated wrappers -----------------------------------------------------


@dataclass(frozen=True)
class DensityOp:
    """A validated density operator. Construct through :func:`validate_state`."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Povm:
    """A validated POVM. Construct through :func:`validate_povm`."""

    effects: tuple

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def validate_state(rho) -> DensityOp:
    """Check positivity and unit trace, returning a :class:`DensityOp`.

    If both checks fail a :class:`ValidationError` listing both is raised.
    """
    rho = as_hermitian(rho)
    problems = []
    lam = min_eig(rho)
    if lam < -PSD_TOL:
        problems.append(NotPositiveError(f"state has eigenvalue {lam:.3e} < -{PSD_TOL:g}"))
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        problems.append(NotNormalizedError(f"state has trace {tr!r}"))
    if len(problems) == 1:
        raise problems[0]
    if problems:
        raise ValidationError("; ".join(map(str, problems)), problems)
    return DensityOp(_frozen(rho))


def validate_povm(effects) -> Povm:
    effects = [as_hermitian(e) for e in effects]
    if not effects:
        raise IncompletePovmError("a POVM needs at least one effect")
    d = effects[0].shape[0]
    if any(e.shape != (d, d) for e in effects):
        raise DimensionError("POVM effects have non-uniform dimensions")
    problems = []
    for k, e in enumerate(effects):
        lam = min_eig(e)
        if lam < -PSD_TOL:
            problems.append(NotPositiveError(f"effect {k} has eigenvalue {lam:.3e}"))
    defect = float(np.max(np.abs(sum(effects) - np.eye(d))))
    if defect > TRACE_TOL:
        problems.append(IncompletePovmError(f"effects sum to identity only within {defect:.3e}"))
    if len(problems) == 1:
        raise problems[0]
    if problems:
        raise ValidationError("; ".join(map(str, problems)), problems)
    return Povm(tuple(_frozen(e) for e in effects))


def born_rule(rho: DensityOp, povm: Povm, k: int) -> float:
    """Outcome probability ``tr(M_k rho)``.

    Negative round-off down to ``-1e-12`` is reported as 0.
    """
    if rho.dim != povm.dim:
        raise DimensionError(f"state is {rho.dim}-dimensional, POVM is {povm.dim}-dimensional")
    if not 0 <= k < len(povm):
        raise IndexError(f"outcome {k} out of range for a {len(povm)}-outcome POVM")
    p = hs_inner(povm.effects[k], rho.matrix)
    if -ROUNDOFF_TOL <= p < 0:
        p = 0.0
    return p


# -- Hermitian basis ---------------------------------------------------------


@lru_cache(maxsize=None)
def _herm_basis_array(d: int) -> np.ndarray:
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            basis.append(s)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j / np.sqrt(2)
            a[k, j] = 1j / np.sqrt(2)
            basis.append(a)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        basis.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    out = np.array(basis)
    out.setflags(write=False)
    return out


def herm_basis(d: int) -> np.ndarray:
    """Orthonormal basis of the real space of Hermitian ``d x d`` matrices.

    Generalized Gell-Mann matrices, normalized to unit Hilbert-Schmidt
    norm, preceded by ``I/sqrt(d)``. Returned as a read-only
    ``(d**2, d, d)`` array.
    """
    return _herm_basis_array(_check_dim(d))


def to_coords(ops: np.ndarray) -> np.ndarray:
    """Real coordinates of Hermitian operator(s) in :func:`herm_basis`.

    Accepts a single ``(d, d)`` operator or a stack ``(n, d, d)``.
    """
    ops = np.asarray(ops, dtype=complex)
    d = ops.shape[-1]
    B = herm_basis(d)
    # tr(B_i A) = sum_jk conj(B_i)_jk A_jk for Hermitian B_i
    flat = ops.reshape(ops.shape[:-2] + (d * d,))
    return (flat @ B.reshape(d * d, d * d).conj().T).real


def from_coords(coords: np.ndarray, d: int) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    B = herm_basis(d)
    return (coords @ B.reshape(d * d, d * d)).reshape(coords.shape[:-1] + (d, d))


# -- seeded fixtures ---------------------------------------------------------


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_hermitian(d: int, seed=None) -> np.ndarray:
    """GUE-like random Hermitian matrix with entries of order one."""
    rng = _rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + g.conj().T)


def random_pure_state(d: int, seed=None) -> np.ndarray:
    """Haar-random state vector."""
    rng = _rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def random_state(d: int, seed=None, rank: int | None = None) -> DensityOp:
    """Random density operator ``G G^dag / tr(G G^dag)`` with Ginibre ``G``.

    ``rank`` defaults to ``d`` (full rank almost surely).
    """
    d = _check_dim(d)
    rng = _rng(seed)
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return validate_state(0.5 * (rho + rho.conj().T))


def _inv_sqrt_psd(s: np.ndarray) -> np.ndarray:
    lam, v = np.linalg.eigh(s)
    return (v / np.sqrt(lam)) @ v.conj().T


def random_povm(d: int, m: int, seed=None) -> Povm:
    """Random ``m``-outcome POVM.

    Random PSD operators ``A_k`` are normalized symmetrically as
    ``S^{-1/2} A_k S^{-1/2}`` with ``S = sum_k A_k``.
    """
    d = _check_dim(d)
    if m < 2:
        raise ValueError("a random POVM needs m >= 2 outcomes")
    rng = _rng(seed)
    raw = []
    for _ in range(m):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        raw.append(g @ g.conj().T)
    t = _inv_sqrt_psd(sum(raw))
    effects = [t @ a @ t for a in raw]
    effects = [0.5 * (e + e.conj().T) for e in effects]
    # push the last effect to close the sum exactly
    effects[-1] = effects[-1] + (np.eye(d) - sum(effects))
    return validate_povm(effects)


def computational_povm(d: int) -> Povm:
    """Projective measurement in the eigenbasis of ``Z``."""
    return validate_povm([projector(np.eye(d)[k]) for k in range(_check_dim(d))])
