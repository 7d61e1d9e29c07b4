"""Algebra on representation space.

For a dual pair ``(F, E)`` the representation ``A -> <F(alpha), A>`` is an
isometric algebra isomorphism once the function space is equipped with

* the two-point kernel ``theta(a, b) = <E(a), E(b)>`` as inner product, and
* the three-point kernel ``f(a, b, c) = <F(a), E(b) E(c)>`` as product

    (A * B)(a) = sum_{b,c} w_b w_c A(b) B(c) f(a, b, c).

Products are complex-valued in general since ``AB`` need not be Hermitian.
The effect-side algebra is the same construction with the roles of ``F``
and ``E`` swapped, i.e. ``star_kernel(E, F)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, DualityError, LabelMismatchError
from .frames import DUAL_TOL, Frame, RepFunction, is_dual_pair, reconstruct, represent
from .operator_space import projector, random_pure_state

PURE_TOL = 1e-9
VALIDITY_TOL = 1e-10
MAX_MATERIALIZED = 256
N_RANDOM_PROBES = 200


@dataclass(frozen=True, eq=False)
class Kernel2:
    frame_id: str
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class Kernel3:
    """Three-point kernel of a dual pair.

    ``tensor`` is ``None`` in lazy mode, where products are evaluated
    through the operators instead.
    """

    frame: Frame
    dual: Frame
    tensor: np.ndarray | None

    @property
    def frame_id(self) -> str:
        return self.frame.fingerprint

    @property
    def lazy(self) -> bool:
        return self.tensor is None

    def entry(self, a: int, b: int, c: int) -> complex:
        if self.tensor is not None:
            return complex(self.tensor[a, b, c])
        prod = self.dual.elements[b] @ self.dual.elements[c]
        return complex(np.sum(self.frame.elements[a] * prod.T))


def theta_kernel(dual: Frame) -> Kernel2:
    """Gram matrix ``<E(a), E(b)>`` of the dual elements."""
    c = dual.coords
    g = c @ c.T
    g = 0.5 * (g + g.T)
    g.setflags(write=False)
    return Kernel2(dual.fingerprint, g)


def star_kernel(frame: Frame, dual: Frame, lazy: bool = False) -> Kernel3:
    """Build ``f(a, b, c) = tr(F(a) E(b) E(c))`` for a dual pair.

    The full tensor has ``n**3`` complex entries and is only materialized
    for ``n <= 256``; larger frames need ``lazy=True``.
    """
    check = is_dual_pair(frame, dual)
    if not check:
        raise DualityError(f"star kernel needs a dual pair (residual {check.residual:.3e})")
    n, d = len(frame), frame.dim
    if lazy:
        return Kernel3(frame, dual, None)
    if n > MAX_MATERIALIZED:
        raise MemoryError(
            f"{n}**3 kernel entries exceed the materialization guard ({MAX_MATERIALIZED} labels); "
            "use star_kernel(..., lazy=True) for on-the-fly evaluation"
        )
    ee = np.einsum("bij,cjk->bcik", dual.elements, dual.elements).reshape(n * n, d * d)
    ft = frame.elements.transpose(0, 2, 1).reshape(n, d * d)
    tensor = (ft @ ee.T).reshape(n, n, n)
    tensor.setflags(write=False)
    return Kernel3(frame, dual, tensor)


def _vals(rep, n: int) -> np.ndarray:
    v = rep.values if isinstance(rep, RepFunction) else np.asarray(rep)
    if v.shape != (n,):
        raise DimensionError(f"function has {v.size} values, kernel has {n} labels")
    return v


def frame_ip(a, b, theta: Kernel2, weights) -> float:
    """Kernel inner product ``sum w_a w_b A(a) B(b) theta(a, b)``."""
    w = np.asarray(weights, dtype=float)
    n = theta.matrix.shape[0]
    if w.shape != (n,):
        raise DimensionError("weights do not match kernel size")
    wa = w * _vals(a, n)
    wb = w * _vals(b, n)
    return float(wa @ theta.matrix @ wb)


def star_product(a, b, f: Kernel3, weights) -> np.ndarray:
    """``(A * B)(a) = sum_{b,c} w_b w_c A(b) B(c) f(a, b, c)`` as a complex array."""
    w = np.asarray(weights, dtype=float)
    n = len(f.frame)
    if w.shape != (n,):
        raise DimensionError("weights do not match kernel size")
    wa = w * _vals(a, n)
    wb = w * _vals(b, n)
    if f.tensor is not None:
        return np.einsum("abc,b,c->a", f.tensor, wa, wb)
    # reassociated: sum_b w A(b) E(b) and sum_c w B(c) E(c) first
    op_a = np.tensordot(wa, f.dual.elements, axes=1)
    op_b = np.tensordot(wb, f.dual.elements, axes=1)
    return np.einsum("nij,ji->n", f.frame.elements, op_a @ op_b)


def weighted_sum(rep, weights) -> float:
    w = np.asarray(weights, dtype=float)
    return float(np.sum(w * _vals(rep, w.size)))


def is_pure_state_rep(rho, f: Kernel3, weights, tol: float = PURE_TOL) -> bool:
    """Idempotent (``rho * rho == rho``) and normalized."""
    v = _vals(rho, len(f.frame))
    sq = star_product(v, v, f, weights)
    if np.max(np.abs(sq - v)) > tol:
        return False
    return abs(weighted_sum(v, weights) - 1.0) <= VALIDITY_TOL


def identity_element(frame: Frame) -> RepFunction:
    """Representation of the identity operator, ``<F(alpha), I>``."""
    return represent(frame, np.eye(frame.dim))


def pure_state_probes(frame: Frame, operators=(), seed=0, n_random: int = N_RANDOM_PROBES) -> list[RepFunction]:
    """Pure-state representations used to test validity conditions.

    Contains every eigenprojector of the given Hermitian ``operators`` plus
    ``n_random`` Haar-random pure states.
    """
    d = frame.dim
    rng = np.random.default_rng(seed)
    probes = []
    for op in operators:
        _, vecs = np.linalg.eigh(0.5 * (op + op.conj().T))
        probes.extend(represent(frame, projector(vecs[:, i])) for i in range(d))
    probes.extend(represent(frame, projector(random_pure_state(d, rng))) for _ in range(n_random))
    return probes


def _check_probes(probes):
    if probes is not None and len(probes) == 0:
        raise ValueError("validity check needs a non-empty probe set")


def validate_state_rep(rho, theta: Kernel2, f: Kernel3, weights, probes=None,
                       tol: float = VALIDITY_TOL) -> bool:
    """Internal state condition: ``<rho, rho_pure>_theta >= 0`` for all probe
    pure states and unit weighted sum."""
    _check_probes(probes)
    if theta.frame_id != f.dual.fingerprint:
        raise LabelMismatchError("theta kernel was not built from this pair's dual")
    v = _vals(rho, len(f.frame))
    if abs(weighted_sum(v, weights) - 1.0) > tol:
        return False
    if probes is None:
        probes = pure_state_probes(f.frame, [reconstruct(f.dual, v)])
    return all(frame_ip(v, p, theta, weights) >= -tol for p in probes)


def validate_effect_rep(m_reps, f: Kernel3, weights, via: str = "E", theta: Kernel2 | None = None,
                        probes=None, tol: float = VALIDITY_TOL) -> bool:
    """Internal measurement condition.

    ``via="E"``: effects are representations through the dual; positivity
    is tested with the plain weighted pointwise pairing and the effects must
    sum to the identity element of the swapped algebra, ``<E(alpha), I>``.
    ``via="F"``: positivity uses the theta inner product and the sum must
    be ``<F(alpha), I>``.
    """
    _check_probes(probes)
    if via not in ("E", "F"):
        raise ValueError("via must be 'E' or 'F'")
    frame, dual = f.frame, f.dual
    n = len(frame)
    vals = [_vals(m, n) for m in m_reps]
    if not vals:
        return False
    w = np.asarray(weights, dtype=float)
    if via == "E":
        ops = [reconstruct(frame, v) for v in vals]
        ident = identity_element(dual).values
    else:
        theta = theta or theta_kernel(dual)
        ops = [reconstruct(dual, v) for v in vals]
        ident = identity_element(frame).values
    if np.max(np.abs(np.sum(vals, axis=0) - ident)) > tol:
        return False
    if probes is None:
        probes = pure_state_probes(frame, ops)
    for v in vals:
        for p in probes:
            pair = float(np.sum(w * v * p.values)) if via == "E" else frame_ip(v, p, theta, w)
            if pair < -tol:
                return False
    return True
