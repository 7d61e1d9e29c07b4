"""Frames of Hermitian operators: construction, frame operator, duals and
the representation / reconstruction maps.

A :class:`Frame` is a finite family ``F(alpha)`` of Hermitian ``d x d``
operators with a positive weight per label (a discrete measure). All
sums over labels are weighted, e.g. the frame operator is

    S(A) = sum_alpha w_alpha <F(alpha), A> F(alpha)

and ``E`` is dual to ``F`` when ``sum_alpha w_alpha <F(alpha), A> E(alpha) = A``
for every Hermitian ``A``.

Internally operators are handled through their real coordinates in
:func:`qframe.operator_space.herm_basis`, which turns frame algebra into
ordinary ``n x d**2`` real linear algebra.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .exceptions import (
    ConventionError,
    DimensionError,
    LabelMismatchError,
    NotAFrameError,
    UnsupportedDimensionError,
)
from .operator_space import (
    HERM_TOL,
    PSD_TOL,
    as_operator,
    from_coords,
    generators,
    herm_basis,
    hermiticity_defect,
    projector,
    random_hermitian,
    random_pure_state,
    to_coords,
    weyl,
)

DUAL_TOL = 1e-10
COVARIANCE_TOL = 1e-10
SPAN_RTOL = 1e-12

KINDS = ("wootters", "leonhardt", "custom")
CONVENTIONS = ("raw", "state_normalized", "standard")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Frame:
    """Weighted family of Hermitian operators indexed by opaque labels.

    Parameters
    ----------
    elements : array_like, shape (n, d, d)
    labels : sequence of tuples, optional
        Defaults to ``(0,), (1,), ...``.
    weights : array_like, shape (n,), optional
        Positive measure per label, default all ones.
    kind, convention : str
        Provenance tags carried through serialization.
    check : bool
        Verify that the family spans the Hermitian operators.
    """

    elements: np.ndarray
    labels: tuple = None
    weights: np.ndarray = None
    kind: str = "custom"
    convention: str = "raw"
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        el = np.array(self.elements, dtype=complex)
        if el.ndim != 3 or el.shape[1] != el.shape[2]:
            raise DimensionError(f"frame elements must have shape (n, d, d), got {el.shape}")
        n, d = el.shape[0], el.shape[1]
        labels = self.labels
        if labels is None:
            labels = [(i,) for i in range(n)]
        labels = tuple(tuple(int(x) for x in lab) for lab in labels)
        weights = np.ones(n) if self.weights is None else np.array(self.weights, dtype=float)
        if len(labels) != n or weights.shape != (n,):
            raise LabelMismatchError(
                f"{n} elements but {len(labels)} labels and {weights.size} weights"
            )
        if len(set(labels)) != n:
            raise LabelMismatchError("frame labels must be distinct")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValueError("frame weights must be positive and finite")
        if n < d * d:
            raise NotAFrameError(f"{n} elements cannot span the {d * d}-dimensional Hermitian space")
        if self.kind not in KINDS:
            raise ValueError(f"unknown frame kind {self.kind!r}")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        scale = max(1.0, float(np.max(np.abs(el))))
        worst = max(hermiticity_defect(e) for e in el)
        if worst > HERM_TOL * scale:
            raise ValueError(f"frame element not Hermitian (defect {worst:.3e})")
        el = 0.5 * (el + el.conj().transpose(0, 2, 1))
        object.__setattr__(self, "elements", _readonly(el))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", _readonly(weights))
        if self.check:
            lam = np.linalg.eigvalsh(self.operator_matrix)
            if lam[0] <= SPAN_RTOL * lam[-1]:
                raise NotAFrameError(
                    f"family does not span Herm(C^{d}): frame operator eigenvalues "
                    f"[{lam[0]:.3e}, {lam[-1]:.3e}]"
                )

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[0]

    @cached_property
    def coords(self) -> np.ndarray:
        """``(n, d**2)`` real coordinates of the elements in ``herm_basis``."""
        return _readonly(to_coords(self.elements))

    @cached_property
    def operator_matrix(self) -> np.ndarray:
        c = self.coords
        s = c.T @ (self.weights[:, None] * c)
        return _readonly(0.5 * (s + s.T))

    @cached_property
    def fingerprint(self) -> str:
        """Content hash used as the frame id in representations."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.elements).tobytes())
        h.update(np.ascontiguousarray(self.weights).tobytes())
        h.update(repr(self.labels).encode())
        return h.hexdigest()[:16]

    def index(self, label) -> int:
        return self._label_index[tuple(label)]

    @cached_property
    def _label_index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    def replace(self, **changes) -> "Frame":
        kw = dict(
            elements=self.elements,
            labels=self.labels,
            weights=self.weights,
            kind=self.kind,
            convention=self.convention,
        )
        kw.update(changes)
        return Frame(**kw)


@dataclass(frozen=True)
class Superoperator:
    """Real-linear map on Hermitian operators in ``herm_basis`` coordinates."""

    dim: int
    matrix: np.ndarray

    def __call__(self, a) -> np.ndarray:
        return from_coords(self.matrix @ to_coords(as_operator(a, self.dim)), self.dim)


@dataclass(frozen=True, eq=False)
class RepFunction:
    """Real function on the labels of a frame (values in label order)."""

    values: np.ndarray
    frame_id: str

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("representation values must be a finite 1-d array")
        object.__setattr__(self, "values", _readonly(v))

    def __len__(self) -> int:
        return self.values.size


# -- constructions ------------------------------------------------------------


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, int(n**0.5) + 1))


def _phase_point_core(d: int, a: int, b: int, phase: complex) -> np.ndarray:
    _, _, P = generators(d)
    return weyl(d, a, b) @ P * phase


def wootters_frame(d: int) -> Frame:
    """Phase-point frame ``F(q,p) = d**-2 X^{2q} Z^{2p} P exp(4 pi i q p / d)`` on ``Z_d x Z_d``.

    Requires an odd prime ``d``. At ``d = 2`` the doubled exponents vanish
    mod 2, every element collapses onto ``P/4`` and the family does not span.
    """
    if int(d) != d or d < 2 or not _is_prime(int(d)):
        raise UnsupportedDimensionError(f"Wootters frame needs an odd prime dimension, got {d}")
    if d == 2:
        raise UnsupportedDimensionError(
            "Wootters frame is degenerate at d=2: exponents 2q, 2p vanish mod 2, "
            "so all four elements coincide and do not span Herm(C^2)"
        )
    d = int(d)
    labels = [(q, p) for q in range(d) for p in range(d)]
    el = [
        _phase_point_core(d, 2 * q, 2 * p, np.exp(4j * np.pi * q * p / d)) / d**2
        for q, p in labels
    ]
    return Frame(np.array(el), labels, kind="wootters")


def leonhardt_frame(d: int) -> Frame:
    """Frame ``F(q,p) = (4 d**2)**-1 X^q Z^p P exp(i pi q p / d)`` on ``Z_2d x Z_2d``, ``d`` even."""
    if int(d) != d or d < 2 or d % 2:
        raise UnsupportedDimensionError(f"Leonhardt frame needs an even dimension >= 2, got {d}")
    d = int(d)
    n = 2 * d
    labels = [(q, p) for q in range(n) for p in range(n)]
    el = [
        _phase_point_core(d, q, p, np.exp(1j * np.pi * q * p / d)) / (4 * d * d)
        for q, p in labels
    ]
    return Frame(np.array(el), labels, kind="leonhardt")


def basis_frame(d: int) -> Frame:
    """The orthonormal ``herm_basis`` viewed as a (Parseval) frame."""
    return Frame(np.array(herm_basis(d)))


def random_frame(d: int, n: int, seed=None, positive: bool = False, max_tries: int = 10) -> Frame:
    """Random spanning family of ``n >= d**2`` Hermitian operators.

    With ``positive=True`` the elements are rank-one projectors onto
    Haar-random vectors, scaled by factors drawn from ``[0.5, 1.5)``.
    """
    if n < d * d:
        raise NotAFrameError(f"need n >= d**2 = {d * d} elements, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    last = None
    for _ in range(max_tries):
        if positive:
            scales = rng.uniform(0.5, 1.5, size=n)
            el = np.array([s * projector(random_pure_state(d, rng)) for s in scales])
        else:
            el = np.array([random_hermitian(d, rng) / np.sqrt(d) for _ in range(n)])
        try:
            return Frame(el)
        except NotAFrameError as exc:
            last = exc
    raise NotAFrameError(f"random family failed to span after {max_tries} draws") from last


def frame_from_linear_map(linear_map: Callable | np.ndarray, d: int, labels=None) -> Frame:
    """Recover the unique frame behind a linear invertible representation.

    ``linear_map`` sends a Hermitian operator to a real vector of length
    ``m >= d**2``; it may also be given as an ``(m, d**2)`` matrix acting on
    ``herm_basis`` coordinates. By linearity ``W(A)_j = <F(j), A>`` with
    ``F(j) = sum_i W(B_i)_j B_i``. A non-invertible map yields a
    :class:`NotAFrameError`.
    """
    B = herm_basis(d)
    if callable(linear_map):
        cols = np.array([np.asarray(linear_map(b), dtype=float) for b in B])  # (d^2, m)
        mat = cols.T
    else:
        mat = np.asarray(linear_map, dtype=float)
        if mat.ndim != 2 or mat.shape[1] != d * d:
            raise DimensionError(f"expected an (m, {d * d}) matrix, got {mat.shape}")
    return Frame(from_coords(mat, d), labels)


# -- frame operator, bounds and duals -----------------------------------------


def frame_operator(frame: Frame) -> Superoperator:
    return Superoperator(frame.dim, frame.operator_matrix)


def frame_bounds(frame: Frame) -> tuple[float, float]:
    """Optimal constants ``(a, b)`` with ``a|A|^2 <= sum w <F,A>^2 <= b|A|^2``."""
    lam = np.linalg.eigvalsh(frame.operator_matrix)
    if lam[0] <= SPAN_RTOL * lam[-1]:
        raise NotAFrameError(f"frame operator is singular (lambda_min = {lam[0]:.3e})")
    return float(lam[0]), float(lam[-1])


def _from_coord_rows(frame: Frame, coords: np.ndarray, **kw) -> Frame:
    kw.setdefault("kind", "custom")
    kw.setdefault("convention", frame.convention)
    return Frame(from_coords(coords, frame.dim), frame.labels, frame.weights, **kw)


def canonical_dual(frame: Frame) -> Frame:
    """Canonical dual ``E(alpha) = S^{-1} F(alpha)``.

    This is the dual of least weighted norm ``sum w |E(alpha)|^2`` and the
    only dual when the frame has exactly ``d**2`` elements.
    """
    frame_bounds(frame)
    ec = np.linalg.solve(frame.operator_matrix, frame.coords.T).T
    return _from_coord_rows(frame, ec)


def dual_family_basis(frame: Frame) -> np.ndarray:
    """Orthonormal basis ``N`` (shape ``(n, k)``) of the label-space directions
    that can be added to a dual without breaking duality.

    Every dual has coordinates ``Ec + N @ R`` for some ``(k, d**2)`` matrix ``R``.
    """
    m = frame.coords.T * frame.weights  # (d^2, n)
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    rank = int(np.sum(s > SPAN_RTOL * s[0]))
    return vt[rank:].T


def perturbed_dual(frame: Frame, dual: Frame, r: np.ndarray) -> Frame:
    """The dual ``dual + N @ r`` from the affine family of duals of ``frame``."""
    n_basis = dual_family_basis(frame)
    r = np.asarray(r, dtype=float)
    if r.shape != (n_basis.shape[1], frame.dim**2):
        raise DimensionError(f"perturbation must have shape {(n_basis.shape[1], frame.dim ** 2)}")
    return _from_coord_rows(frame, dual.coords + n_basis @ r)


def unit_trace_dual(frame: Frame) -> Frame:
    """A dual whose elements all have trace one.

    Starting from the canonical dual, only the identity component is moved
    inside the affine family of duals (minimum-norm correction). Raises
    :class:`ConventionError` when no such dual exists.
    """
    d = frame.dim
    can = canonical_dual(frame)
    n_basis = dual_family_basis(frame)
    # coordinate 0 is I/sqrt(d), so tr E = sqrt(d) * coords[:, 0]
    target = (1.0 - np.sqrt(d) * can.coords[:, 0]) / np.sqrt(d)
    if n_basis.shape[1] == 0:
        r0 = np.zeros(0)
    else:
        r0 = n_basis.T @ target
    if np.max(np.abs(n_basis @ r0 - target)) > DUAL_TOL:
        raise ConventionError("no dual with unit-trace elements exists for this frame")
    ec = can.coords.copy()
    ec[:, 0] += n_basis @ r0
    return _from_coord_rows(frame, ec)


@dataclass(frozen=True)
class DualityCheck:
    is_dual: bool
    residual: float

    def __bool__(self) -> bool:
        return self.is_dual


def _check_compatible(f: Frame, e: Frame) -> None:
    if f.dim != e.dim:
        raise DimensionError(f"frames act on dimensions {f.dim} and {e.dim}")
    if f.labels != e.labels:
        raise LabelMismatchError("frames are indexed by different labels")
    if not np.allclose(f.weights, e.weights, rtol=1e-12, atol=0):
        raise LabelMismatchError("frames carry different weights")


def reconstruction_matrix(frame: Frame, dual: Frame) -> np.ndarray:
    """Coordinate matrix of ``A -> sum w <F,A> E`` (identity for a dual pair)."""
    _check_compatible(frame, dual)
    return dual.coords.T @ (frame.weights[:, None] * frame.coords)


def is_dual_pair(frame: Frame, dual: Frame, tol: float = DUAL_TOL) -> DualityCheck:
    """Test ``sum w <F,B> E = B`` on every ``herm_basis`` element ``B``.

    The residual is the largest Hilbert-Schmidt error over the basis probes.
    """
    m = reconstruction_matrix(frame, dual)
    resid = float(np.max(np.linalg.norm(m - np.eye(m.shape[0]), axis=0)))
    return DualityCheck(resid <= tol, resid)


def paper_dual(kind: str, d: int, frame: Frame | None = None) -> tuple[Frame, float]:
    """Closed-form phase-point dual, rescaled by one fitted global scalar.

    Unscaled forms: ``E = d**-1 X^{2q} Z^{2p} P exp(4 pi i q p/d)`` (Wootters)
    and ``E = (2d)**-1 X^q Z^p P exp(i pi q p/d)`` (Leonhardt). The scalar
    ``s`` minimizing ``|s M - I|_F`` for the reconstruction matrix ``M`` is
    applied and returned; it is 1 only if the closed form is already dual.
    ``frame`` defaults to the raw frame of the same kind.
    """
    if kind == "wootters":
        base = wootters_frame(d)
        el = base.elements * d  # d**-2 -> d**-1
    elif kind == "leonhardt":
        base = leonhardt_frame(d)
        el = base.elements * (2 * d)  # (4d^2)**-1 -> (2d)**-1
    else:
        raise ValueError(f"no closed-form dual for frame kind {kind!r}")
    frame = base if frame is None else frame
    raw = Frame(el, base.labels, frame.weights, kind="custom", convention=frame.convention)
    m = reconstruction_matrix(frame, raw)
    scale = float(np.trace(m) / np.sum(m * m))
    return raw.replace(elements=raw.elements * scale), scale


# -- representation -----------------------------------------------------------


def pairings(frame: Frame, a) -> np.ndarray:
    """``<F(alpha), A> = tr(F(alpha) A)`` for every label; complex if ``A`` is not Hermitian."""
    a = as_operator(a)
    if a.shape[0] != frame.dim:
        raise DimensionError(f"operator is {a.shape[0]}-dimensional, frame is {frame.dim}-dimensional")
    return np.einsum("nij,ji->n", frame.elements, a)


def represent(frame: Frame, a) -> RepFunction:
    """Frame representation ``A(alpha) = <F(alpha), A>`` of a Hermitian operator."""
    vals = pairings(frame, a)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(vals.imag)) > HERM_TOL * scale:
        raise ValueError("operator is not Hermitian; use pairings() for complex values")
    return RepFunction(vals.real, frame.fingerprint)


def _values(rep) -> np.ndarray:
    return rep.values if isinstance(rep, RepFunction) else np.asarray(rep)


def reconstruct(dual: Frame, rep) -> np.ndarray:
    """``sum_alpha w_alpha rep(alpha) E(alpha)``; ``rep`` may be complex-valued."""
    v = _values(rep)
    if v.shape != (len(dual),):
        raise DimensionError(f"representation has {v.size} values, frame has {len(dual)} labels")
    return np.tensordot(dual.weights * v, dual.elements, axes=1)


def is_positive_frame(frame: Frame, tol: float = PSD_TOL) -> bool:
    return bool(element_min_eigs(frame).min() >= -tol)


def element_min_eigs(frame: Frame) -> np.ndarray:
    return np.linalg.eigvalsh(frame.elements)[:, 0]


def renormalize(frame: Frame, convention: str) -> Frame:
    """Rescale a frame to one of the normalization conventions.

    ``raw``
        unchanged.
    ``state_normalized``
        one global factor on the elements so that ``sum w F = I``; state
        representations then have unit weighted sum.
    ``standard``
        elements scaled to unit trace and weights set to the uniform value
        making ``sum w F = I``; additionally every effect representation
        through the frame sums to one pointwise.
    """
    if convention == "raw":
        return frame
    d = frame.dim
    if convention == "state_normalized":
        total = np.tensordot(frame.weights, frame.elements, axes=1)
        c = np.trace(total).real / d
        if c <= 0 or np.max(np.abs(total - c * np.eye(d))) > DUAL_TOL * max(1.0, abs(c)):
            raise ConventionError("sum_alpha w_alpha F(alpha) is not a positive multiple of the identity")
        return frame.replace(elements=frame.elements / c, convention=convention)
    if convention == "standard":
        tr = np.trace(frame.elements, axis1=1, axis2=2).real
        if tr.min() <= 0 or np.ptp(tr) > DUAL_TOL * tr.max():
            raise ConventionError(
                f"standard convention needs equal positive element traces; "
                f"traces range over [{tr.min():.6g}, {tr.max():.6g}]"
            )
        el = frame.elements / tr[:, None, None]
        total = el.sum(axis=0)
        c = np.trace(total).real / d
        if np.max(np.abs(total - c * np.eye(d))) > DUAL_TOL * c:
            raise ConventionError("sum_alpha F(alpha) is not proportional to the identity")
        w = np.full(len(frame), 1.0 / c)
        return frame.replace(elements=el, weights=w, convention=convention)
    raise ValueError(f"unknown convention {convention!r}")


def build_frame(kind: str, d: int, convention: str = "raw", n: int | None = None,
                seed=None, positive: bool = False) -> Frame:
    if kind == "wootters":
        f = wootters_frame(d)
    elif kind == "leonhardt":
        f = leonhardt_frame(d)
    elif kind == "random":
        f = random_frame(d, d * d if n is None else n, seed, positive)
    else:
        raise ValueError(f"unknown frame kind {kind!r}")
    return renormalize(f, convention)


# -- covariance ---------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceReport:
    covariant: bool
    worst_residual: float
    translations: dict  # unitary index -> (s, t) or None

    def __bool__(self) -> bool:
        return self.covariant


def _lattice(frame: Frame) -> int:
    n = int(round(np.sqrt(len(frame))))
    expected = {(q, p) for q in range(n) for p in range(n)}
    if n * n != len(frame) or set(frame.labels) != expected:
        raise LabelMismatchError("covariance check needs labels forming Z_n x Z_n")
    return n


def covariance_check(frame: Frame, unitaries: Sequence[np.ndarray] | None = None,
                     tol: float = COVARIANCE_TOL) -> CovarianceReport:
    """Check that conjugation by each unitary acts as a lattice translation.

    For every ``U`` a translation ``(s, t)`` is searched with
    ``|U F(q,p) U^dag - F(q+s, p+t)| <= tol`` for all labels. The default
    unitaries are all displacements ``X^a Z^b``, ``a, b in Z_d``.
    """
    n = _lattice(frame)
    d = frame.dim
    if unitaries is None:
        unitaries = [weyl(d, a, b) for a in range(d) for b in range(d)]
    q = np.array([lab[0] for lab in frame.labels])
    p = np.array([lab[1] for lab in frame.labels])
    idx = np.empty((n, n), dtype=int)
    idx[q, p] = np.arange(len(frame))
    found = {}
    worst = 0.0
    for u_i, u in enumerate(unitaries):
        u = as_operator(u, d)
        conj = u @ frame.elements @ u.conj().T
        best, best_st = np.inf, None
        for s in range(n):
            for t in range(n):
                perm = idx[(q + s) % n, (p + t) % n]
                r = float(np.max(np.linalg.norm(conj - frame.elements[perm], axis=(1, 2))))
                if r < best:
                    best, best_st = r, (s, t)
        worst = max(worst, best)
        found[u_i] = best_st if best <= tol else None
    return CovarianceReport(all(v is not None for v in found.values()), worst, found)
