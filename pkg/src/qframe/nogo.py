"""Numerical witness that a positive frame has no positive dual.

For a pair of frames the map ``Phi(A) = sum_a w_a <F(a), A> E(a)`` has Choi
matrix

    J = sum_{ij} Phi(|i><j|) (x) |i><j| = sum_a w_a E(a) (x) F(a)^T.

The index basis sits on the second tensor factor. If ``F`` and ``E`` are
both positive, ``J`` is separable and therefore has a positive partial
transpose. If they are dual, ``Phi`` is the identity and ``J`` is the
unnormalized maximally entangled projector whose partial transpose is the
swap operator, with eigenvalue -1. The two cannot hold together.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import DimensionError, NotPositiveError
from .frames import (
    Frame,
    canonical_dual,
    dual_family_basis,
    is_dual_pair,
    is_positive_frame,
    pairings,
    perturbed_dual,
    random_frame,
    _check_compatible,
)
from .operator_space import HERM_TOL, hermiticity_defect

WITNESS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.dim
        if m.shape != (d * d, d * d):
            raise DimensionError(f"Choi matrix of a {d}-dimensional map must be {d * d}x{d * d}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if hermiticity_defect(m) > HERM_TOL * scale:
            raise ValueError("Choi matrix is not Hermitian")
        object.__setattr__(self, "matrix", m)


def choi_of_map(phi, d: int) -> ChoiMatrix:
    """``sum_{ij} phi(|i><j|) (x) |i><j|`` for a linear map on ``d x d`` matrices."""
    j = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[a, b] = 1.0
            j += np.kron(phi(unit), unit)
    return ChoiMatrix(d, j)


def pair_map(frame: Frame, dual: Frame):
    """The map ``A -> sum w <F, A> E``, extended complex-linearly to all matrices."""
    _check_compatible(frame, dual)

    def phi(a):
        return np.tensordot(dual.weights * pairings(frame, a), dual.elements, axes=1)

    return phi


def choi_of_pair(frame: Frame, dual: Frame) -> ChoiMatrix:
    """Choi matrix ``sum_a w_a E(a) (x) F(a)^T`` of the frame-pair map."""
    _check_compatible(frame, dual)
    d = frame.dim
    j = np.einsum("a,aij,alk->ikjl", frame.weights, dual.elements, frame.elements)
    return ChoiMatrix(d, j.reshape(d * d, d * d))


def identity_choi(d: int) -> ChoiMatrix:
    """``sum_{ij} |i><j| (x) |i><j|``."""
    v = np.eye(d).reshape(d * d)
    return ChoiMatrix(d, np.outer(v, v).astype(complex))


def partial_transpose(choi: ChoiMatrix) -> ChoiMatrix:
    """Transpose on the second tensor factor."""
    d = choi.dim
    t = choi.matrix.reshape(d, d, d, d).transpose(0, 3, 2, 1)
    return ChoiMatrix(d, t.reshape(d * d, d * d))


def min_eig_pt(choi: ChoiMatrix) -> float:
    """Smallest eigenvalue of the partial transpose; negative certifies entanglement."""
    return float(np.linalg.eigvalsh(partial_transpose(choi).matrix)[0])


def relative_min_eigs(frame: Frame) -> np.ndarray:
    """Per element ``lambda_min(E) / |E|_HS``."""
    lam = np.linalg.eigvalsh(frame.elements)[:, 0]
    return lam / np.linalg.norm(frame.elements, axis=(1, 2))


@dataclass(frozen=True)
class WitnessReport:
    dim: int
    frame_seed: int | None
    n_elements: int
    min_dual_eig: float  # min over labels of lambda_min(E)/|E|, canonical dual
    min_dual_eig_abs: float
    choi_pt_min_eig: float
    n_perturbations: int
    perturbed_min_dual_eig: float  # max over perturbed duals of their (relative) min eig
    verdict: str

    def to_dict(self) -> dict:
        return asdict(self)


def positive_dual_witness(frame: Frame, n_perturbations: int = 20, seed=None,
                          frame_seed: int | None = None, tol: float = WITNESS_TOL) -> WitnessReport:
    """Witness that no dual of a positive frame is positive.

    The canonical dual must contain an element with a negative eigenvalue
    (reported relative to the element's norm). Random members of the affine
    family of duals are probed as well; each must also fail positivity. The
    Choi matrix of the pair is the identity-map Choi, whose partial
    transpose has minimum eigenvalue -1.
    """
    if not is_positive_frame(frame):
        raise NotPositiveError("positive_dual_witness needs a frame of positive operators")
    dual = canonical_dual(frame)
    rel = relative_min_eigs(dual)
    pt = min_eig_pt(choi_of_pair(frame, dual))

    rng = np.random.default_rng(seed)
    k = dual_family_basis(frame).shape[1]
    worst_perturbed = -np.inf
    scale = float(np.sqrt(np.mean(np.sum(dual.coords**2, axis=1))))
    for _ in range(n_perturbations):
        r = rng.standard_normal((k, frame.dim**2)) * scale * rng.uniform(0.1, 2.0)
        e = perturbed_dual(frame, dual, r)
        if not is_dual_pair(frame, e):
            raise AssertionError("perturbed family member lost duality")
        worst_perturbed = max(worst_perturbed, float(relative_min_eigs(e).min()))

    witnessed = rel.min() < -tol and (n_perturbations == 0 or worst_perturbed < -tol)
    return WitnessReport(
        dim=frame.dim,
        frame_seed=frame_seed,
        n_elements=len(frame),
        min_dual_eig=float(rel.min()),
        min_dual_eig_abs=float(np.linalg.eigvalsh(dual.elements)[:, 0].min()),
        choi_pt_min_eig=pt,
        n_perturbations=n_perturbations,
        perturbed_min_dual_eig=float(worst_perturbed) if n_perturbations else float("nan"),
        verdict="no_positive_dual_witnessed" if witnessed else "not_witnessed",
    )


def witness_batch(d: int, seeds, n: int | None = None, n_perturbations: int = 20) -> list[WitnessReport]:
    """Run :func:`positive_dual_witness` on random positive frames, one per seed.

    ``n`` defaults to cycling through ``d**2 .. d**2 + 3`` elements.
    """
    out = []
    for i, s in enumerate(seeds):
        size = n if n is not None else d * d + (i % 4)
        f = random_frame(d, size, seed=s, positive=True)
        out.append(positive_dual_witness(f, n_perturbations, seed=s, frame_seed=s))
    return out
