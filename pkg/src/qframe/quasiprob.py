"""Quasi-probability calculi built on a frame and one of its duals.

Two autonomous ways to compute outcome probabilities:

* deformed: states and effects both represented through ``F`` and combined
  with the dual Gram kernel, ``sum_{a,b} w_a w_b rho(a) M(b) <E(a), E(b)>``;
* quasi-probability: effects represented through the dual ``E`` and combined
  by the ordinary law of total probability, ``sum_a w_a rho(a) M~(a)``.

Both agree with ``tr(M rho)`` for any dual pair. Negativity of the
functions involved, and a checker for the classical-model conditions on a
fixed frame pair, live here too.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, DualityError, LabelMismatchError
from .frames import Frame, RepFunction, is_dual_pair, represent
from .operator_space import DensityOp, Povm, born_rule, projector, random_pure_state
from .star_algebra import Kernel2, theta_kernel

NORM_TOL = 1e-10
NEG_TOL = 1e-12
CLASSICAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuasiDensity:
    rep: RepFunction
    frame: Frame

    @property
    def values(self) -> np.ndarray:
        return self.rep.values

    def total(self) -> float:
        """Weighted sum over the labels (1 under normalized conventions)."""
        return float(self.frame.weights @ self.rep.values)


@dataclass(frozen=True, eq=False)
class CondQuasiProb:
    """One representation per outcome; ``via`` says whether ``frame`` played
    the role of the frame (``"F"``) or of the dual (``"E"``)."""

    reps: tuple
    frame: Frame
    via: str

    def __post_init__(self):
        if self.via not in ("F", "E"):
            raise ValueError("via must be 'F' or 'E'")

    def __len__(self) -> int:
        return len(self.reps)

    def matrix(self) -> np.ndarray:
        """``(outcomes, labels)`` array of values."""
        return np.array([r.values for r in self.reps])

    def completeness(self) -> np.ndarray:
        """Pointwise sum over outcomes."""
        return self.matrix().sum(axis=0)


@dataclass(frozen=True)
class NegativityReport:
    min_value: float
    negative_mass: float
    count_negative: int

    @property
    def is_negative(self) -> bool:
        return self.count_negative > 0


def rep_state(frame: Frame, rho: DensityOp) -> QuasiDensity:
    if rho.dim != frame.dim:
        raise DimensionError(f"state is {rho.dim}-dimensional, frame is {frame.dim}-dimensional")
    return QuasiDensity(represent(frame, rho.matrix), frame)


def rep_effects(frame: Frame, povm: Povm, via: str = "F") -> CondQuasiProb:
    if povm.dim != frame.dim:
        raise DimensionError(f"POVM is {povm.dim}-dimensional, frame is {frame.dim}-dimensional")
    return CondQuasiProb(tuple(represent(frame, m) for m in povm.effects), frame, via)


def convert_effect_rep(m_rep: CondQuasiProb, theta: Kernel2, dual: Frame) -> CondQuasiProb:
    """Turn effect representations through ``F`` into representations through ``E``.

    ``M~(a) = sum_b w_b M(b) theta(a, b)`` where ``theta`` is the Gram kernel
    of ``dual``.
    """
    if m_rep.via != "F":
        raise ValueError("conversion starts from representations through the frame F")
    if theta.frame_id != dual.fingerprint:
        raise LabelMismatchError("theta kernel does not belong to the given dual")
    if not np.allclose(m_rep.frame.weights, dual.weights, rtol=1e-12, atol=0) \
            or m_rep.frame.labels != dual.labels:
        raise LabelMismatchError("frame and dual use different labels or weights")
    w = dual.weights
    out = (m_rep.matrix() * w) @ theta.matrix  # theta symmetric
    return CondQuasiProb(tuple(RepFunction(v, dual.fingerprint) for v in out), dual, "E")


def _require_dual(frame: Frame, dual: Frame) -> None:
    check = is_dual_pair(frame, dual)
    if not check:
        raise DualityError(f"frames are not a dual pair (residual {check.residual:.3e})")


def _outcome(m_rep: CondQuasiProb, k: int) -> np.ndarray:
    if not 0 <= k < len(m_rep):
        raise IndexError(f"outcome {k} out of range for {len(m_rep)} outcomes")
    return m_rep.reps[k].values


def deformed_prob(rho: QuasiDensity, m_rep: CondQuasiProb, dual: Frame, k: int,
                  theta: Kernel2 | None = None) -> float:
    """Outcome probability from frame-side representations and the dual Gram kernel.

    The product measure ``w_a w_b`` is used on pairs of labels. Reported
    unclamped.
    """
    if m_rep.via != "F" or m_rep.frame.fingerprint != rho.frame.fingerprint:
        raise LabelMismatchError("state and effects must both be represented through the same frame F")
    _require_dual(rho.frame, dual)
    theta = theta or theta_kernel(dual)
    w = dual.weights
    return float((w * rho.values) @ theta.matrix @ (w * _outcome(m_rep, k)))


def total_prob(rho: QuasiDensity, m_rep: CondQuasiProb, k: int) -> float:
    """Law of total probability ``sum_a w_a rho(a) M~_k(a)``; ``m_rep`` is through a dual."""
    if m_rep.via != "E":
        raise LabelMismatchError("effects must be represented through a dual frame E")
    _require_dual(rho.frame, m_rep.frame)
    return float(np.sum(rho.frame.weights * rho.values * _outcome(m_rep, k)))


def born_triangle(frame: Frame, dual: Frame, rho: DensityOp, povm: Povm) -> np.ndarray:
    """``(outcomes, 3)`` array of probabilities by trace, deformed and total routes."""
    rr = rep_state(frame, rho)
    mf = rep_effects(frame, povm, "F")
    me = rep_effects(dual, povm, "E")
    theta = theta_kernel(dual)
    return np.array([
        [born_rule(rho, povm, k),
         deformed_prob(rr, mf, dual, k, theta),
         total_prob(rr, me, k)]
        for k in range(len(povm))
    ])


def negativity(rep, weights) -> NegativityReport:
    v = rep.values if isinstance(rep, RepFunction) else np.asarray(rep, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.shape != w.shape:
        raise DimensionError("values and weights differ in length")
    if not np.all(np.isfinite(v)):
        raise ValueError("representation has non-finite entries")
    return NegativityReport(
        min_value=float(v.min()),
        negative_mass=float(np.sum(w * np.maximum(0.0, -v))),
        count_negative=int(np.sum(v < -NEG_TOL)),
    )


def scan_negative_states(frame: Frame, n_states: int = 200, seed=0):
    """Scan Haar-random pure states for negative representations.

    Returns ``(psi, report)`` for the state with the most negative entry.
    """
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_states):
        psi = random_pure_state(frame.dim, rng)
        rep = represent(frame, projector(psi))
        rpt = negativity(rep, frame.weights)
        if best is None or rpt.min_value < best[1].min_value:
            best = (psi, rpt)
    return best


# -- classical-model check ------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    condition: str  # "state-negative", "state-normalization", "effect-range", "effect-completeness"
    item: int  # state index, or povm index
    outcome: int | None
    label: tuple | None
    value: float


@dataclass
class ClassicalityReport:
    classical_for_this_pair: bool
    violations: list = field(default_factory=list)
    max_total_prob_deviation: float = 0.0

    def __bool__(self) -> bool:
        return self.classical_for_this_pair


def classicality_check(frame: Frame, dual: Frame, states=(), povms=(),
                       tol: float = CLASSICAL_TOL) -> ClassicalityReport:
    """Test the classical-model conditions for one fixed frame pair.

    States (through ``frame``) must be non-negative and normalized; effects
    (through ``dual``) must lie in ``[0, 1]`` and sum to one at every label.
    The law of total probability holds by construction; its deviation from
    the Born rule is recorded as a consistency figure.
    """
    _require_dual(frame, dual)
    labels = frame.labels
    out = ClassicalityReport(True)
    for i, rho in enumerate(states):
        q = rep_state(frame, rho)
        for a in np.flatnonzero(q.values < -tol):
            out.violations.append(Violation("state-negative", i, None, labels[a], float(q.values[a])))
        if abs(q.total() - 1.0) > tol:
            out.violations.append(Violation("state-normalization", i, None, None, q.total()))
    for j, povm in enumerate(povms):
        m = rep_effects(dual, povm, "E")
        vals = m.matrix()
        for k, a in zip(*np.nonzero((vals < -tol) | (vals > 1 + tol))):
            out.violations.append(Violation("effect-range", j, int(k), labels[a], float(vals[k, a])))
        comp = vals.sum(axis=0)
        for a in np.flatnonzero(np.abs(comp - 1.0) > tol):
            out.violations.append(Violation("effect-completeness", j, None, labels[a], float(comp[a])))
        for rho in states:
            q = rep_state(frame, rho)
            for k in range(len(povm)):
                dev = abs(total_prob(q, m, k) - born_rule(rho, povm, k))
                out.max_total_prob_deviation = max(out.max_total_prob_deviation, dev)
    out.classical_for_this_pair = not out.violations
    return out
