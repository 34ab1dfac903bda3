"""Independent estimators used to cross-check the closed-form calculus.

Grid quadrature for divergence and Fisher information (dimensions 1 to
3), the sorted-sample coupling for one-dimensional W2, and closed-form
checkers for the transport inequality and the per-block mean-shift
comparison.  Everything here is deliberately implemented by a different
route than the main modules so agreement is evidence of correctness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .criteria import CertificateError, CriteriaReport
from .gaussian import GaussianDist, gaussian_target, kl, w2
from .model import GibbsModel

MASS_DEFECT_LIMIT = 1e-4
_TINY = 1e-300


class QuadratureError(ValueError):
    """Quadrature setup failed its self-check (mass defect too large)."""


class QuadValue(float):
    """Float carrying the quadrature's self-reported mass defect."""

    def __new__(cls, value: float, mass_defect: float):
        obj = super().__new__(cls, value)
        obj.mass_defect = float(mass_defect)
        return obj


def _grid_eval(density, box, pts_per_dim):
    box = [(float(lo), float(hi)) for lo, hi in box]
    d = len(box)
    if d < 1 or d > 3:
        raise ValueError("quadrature supports dimensions 1 to 3")
    if pts_per_dim < 8:
        raise ValueError("need at least 8 points per dimension")
    if any(hi <= lo for lo, hi in box):
        raise ValueError("box sides must have positive length")
    axes = [np.linspace(lo, hi, pts_per_dim) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = np.asarray(density(points), dtype=float).reshape(mesh[0].shape)
    weights = np.ones(mesh[0].shape)
    for axis, ax in enumerate(axes):
        w1 = np.full(pts_per_dim, ax[1] - ax[0])
        w1[0] *= 0.5
        w1[-1] *= 0.5
        shape = [1] * d
        shape[axis] = pts_per_dim
        weights = weights * w1.reshape(shape)
    return axes, vals, weights


def _check_mass(weights, vals, label) -> float:
    mass = float(np.sum(weights * vals))
    defect = abs(mass - 1.0)
    if defect > MASS_DEFECT_LIMIT:
        raise QuadratureError(
            f"{label} density integrates to {mass:.8g} on the box "
            f"(defect {defect:.3g}); enlarge the box or refine the grid")
    return defect


def quad_kl(p_density, q_density, box, pts_per_dim: int) -> QuadValue:
    """Trapezoid quadrature of D(p||q) = integral p log(p/q) on a box.

    Densities are callables on an (npts, d) array of points.  Both are
    integrated as a self-check; the defect of p is attached to the result.
    """
    axes, pvals, weights = _grid_eval(p_density, box, pts_per_dim)
    _, qvals, _ = _grid_eval(q_density, box, pts_per_dim)
    defect = _check_mass(weights, pvals, "p")
    _check_mass(weights, qvals, "q")
    ratio = np.log(np.maximum(pvals, _TINY)) - np.log(np.maximum(qvals, _TINY))
    integrand = np.where(pvals > _TINY, pvals * ratio, 0.0)
    return QuadValue(float(np.sum(weights * integrand)), defect)


def quad_fisher(p_density, q_density, box, pts_per_dim: int) -> QuadValue:
    """Trapezoid quadrature of I(p||q) = integral p |grad log(p/q)|^2.

    The log-ratio gradient is taken by central differences on the same
    grid (exact for Gaussian pairs, whose log ratio is quadratic).
    """
    axes, pvals, weights = _grid_eval(p_density, box, pts_per_dim)
    _, qvals, _ = _grid_eval(q_density, box, pts_per_dim)
    defect = _check_mass(weights, pvals, "p")
    _check_mass(weights, qvals, "q")
    logratio = np.log(np.maximum(pvals, _TINY)) - np.log(np.maximum(qvals, _TINY))
    grads = np.gradient(logratio, *axes)
    if len(box) == 1:
        grads = [grads]
    sq = np.zeros_like(pvals)
    for g in grads:
        sq += g * g
    return QuadValue(float(np.sum(weights * pvals * sq)), defect)


def w2_empirical_1d(samples_p, samples_q) -> float:
    """Empirical 1-d W2 via the sorted-sample (quantile) coupling."""
    sp = np.sort(np.asarray(samples_p, dtype=float).ravel())
    sq = np.sort(np.asarray(samples_q, dtype=float).ravel())
    if sp.size != sq.size:
        raise ValueError("sample sets must have equal size")
    if sp.size == 0:
        raise ValueError("sample sets must be non-empty")
    return float(np.sqrt(np.mean((sp - sq) ** 2)))


@dataclass(frozen=True)
class TransportResult:
    w2sq: float
    bound: float
    holds: bool


def transport_check(p: GaussianDist, model: GibbsModel,
                    report: CriteriaReport) -> TransportResult:
    """Check W2(p, q)^2 <= (2/rho) D(p||q) with the certified rho."""
    if report.rho_marton is None:
        raise CertificateError("report carries no certified constant")
    q = gaussian_target(model)
    w2sq = w2(p, q) ** 2
    bound = 2.0 / report.rho_marton * kl(p, q)
    return TransportResult(w2sq=float(w2sq), bound=float(bound),
                           holds=bool(w2sq <= bound + 1e-9))


@dataclass(frozen=True)
class MeanShiftResult:
    """Closed-form comparison of block mean-shift functionals.

    For Gaussian conditionals with shifted conditioning points, the
    conditional mean shift of block k is Delta_k = -(K_II)^-1 K_IJ
    (z - u)_J, giving lhs = sum rho_k |Delta_k|^2, mid = sum Delta_k'
    K_II Delta_k (twice the summed conditional divergences), and the
    interaction bound rhs = (1 - delta)^2 sum rho_k |(z - u)_k|^2.
    """

    lhs_w2_sum: float
    mid_kl_sum: float
    rhs: float
    holds_first: bool
    holds_second: bool


def prop4_check(model: GibbsModel, report: CriteriaReport, z,
                u) -> MeanShiftResult:
    """Evaluate the two-sided mean-shift inequality at points z, u."""
    if not model.is_gaussian:
        raise ValueError("closed-form check needs a Gaussian model")
    if report.delta <= 0:
        raise CertificateError("report carries no interaction margin")
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    if z.shape != (model.dim,) or u.shape != (model.dim,):
        raise ValueError("points must have the model dimension")
    part = model.partition
    rho_k = np.asarray(report.rho_k, dtype=float)
    prec = model.precision
    lhs = 0.0
    mid = 0.0
    rhs_sum = 0.0
    for k in range(part.n):
        idx = part.block(k)
        rest = part.complement(k)
        diff_rest = (z - u)[rest]
        if rest.size:
            delta_k = -np.linalg.solve(prec[np.ix_(idx, idx)],
                                       prec[np.ix_(idx, rest)] @ diff_rest)
        else:
            delta_k = np.zeros(idx.size)
        lhs += rho_k[k] * float(delta_k @ delta_k)
        mid += float(delta_k @ prec[np.ix_(idx, idx)] @ delta_k)
        rhs_sum += rho_k[k] * float((z - u)[idx] @ (z - u)[idx])
    rhs = (1.0 - report.delta) ** 2 * rhs_sum
    return MeanShiftResult(
        lhs_w2_sum=lhs, mid_kl_sum=mid, rhs=rhs,
        holds_first=bool(lhs <= mid + 1e-9),
        holds_second=bool(mid <= rhs + 1e-9),
    )
