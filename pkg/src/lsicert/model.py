"""Block-structured Gibbs models on R^N.

A model is a probability density q(x) proportional to exp(-V(x)) with

    V(x) = 0.5 * (x - m)' K (x - m) + sum_i lam_i * x_i**4,

where K is a symmetric precision matrix, m a location vector and lam a
vector of non-negative quartic coefficients.  Coordinates are grouped into
an ordered partition of disjoint blocks; all spectral criteria and Gibbs
dynamics operate at the block level.

When lam = 0 the model is Gaussian and K must be positive definite.  With
a non-trivial quartic term the density is still normalizable for any
symmetric K, so positive definiteness is not required.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

SYMMETRY_TOL = 1e-12


class ModelError(Exception):
    """Base class for model construction failures."""


class ModelFormatError(ModelError):
    """Malformed model document: bad JSON, missing keys or wrong shapes."""


class ModelValidationError(ModelError):
    """Well-formed model document violating a semantic invariant."""


@dataclass(frozen=True)
class BlockPartition:
    """Ordered list of disjoint index blocks whose union is [0, N)."""

    blocks: tuple

    def __post_init__(self):
        try:
            canonical = tuple(tuple(int(i) for i in blk) for blk in self.blocks)
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"partition entries must be integer lists: {exc}")
        object.__setattr__(self, "blocks", canonical)
        if not canonical:
            raise ModelValidationError("partition needs at least one block")
        if any(len(blk) == 0 for blk in canonical):
            raise ModelValidationError("empty block in partition")
        flat = [i for blk in canonical for i in blk]
        if len(set(flat)) != len(flat):
            raise ModelValidationError("partition blocks overlap")
        if sorted(flat) != list(range(len(flat))):
            raise ModelValidationError(
                "partition must cover exactly the indices 0..N-1")

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def dim(self) -> int:
        return sum(len(blk) for blk in self.blocks)

    @property
    def sizes(self) -> tuple:
        return tuple(len(blk) for blk in self.blocks)

    def block(self, k: int) -> np.ndarray:
        """Indices of block k, in the stored order."""
        return np.asarray(self.blocks[k], dtype=int)

    def complement(self, k: int) -> np.ndarray:
        """Indices outside block k, ascending."""
        inside = set(self.blocks[k])
        return np.asarray([i for i in range(self.dim) if i not in inside], dtype=int)

    @cached_property
    def coordinate_block(self) -> np.ndarray:
        """Map from coordinate index to the block containing it."""
        owner = np.empty(self.dim, dtype=int)
        for k, blk in enumerate(self.blocks):
            owner[list(blk)] = k
        return owner


@dataclass(frozen=True, eq=False)
class GibbsModel:
    """Gibbs density exp(-V) with quadratic-plus-quartic potential V."""

    partition: BlockPartition
    precision: np.ndarray
    mean: np.ndarray
    quartic: np.ndarray

    def __post_init__(self):
        n = self.partition.dim
        prec = np.asarray(self.precision, dtype=float)
        mean = np.asarray(self.mean, dtype=float)
        quart = np.asarray(self.quartic, dtype=float)
        if prec.shape != (n, n):
            raise ModelFormatError(
                f"precision must be {n}x{n}, got {prec.shape}")
        if mean.shape != (n,):
            raise ModelFormatError(f"mean must have length {n}, got {mean.shape}")
        if quart.shape != (n,):
            raise ModelFormatError(
                f"quartic must have length {n}, got {quart.shape}")
        scale = max(1.0, float(np.abs(prec).max()) if prec.size else 1.0)
        if float(np.abs(prec - prec.T).max()) > SYMMETRY_TOL * scale:
            raise ModelValidationError("precision matrix is not symmetric")
        prec = 0.5 * (prec + prec.T)
        if np.any(quart < 0):
            raise ModelValidationError("quartic coefficients must be >= 0")
        if not np.all(np.isfinite(prec)) or not np.all(np.isfinite(mean)):
            raise ModelValidationError("model entries must be finite")
        if np.all(quart == 0):
            lam_min = float(np.linalg.eigvalsh(prec)[0])
            if lam_min <= 0:
                raise ModelValidationError(
                    f"precision must be positive definite for a Gaussian model "
                    f"(min eigenvalue {lam_min:.6g})")
        for arr in (prec, mean, quart):
            arr.flags.writeable = False
        object.__setattr__(self, "precision", prec)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "quartic", quart)

    @property
    def dim(self) -> int:
        return self.partition.dim

    @property
    def is_gaussian(self) -> bool:
        return bool(np.all(self.quartic == 0))


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the structural checks backing the spectral criteria.

    rho_k are per-block curvature constants, block_hessian_lower_bounds the
    corresponding lower bounds on the conditional Hessians, and delta the
    interaction margin 1 - ||A(x, xi)|| at the reference scaling (present
    only when positive).  sampled_bounds marks values obtained from probe
    points rather than exact evaluation; such bounds are not certificates.
    """

    rho_k: tuple
    block_hessian_lower_bounds: tuple
    assumption1_ok: bool
    assumption2_ok: bool
    assumption3_ok: bool
    delta: float | None
    sampled_bounds: bool

    def __post_init__(self):
        has_margin = self.delta is not None and self.delta > 0
        if self.assumption3_ok != has_margin:
            raise ValueError("assumption3_ok must mirror a positive delta")


def toeplitz_matrix(m: int, diag: float, band: dict) -> np.ndarray:
    """Symmetric banded Toeplitz matrix diag*I + sum_j b_j (E_j + E_-j).

    band maps positive offsets to coefficients; offsets at or beyond m fall
    outside the matrix and are rejected.
    """
    if m < 1:
        raise ModelValidationError("toeplitz size must be >= 1")
    mat = np.eye(m) * float(diag)
    for off, coeff in band.items():
        j = int(off)
        if j < 1 or j >= m:
            raise ModelValidationError(
                f"band offset {j} outside the valid range 1..{m - 1}")
        mat += float(coeff) * (np.eye(m, k=j) + np.eye(m, k=-j))
    return mat


def hessian(model: GibbsModel, x) -> np.ndarray:
    """Hessian of the potential at x: K + diag(12 * lam_i * x_i^2)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise ModelFormatError(f"point must have length {model.dim}")
    hess = np.array(model.precision)
    hess[np.diag_indices_from(hess)] += 12.0 * model.quartic * x ** 2
    return hess


def grad_potential(model: GibbsModel, x: np.ndarray) -> np.ndarray:
    """Gradient of the potential, vectorized over rows of x."""
    x = np.asarray(x, dtype=float)
    return (x - model.mean) @ model.precision + 4.0 * model.quartic * x ** 3


def latin_hypercube_probes(dim: int, count: int, radius: float,
                           seed: int = 0) -> np.ndarray:
    """Latin hypercube point set on the cube [-radius, radius]^dim."""
    rng = np.random.default_rng(seed)
    strata = np.tile(np.arange(count, dtype=float), (dim, 1))
    strata = rng.permuted(strata, axis=1).T
    u = (strata + rng.random((count, dim))) / count
    return (2.0 * u - 1.0) * radius


def default_probes(model: GibbsModel, count: int = 8,
                   seed: int = 0) -> np.ndarray:
    """Probe points for sampled Hessian bounds on quartic models.

    Covers a cube three stationary deviations wide around the location m,
    with the origin and m appended.
    """
    diag = np.abs(np.diag(model.precision))
    spread = 1.0 / np.sqrt(np.maximum(diag, 1e-2))
    radius = 3.0 * float(np.max(spread))
    pts = model.mean + latin_hypercube_probes(model.dim, count, radius, seed)
    return np.vstack([pts, model.mean, np.zeros(model.dim)])


def verify_assumptions(model: GibbsModel,
                       probe_points: np.ndarray | None = None) -> AssumptionReport:
    """Check the curvature and interaction assumptions behind the criteria.

    For Gaussian models every quantity is exact.  Otherwise suprema and
    infima over the state space are approximated on probe points and the
    report is flagged as sampled.
    """
    from . import criteria

    rho_k = criteria.block_lsi_constants(model)
    assumption1 = bool(np.all(rho_k > 0))

    if model.is_gaussian:
        probes = None
        bounds = rho_k.copy()
        sampled = False
    else:
        probes = (np.asarray(probe_points, dtype=float)
                  if probe_points is not None else default_probes(model))
        if probes.ndim != 2 or probes.shape[1] != model.dim:
            raise ModelFormatError("probe points must be an (npts, dim) array")
        bounds = np.full(model.partition.n, np.inf)
        for x in probes:
            hess = hessian(model, x)
            for k in range(model.partition.n):
                idx = model.partition.block(k)
                sub = hess[np.ix_(idx, idx)]
                bounds[k] = min(bounds[k], float(np.linalg.eigvalsh(sub)[0]))
        sampled = True
    assumption2 = bool(np.all(np.isfinite(bounds)))

    if assumption1:
        norm_a0 = criteria.sup_interaction_norm(model, 0.0, probes)
        delta_val = 1.0 - norm_a0
    else:
        delta_val = None
    assumption3 = delta_val is not None and delta_val > 0

    return AssumptionReport(
        rho_k=tuple(float(r) for r in rho_k),
        block_hessian_lower_bounds=tuple(float(b) for b in bounds),
        assumption1_ok=assumption1,
        assumption2_ok=assumption2,
        assumption3_ok=assumption3,
        delta=float(delta_val) if assumption3 else None,
        sampled_bounds=sampled,
    )


def model_from_dict(doc: dict) -> GibbsModel:
    """Build a model from its document form (see load_model)."""
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    if "dim" not in doc or "partition" not in doc:
        raise ModelFormatError("model document needs 'dim' and 'partition'")
    try:
        dim = int(doc["dim"])
    except (TypeError, ValueError):
        raise ModelFormatError("'dim' must be an integer")
    partition = BlockPartition(tuple(tuple(blk) for blk in doc["partition"]))
    if partition.dim != dim:
        raise ModelValidationError(
            f"partition covers {partition.dim} coordinates, dim says {dim}")

    has_prec = "precision" in doc
    has_toep = "toeplitz" in doc
    if has_prec == has_toep:
        raise ModelFormatError(
            "model document needs exactly one of 'precision' or 'toeplitz'")
    if has_prec:
        precision = np.asarray(doc["precision"], dtype=float)
    else:
        spec = doc["toeplitz"]
        try:
            m = int(spec["m"])
            diag = float(spec["diag"])
            band = {int(k): float(v) for k, v in spec["band"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"bad toeplitz block: {exc}")
        if m != dim:
            raise ModelValidationError(
                f"toeplitz size {m} does not match dim {dim}")
        precision = toeplitz_matrix(m, diag, band)

    mean = np.asarray(doc.get("mean", np.zeros(dim)), dtype=float)
    quartic = np.asarray(doc.get("quartic", np.zeros(dim)), dtype=float)
    return GibbsModel(partition=partition, precision=precision,
                      mean=mean, quartic=quartic)


def model_to_dict(model: GibbsModel) -> dict:
    """Document form of a model, suitable for JSON serialization."""
    return {
        "dim": model.dim,
        "partition": [list(blk) for blk in model.partition.blocks],
        "mean": [float(v) for v in model.mean],
        "precision": [[float(v) for v in row] for row in model.precision],
        "quartic": [float(v) for v in model.quartic],
    }


def load_model(path) -> GibbsModel:
    """Load a model from a JSON file.

    The document carries 'dim', 'partition', 'mean' (optional, default 0),
    'quartic' (optional, default 0) and either an explicit 'precision'
    matrix or a banded 'toeplitz' shorthand.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file: {exc}")
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}")
    return model_from_dict(doc)


def save_model(model: GibbsModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")
