"""Multiplication operators and semigroups over a discretized measure space.

A pointwise family assigns one generator matrix per cell; an operator
sample assigns one operator matrix per cell (typically e^{tA(s)} at a fixed
time); vector-valued functions carry one state vector per cell. The norm of
a multiplication operator is the essential supremum of the pointwise
operator norms and is independent of the exponent p.

Cells may carry an `active_dims` entry smaller than the storage dimension:
the cell's operator then lives on the leading block and the trailing
coordinates are inert padding introduced by embedding differently sized
blocks into one space. Norm and spectral queries restrict to the active
block.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import linalg
from .errors import DomainError, ShapeError
from .measure import DiscretizedMeasureSpace, ess_sup


def _check_active(active_dims, n_cells, dim):
    if active_dims is None:
        return None
    active = np.asarray(active_dims, dtype=int)
    if active.shape != (n_cells,):
        raise ShapeError("active_dims must have one entry per cell")
    if np.any(active < 1) or np.any(active > dim):
        raise DomainError("active dimensions must lie in [1, dim]")
    return active


def _check_stack(space, dim, stack, what):
    arr = np.asarray(stack, dtype=complex)
    if arr.shape != (space.n_cells, dim, dim):
        raise ShapeError(
            f"{what} must have shape ({space.n_cells}, {dim}, {dim}), got {arr.shape}"
        )
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ShapeError(f"{what} contain non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class PointwiseFamily:
    """The map s -> A(s): one generator matrix per cell."""

    space: DiscretizedMeasureSpace
    dim: int
    generators: np.ndarray
    active_dims: np.ndarray | None = None
    generator_rule: Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "generators", _check_stack(self.space, self.dim, self.generators, "generators")
        )
        object.__setattr__(
            self, "active_dims", _check_active(self.active_dims, self.space.n_cells, self.dim)
        )

    def block(self, cell):
        """Active block of the generator at `cell`."""
        g = self.generators[cell]
        if self.active_dims is None:
            return g
        k = int(self.active_dims[cell])
        return g[:k, :k]


@dataclass(frozen=True, eq=False)
class OperatorSample:
    """The map s -> M(s) at a fixed time (time_tag) or standalone."""

    space: DiscretizedMeasureSpace
    dim: int
    matrices: np.ndarray
    time_tag: float | None = None
    active_dims: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "matrices", _check_stack(self.space, self.dim, self.matrices, "matrices")
        )
        object.__setattr__(
            self, "active_dims", _check_active(self.active_dims, self.space.n_cells, self.dim)
        )

    def block(self, cell):
        m = self.matrices[cell]
        if self.active_dims is None:
            return m
        k = int(self.active_dims[cell])
        return m[:k, :k]


@dataclass(frozen=True, eq=False)
class BochnerFunction:
    """A vector-valued function: one state vector per cell."""

    space: DiscretizedMeasureSpace
    dim: int
    vectors: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=complex)
        if arr.shape != (self.space.n_cells, self.dim):
            raise ShapeError(
                f"vectors must have shape ({self.space.n_cells}, {self.dim}), got {arr.shape}"
            )
        object.__setattr__(self, "vectors", arr)


def identity_sample(space, dim):
    mats = np.broadcast_to(np.eye(dim, dtype=complex), (space.n_cells, dim, dim)).copy()
    return OperatorSample(space=space, dim=dim, matrices=mats, time_tag=0.0)


def apply(sample, f):
    """(M f)(s) = M(s) f(s), cell by cell."""
    if sample.dim != f.dim or not sample.space.compatible_with(f.space):
        raise ShapeError("operator sample and function live on different spaces")
    out = np.einsum("cij,cj->ci", sample.matrices, f.vectors)
    return BochnerFunction(space=f.space, dim=f.dim, vectors=out)


def lp_norm(f, p=2.0):
    """Bochner p-norm: (sum_i ||f_i||^p mu_i)^(1/p), ess-sup norm for p=inf."""
    if p != math.inf and p < 1:
        raise DomainError("p must satisfy p >= 1 or p = inf")
    cell = np.linalg.norm(f.vectors, axis=1)
    if p == math.inf:
        return ess_sup(f.space, cell)
    mu = f.space.weights
    return float((cell**p @ mu) ** (1.0 / p))


def sample_norms(sample):
    """Per-cell operator 2-norms (active block)."""
    return np.array([linalg.norm2(sample.block(c)) for c in range(sample.space.n_cells)])


def operator_norm(sample, p=2.0):
    """Norm of the multiplication operator: ess-sup over cells of ||M(s)||.

    Independent of p (the same essential supremum for every 1 <= p <= inf);
    p is accepted and validated for interface symmetry only.
    """
    if p != math.inf and p < 1:
        raise DomainError("p must satisfy p >= 1 or p = inf")
    return ess_sup(sample.space, sample_norms(sample))


def trajectory(family, times):
    """Operator samples e^{tA(s)} for each requested time."""
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ShapeError("times must be nonempty")
    if np.any(times < 0):
        raise DomainError("times must be nonnegative")
    if np.any(np.diff(times) < 0):
        raise DomainError("times must be nondecreasing")
    out = []
    for t in times:
        mats = np.stack([linalg.expm(g, float(t)) for g in family.generators])
        out.append(
            OperatorSample(
                space=family.space,
                dim=family.dim,
                matrices=mats,
                time_tag=float(t),
                active_dims=family.active_dims,
            )
        )
    return out


def norm_curves(family, times):
    """(samples, norms) where norms[k, c] = ||e^{t_k A(s_c)}|| on the active block."""
    samples = trajectory(family, times)
    norms = np.stack([sample_norms(s) for s in samples])
    return samples, norms


class BoundEstimate(NamedTuple):
    bound: float
    certified: bool


#: a cell norm counts as a contraction only when it sits below 1 by more
#: than roundoff; unitary orbits evaluate to 1 +- few ulps.
CONTRACTION_TOL = 1e-12


def uniform_bound_estimate(family, t_grid, horizon):
    """Observed sup_t ||e^{tA}|| over the grid, with a contraction certificate.

    certified is True iff every positive-weight cell shows ||e^{dA(s)}|| < 1
    at some grid time d > 0; submultiplicativity then caps the tail beyond
    the grid, so the observed bound controls all t up to grid resolution.
    Otherwise the bound is only what was observed on the grid.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if horizon <= 0:
        raise DomainError("horizon must be positive")
    if t_grid.size and (t_grid.min() < 0 or t_grid.max() > horizon):
        raise DomainError("t_grid must lie inside [0, horizon]")
    _, norms = norm_curves(family, t_grid)
    positive = family.space.positive_cells()
    bound = float(norms[:, positive].max())
    later = t_grid > 0
    contracted = norms[np.ix_(later, positive)] < 1.0 - CONTRACTION_TOL
    return BoundEstimate(bound=bound, certified=bool(contracted.any(axis=0).all()))


def refine_family(family):
    """Refine the underlying space and re-sample generators at the new labels."""
    if family.generator_rule is None:
        raise DomainError("refining a family requires its generator rule")
    space = family.space.refine()
    gens = np.stack([linalg.as_matrix(family.generator_rule(float(s))) for s in space.labels])
    return PointwiseFamily(
        space=space,
        dim=family.dim,
        generators=gens,
        generator_rule=family.generator_rule,
    )


def random_probes(family, count, seed):
    """Reproducible random probe functions, supported on the active blocks."""
    if count < 1:
        raise DomainError("need at least one probe")
    rng = np.random.default_rng(seed)
    probes = []
    for _ in range(count):
        v = rng.standard_normal((family.space.n_cells, family.dim)) + 1j * rng.standard_normal(
            (family.space.n_cells, family.dim)
        )
        if family.active_dims is not None:
            for c, k in enumerate(family.active_dims):
                v[c, int(k):] = 0.0
        probes.append(BochnerFunction(space=family.space, dim=family.dim, vectors=v))
    return probes


def time_grid(horizon, points, log_spacing=True):
    """Default analysis grid on [0, horizon], always including both ends.

    Log spacing spreads points geometrically from horizon/1000 up to the
    horizon (with 0 prepended), which resolves both the short-time transient
    and the long-time decay.
    """
    if horizon <= 0:
        raise DomainError("horizon must be positive")
    if points < 2:
        raise DomainError("need at least two grid points")
    if not log_spacing:
        return np.linspace(0.0, horizon, points)
    body = np.geomspace(horizon * 1e-3, horizon, points - 1)
    return np.concatenate([[0.0], body])
