"""Finite weighted discretizations of a measure space.

A space is a list of cells (index = cell id) carrying a nonnegative weight
and a real parameter label. Almost-everywhere statements become statements
over the cells of positive weight; null sets are cells of weight zero.
Densities of time sets are estimated on finite horizons.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpaceError, DomainError, ShapeError

ATOMIC = "Atomic"
REFINEMENT_FAMILY = "RefinementFamily"


@dataclass(frozen=True, eq=False)
class DiscretizedMeasureSpace:
    """Weighted cell decomposition; cell ids run 0..n-1 in array order."""

    weights: np.ndarray
    labels: np.ndarray
    mode: str = ATOMIC
    refinement_level: int = 1
    widths: np.ndarray | None = None

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        labels = np.asarray(self.labels, dtype=float)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)
        if weights.ndim != 1 or weights.size == 0:
            raise ShapeError("weights must be a nonempty 1-d array")
        if labels.shape != weights.shape:
            raise ShapeError("labels must match weights in length")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise DomainError("cell weights must be finite and nonnegative")
        if not np.any(weights > 0):
            raise DegenerateSpaceError("at least one cell must have positive weight")
        if self.mode not in (ATOMIC, REFINEMENT_FAMILY):
            raise DomainError(f"unknown space mode {self.mode!r}")
        if self.refinement_level < 1:
            raise DomainError("refinement_level must be a positive integer")
        if self.widths is not None:
            widths = np.asarray(self.widths, dtype=float)
            object.__setattr__(self, "widths", widths)
            if widths.shape != weights.shape:
                raise ShapeError("widths must match weights in length")
            if np.any(widths <= 0):
                raise DomainError("cell widths must be positive")

    @property
    def n_cells(self):
        return self.weights.size

    @property
    def cell_ids(self):
        return np.arange(self.n_cells)

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def positive_cells(self):
        """Ids of the cells that carry measure."""
        return np.flatnonzero(self.weights > 0)

    def compatible_with(self, other):
        return (
            self.n_cells == other.n_cells
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.labels, other.labels)
        )

    @classmethod
    def uniform_grid(cls, cells, lo=0.0, hi=1.0):
        """Uniform grid of `cells` cells over [lo, hi] with Lebesgue weights,
        labeled by midpoints. Starts a refinement family at level 1."""
        if cells < 1:
            raise DomainError("need at least one cell")
        if hi <= lo:
            raise DomainError("interval must have positive length")
        width = (hi - lo) / cells
        labels = lo + (np.arange(cells) + 0.5) * width
        return cls(
            weights=np.full(cells, width),
            labels=labels,
            mode=REFINEMENT_FAMILY,
            refinement_level=1,
            widths=np.full(cells, width),
        )

    def refine(self):
        """Split every cell into two halves: weights halve, total weight is
        preserved, labels move to the sub-midpoints."""
        if self.mode != REFINEMENT_FAMILY:
            raise DomainError("only refinement-family spaces can be refined")
        if self.widths is None:
            raise DomainError("refinement needs per-cell widths")
        n = self.n_cells
        weights = np.repeat(self.weights / 2.0, 2)
        widths = np.repeat(self.widths / 2.0, 2)
        labels = np.empty(2 * n)
        labels[0::2] = self.labels - self.widths / 4.0
        labels[1::2] = self.labels + self.widths / 4.0
        return DiscretizedMeasureSpace(
            weights=weights,
            labels=labels,
            mode=REFINEMENT_FAMILY,
            refinement_level=self.refinement_level + 1,
            widths=widths,
        )


def ess_sup(space, values):
    """Essential supremum of a per-cell value array: the max over cells of
    positive weight. Zero-weight cells are null sets and do not count."""
    values = np.asarray(values, dtype=float)
    if values.shape != (space.n_cells,):
        raise ShapeError(
            f"expected {space.n_cells} per-cell values, got shape {values.shape}"
        )
    positive = space.weights > 0
    if not np.any(positive):
        raise DegenerateSpaceError("space carries no measure")
    return float(values[positive].max())


def density_continuous(indicator_values, horizon):
    """Fraction of [0, horizon] occupied by a time set, estimated by the
    trapezoid rule from 0/1 samples on a uniform grid (endpoints included).

    This is a finite-horizon estimate of the asymptotic density; the true
    limit is not computable from samples.
    """
    values = np.asarray(indicator_values, dtype=float).ravel()
    if values.size < 2:
        raise ShapeError("need at least two grid samples (positive spacing)")
    if horizon <= 0:
        raise DomainError("horizon must be positive")
    spacing = horizon / (values.size - 1)
    occupied = float(np.trapezoid(values, dx=spacing))
    return occupied / horizon


def density_discrete(members, horizon):
    """|{k : n_k < horizon}| / horizon for a set of naturals."""
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    members = np.asarray(members)
    if members.size == 0:
        return 0.0
    return float(np.count_nonzero(members < horizon)) / float(horizon)
