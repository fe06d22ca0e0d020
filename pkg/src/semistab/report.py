"""Verdicts, witnesses, and report containers shared by the classifiers.

Verdicts are the literal strings used in the JSON report. Complex values
serialize as [re, im] pairs.
"""

from dataclasses import dataclass, field

import numpy as np

STABLE = "Stable"
NOT_STABLE = "NotStable"
INCONCLUSIVE = "Inconclusive"

MODE_ATOMIC = "Atomic"
MODE_NONATOMIC_LIMIT = "NonAtomicLimit"


def json_value(v):
    """Convert a scalar to a JSON-safe value; complex becomes [re, im]."""
    if isinstance(v, complex) or isinstance(v, np.complexfloating):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass(frozen=True)
class Witness:
    """One piece of evidence behind a verdict: a cell, a value (eigenvalue,
    norm, or time), and what kind of evidence it is."""

    cell: int | None
    value: object
    kind: str

    def as_dict(self):
        return {
            "cell": None if self.cell is None else int(self.cell),
            "value": json_value(self.value),
            "kind": self.kind,
        }


@dataclass(frozen=True)
class Cluster:
    """An approximate point-spectrum value with its supporting cells."""

    eigenvalue: complex
    cells: tuple
    measure: float

    def as_dict(self):
        return {
            "lambda": json_value(complex(self.eigenvalue)),
            "cells": [int(c) for c in self.cells],
            "measure": float(self.measure),
        }


def _witness_list(ws):
    return [w.as_dict() for w in ws]


@dataclass(frozen=True)
class UniformResult:
    verdict: str
    rho_star: float
    decay_eps: float | None = None
    bound_M: float | None = None
    witnesses: tuple = ()
    times: np.ndarray | None = None
    ess_norms: np.ndarray | None = None
    tolerances: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "rho_star": float(self.rho_star),
            "decay_eps": None if self.decay_eps is None else float(self.decay_eps),
            "bound_M": None if self.bound_M is None else float(self.bound_M),
            "witnesses": _witness_list(self.witnesses),
        }


@dataclass(frozen=True)
class StrongResult:
    verdict: str
    bound_M: float | None = None
    certified: bool = False
    witnesses: tuple = ()
    tolerances: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "bound_M": None if self.bound_M is None else float(self.bound_M),
            "certified": bool(self.certified),
            "witnesses": _witness_list(self.witnesses),
        }


@dataclass(frozen=True)
class AlmostWeakResult:
    verdict: str
    mode: str
    clusters: tuple = ()
    witnesses: tuple = ()
    slope: float | None = None
    intercept: float | None = None
    deltas: tuple = ()
    measures: tuple = ()
    tolerances: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "mode": self.mode,
            "clusters": [c.as_dict() for c in self.clusters],
            "witnesses": _witness_list(self.witnesses),
            "slope": None if self.slope is None else float(self.slope),
            "intercept": None if self.intercept is None else float(self.intercept),
            "deltas": [float(d) for d in self.deltas],
            "measures": [float(m) for m in self.measures],
        }


@dataclass(frozen=True)
class StabilityReport:
    """Aggregate of the three continuous-time verdicts.

    Invariants: decay_eps is present exactly when the uniform verdict is
    Stable, and every NotStable fragment carries at least one witness.
    """

    uniform: UniformResult
    strong: StrongResult
    almost_weak: AlmostWeakResult
    mode: str
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.uniform.verdict == STABLE) != (self.uniform.decay_eps is not None):
            raise ValueError("decay_eps must be present exactly for a Stable uniform verdict")
        for frag in (self.uniform, self.strong, self.almost_weak):
            if frag.verdict == NOT_STABLE and not frag.witnesses:
                raise ValueError("a NotStable verdict needs at least one witness")

    @property
    def bound_M(self):
        if self.strong.bound_M is not None:
            return self.strong.bound_M
        return self.uniform.bound_M

    @property
    def decay_eps(self):
        return self.uniform.decay_eps

    @property
    def witnesses(self):
        return (
            tuple(self.uniform.witnesses)
            + tuple(self.strong.witnesses)
            + tuple(self.almost_weak.witnesses)
        )

    def as_dict(self):
        return {
            "uniform": self.uniform.as_dict(),
            "strong": self.strong.as_dict(),
            "almost_weak": self.almost_weak.as_dict(),
            "mode": self.mode,
            "bound_M": None if self.bound_M is None else float(self.bound_M),
            "decay_eps": None if self.decay_eps is None else float(self.decay_eps),
            "tolerances": {k: json_value(v) for k, v in self.tolerances.items()},
        }


@dataclass(frozen=True)
class DiscreteReport:
    """Verdicts for the powers of a multiplication operator."""

    uniform: str
    strong: str
    almost_weak: str
    power_bound: float
    power_certified: bool
    witnesses: tuple = ()
    bad_density: float | None = None
    tolerances: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "uniform": {"verdict": self.uniform},
            "strong": {"verdict": self.strong},
            "almost_weak": {
                "verdict": self.almost_weak,
                "bad_density": None if self.bad_density is None else float(self.bad_density),
            },
            "power_bound": float(self.power_bound),
            "power_certified": bool(self.power_certified),
            "witnesses": _witness_list(self.witnesses),
            "tolerances": {k: json_value(v) for k, v in self.tolerances.items()},
        }
