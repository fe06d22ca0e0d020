"""Discrete-time stability of the powers of a multiplication operator.

The same three notions as in continuous time, decided through the pointwise
spectral radii: uniform iff ess-sup r(M(s)) < 1, strong iff r(M(s)) < 1 on
every positive-weight cell of a power-bounded sample, almost weak iff no
positive-weight cell carries unit-circle point spectrum. Power boundedness
is certified spectrally (radius below one, or unimodular eigenvalues
semisimple) and observed along a doubling power schedule.
"""

import math
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import DomainError
from .measure import density_discrete, ess_sup
from .report import (
    INCONCLUSIVE,
    NOT_STABLE,
    STABLE,
    Cluster,
    DiscreteReport,
    Witness,
)

NORM_CHECK_THRESHOLD = 1e-6
NORM_CHECK_SAFETY = 3.0
DENSITY_CAP = 0.05

#: the orbit density evidence extends its horizon to DENSITY_SAFETY times the
#: predicted bad-set length (from the spectral gap), capped to keep runtime
#: bounded; beyond the cap the evidence is skipped and the spectral criterion
#: stands alone.
DENSITY_SAFETY = 30.0
DENSITY_MAX_STEPS = 65536


def power_schedule(n_max):
    """Powers to observe: 1, 2, 3, then 2^k and 3*2^(k-1) up to n_max,
    plus n_max itself."""
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    ns = {1, 2, 3}
    k = 4
    while k <= n_max:
        ns.add(k)
        if 3 * k // 2 <= n_max:
            ns.add(3 * k // 2)
        k *= 2
    ns.add(n_max)
    return sorted(n for n in ns if n <= n_max)


def _cell_radii(sample):
    rhos = np.zeros(sample.space.n_cells)
    for c in sample.space.positive_cells():
        rhos[c] = linalg.spectral_radius(sample.block(int(c)))
    return rhos


class PowerBound(NamedTuple):
    bound: float
    certified: bool


def power_bounded_estimate(sample, n_max, *, uni_tol=1e-9, match_tol=1e-6):
    """Observed sup over scheduled n <= n_max of ||M^n||, plus a spectral
    certificate that the true supremum is finite: every positive-weight cell
    must have r(M(s)) < 1, or r(M(s)) <= 1 with every unimodular eigenvalue
    semisimple (rank test on M(s) - lambda I)."""
    schedule = power_schedule(n_max)
    positive = sample.space.positive_cells()
    bound = 0.0
    for n in schedule:
        cell_norms = np.zeros(sample.space.n_cells)
        for c in positive:
            cell_norms[c] = linalg.norm2(np.linalg.matrix_power(sample.block(int(c)), n))
        bound = max(bound, ess_sup(sample.space, cell_norms))
    certified = True
    for c in positive:
        block = sample.block(int(c))
        eigs = linalg.eigenvalues(block)
        radius = float(np.abs(eigs).max())
        if radius < 1.0 - uni_tol:
            continue
        if radius > 1.0 + uni_tol:
            certified = False
            continue
        unimodular = eigs[np.abs(eigs) >= 1.0 - uni_tol]
        for rep in linalg.cluster_representatives(unimodular, match_tol):
            alg, geo = linalg.semisimple_multiplicities(block, rep, match_tol)
            if geo < alg:
                certified = False
                break
    return PowerBound(bound=float(bound), certified=certified)


class DiscreteClassification(NamedTuple):
    verdict: str
    witnesses: tuple
    detail: dict


def classify_discrete_uniform(sample, margin, *, norm_check=True,
                              norm_threshold=NORM_CHECK_THRESHOLD,
                              safety=NORM_CHECK_SAFETY):
    """Uniform stability of the powers: ess-sup of the pointwise spectral
    radii against 1. A Stable verdict is cross-checked on the equivalent
    norm form: ess-sup ||M(s)^n|| must drop below `norm_threshold` within
    safety * log(threshold)/log(rho*) steps."""
    if margin <= linalg.RADIUS_ROUNDOFF:
        raise DomainError("margin must exceed the spectral-radius roundoff floor")
    rhos = _cell_radii(sample)
    rho_star = ess_sup(sample.space, rhos)
    positive = sample.space.positive_cells()
    worst = int(positive[np.argmax(rhos[positive])])
    detail = {"rho_star": rho_star}
    if rho_star >= 1.0 - linalg.RADIUS_ROUNDOFF:
        return DiscreteClassification(
            NOT_STABLE, (Witness(worst, rho_star, "pointwise-spectral-radius"),), detail
        )
    if rho_star >= 1.0 - margin:
        return DiscreteClassification(
            INCONCLUSIVE, (Witness(worst, rho_star, "spectral-radius-in-margin-band"),), detail
        )
    if norm_check:
        if rho_star <= 1e-12:
            n_check = sample.dim
        else:
            n_check = max(1, math.ceil(safety * math.log(norm_threshold) / math.log(rho_star)))
        cell_norms = np.zeros(sample.space.n_cells)
        for c in positive:
            cell_norms[c] = linalg.norm2(np.linalg.matrix_power(sample.block(int(c)), n_check))
        observed = ess_sup(sample.space, cell_norms)
        detail["norm_check_n"] = n_check
        detail["norm_check_value"] = observed
        if observed >= norm_threshold:
            return DiscreteClassification(
                INCONCLUSIVE, (Witness(None, observed, "norm-crosscheck-failed"),), detail
            )
    return DiscreteClassification(STABLE, (), detail)


def classify_discrete_strong(sample, n_max, *, uni_tol=1e-9, match_tol=1e-6):
    """Strong stability of the powers: needs a certified power bound, then
    r(M(s)) < 1 on every positive-weight cell. A cell with a (necessarily
    semisimple, after certification) unimodular eigenvalue is a NotStable
    witness: its eigenvector is a non-decaying orbit."""
    gate = power_bounded_estimate(sample, n_max, uni_tol=uni_tol, match_tol=match_tol)
    detail = {"power_bound": gate.bound, "power_certified": gate.certified}
    if not gate.certified:
        return DiscreteClassification(
            INCONCLUSIVE, (Witness(None, gate.bound, "power-bound-gate-uncertified"),), detail
        )
    for c in sample.space.positive_cells():
        block = sample.block(int(c))
        eigs = linalg.eigenvalues(block)
        radius = float(np.abs(eigs).max())
        if radius >= 1.0 - uni_tol:
            lam = complex(eigs[np.argmax(np.abs(eigs))])
            return DiscreteClassification(
                NOT_STABLE, (Witness(int(c), lam, "unimodular-eigenvalue"),), detail
            )
    return DiscreteClassification(STABLE, (), detail)


def unimodular_point_spectrum(sample, uni_tol=1e-9, match_tol=1e-6):
    """Unit-circle eigenvalues carried by positive-weight cells, clustered
    into balls of radius match_tol (discrete analogue of the imaginary-axis
    point spectrum)."""
    cand_vals = []
    cand_cells = []
    for c in sample.space.positive_cells():
        eigs = linalg.eigenvalues(sample.block(int(c)))
        for lam in eigs[np.abs(np.abs(eigs) - 1.0) <= uni_tol]:
            cand_vals.append(complex(lam))
            cand_cells.append(int(c))
    if not cand_vals:
        return []
    vals = np.asarray(cand_vals)
    cells = np.asarray(cand_cells)
    order = np.lexsort((cells, vals.real, vals.imag))
    vals = vals[order]
    cells = cells[order]
    assigned = np.zeros(vals.size, dtype=bool)
    weights = sample.space.weights
    clusters = []
    for i in range(vals.size):
        if assigned[i]:
            continue
        members = (~assigned) & (np.abs(vals - vals[i]) <= match_tol)
        assigned |= members
        support = sorted(set(cells[members].tolist()))
        clusters.append(
            Cluster(
                eigenvalue=complex(vals[members].mean()),
                cells=tuple(support),
                measure=float(weights[support].sum()),
            )
        )
    return clusters


def classify_discrete_almost_weak(sample, *, n_max=512, eps=1e-3, seed=0,
                                  uni_tol=1e-9, match_tol=1e-6,
                                  density_cap=DENSITY_CAP):
    """Almost weak stability of the powers: certified power bound and no
    unit-circle point spectrum on positive-weight cells (the criterion),
    corroborated by an orbit density test: for random x, phi per cell the
    set {n <= n_max : |<M^n x, phi>| >= eps ||x|| ||phi||} must have density
    at most `density_cap` (evidence, not proof)."""
    gate = power_bounded_estimate(sample, n_max, uni_tol=uni_tol, match_tol=match_tol)
    detail = {"power_bound": gate.bound, "power_certified": gate.certified}
    if not gate.certified:
        return DiscreteClassification(
            INCONCLUSIVE, (Witness(None, gate.bound, "power-bound-gate-uncertified"),), detail
        )
    clusters = unimodular_point_spectrum(sample, uni_tol=uni_tol, match_tol=match_tol)
    if clusters:
        detail["clusters"] = clusters
        witnesses = tuple(
            Witness(cl.cells[0], cl.eigenvalue, "unimodular-eigenvalue-cluster")
            for cl in clusters
        )
        return DiscreteClassification(NOT_STABLE, witnesses, detail)
    # criterion holds; every pointwise radius is below one, so the bad set of
    # each orbit is finite. Give the evidence enough horizon to see that.
    radii = _cell_radii(sample)
    r_max = float(radii[sample.space.positive_cells()].max())
    if 0.0 < r_max < 1.0:
        predicted = math.ceil(DENSITY_SAFETY * math.log(1.0 / eps) / -math.log(r_max))
        n_steps = max(n_max, predicted)
    else:
        n_steps = n_max
    if n_steps > DENSITY_MAX_STEPS:
        detail["bad_density"] = None
        detail["density_skipped"] = True
        return DiscreteClassification(STABLE, (), detail)
    rng = np.random.default_rng(seed)
    worst_density = 0.0
    for c in sample.space.positive_cells():
        block = sample.block(int(c))
        d = block.shape[0]
        x = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        phi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        scale = eps * float(np.linalg.norm(x)) * float(np.linalg.norm(phi))
        bad = []
        v = x.copy()
        for n in range(n_steps):
            if abs(np.vdot(phi, v)) >= scale:
                bad.append(n)
            v = block @ v
        worst_density = max(worst_density, density_discrete(bad, n_steps))
    detail["bad_density"] = worst_density
    if worst_density > density_cap:
        return DiscreteClassification(
            INCONCLUSIVE, (Witness(None, worst_density, "orbit-density-too-high"),), detail
        )
    return DiscreteClassification(STABLE, (), detail)


def build_discrete_report(sample, *, margin, n_max, eps=1e-3, seed=0,
                          uni_tol=1e-9, match_tol=1e-6):
    """Run all three discrete classifiers and assemble the report."""
    gate = power_bounded_estimate(sample, n_max, uni_tol=uni_tol, match_tol=match_tol)
    uniform = classify_discrete_uniform(sample, margin)
    strong = classify_discrete_strong(sample, n_max, uni_tol=uni_tol, match_tol=match_tol)
    almost = classify_discrete_almost_weak(
        sample, n_max=n_max, eps=eps, seed=seed, uni_tol=uni_tol, match_tol=match_tol
    )
    return DiscreteReport(
        uniform=uniform.verdict,
        strong=strong.verdict,
        almost_weak=almost.verdict,
        power_bound=gate.bound,
        power_certified=gate.certified,
        witnesses=uniform.witnesses + strong.witnesses + almost.witnesses,
        bad_density=almost.detail.get("bad_density"),
        tolerances={"margin": margin, "n_max": n_max, "eps": eps, "uni_tol": uni_tol},
    )
