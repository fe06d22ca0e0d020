"""Continuous-time stability classifiers for pointwise operator families.

Three notions, in decreasing strength:

* uniform    -- ess-sup ||e^{tA(s)}|| -> 0; decided through the essential
                supremum of the pointwise spectral radii at a reference time,
                with an exponential envelope (M, eps) fitted on a trajectory.
* strong     -- ||e^{tA}f|| -> 0 for every f; needs a certified bound on the
                semigroup, then the pointwise spectral bounds, corroborated
                by probe orbits.
* almost weak-- weak convergence to 0 along a time set of density one;
                equivalent (for bounded semigroups on our spaces) to the
                absence of imaginary-axis point spectrum carried by cells of
                positive measure.

Every verdict that depends on a hypothesis (boundedness, margins, horizons)
degrades to Inconclusive rather than guessing when the hypothesis cannot be
certified.
"""

import math
from typing import NamedTuple

import numpy as np

from . import linalg, semigroup
from .errors import DomainError, ShapeError
from .measure import REFINEMENT_FAMILY, density_continuous, ess_sup
from .report import (
    INCONCLUSIVE,
    MODE_ATOMIC,
    MODE_NONATOMIC_LIMIT,
    NOT_STABLE,
    STABLE,
    AlmostWeakResult,
    Cluster,
    StabilityReport,
    StrongResult,
    UniformResult,
    Witness,
)

#: ess-sup trajectory norms must drop below this before the horizon for the
#: norm-decay cross-check of a Stable uniform verdict.
DECAY_CROSSCHECK = 1e-3

#: probe orbits must decay below this fraction of their initial norm.
PROBE_THRESHOLD = 1e-6

#: a weak-orbit evidence test passes when the bad set has at most this density.
DENSITY_CAP = 0.05


def _cell_radii_at(family, t0):
    """Spectral radius of e^{t0 A(s)} per cell (active blocks); zero-weight
    cells are skipped (they are invisible to the essential supremum)."""
    rhos = np.zeros(family.space.n_cells)
    for c in family.space.positive_cells():
        rhos[c] = linalg.spectral_radius(linalg.expm(family.block(int(c)), t0))
    return rhos


def classify_uniform(family, t0, margin, *, horizon=None, grid_points=48,
                     decay_threshold=DECAY_CROSSCHECK, max_extensions=6):
    """Uniform stability via the pointwise spectral radii at time t0.

    rho* = ess-sup_s r(e^{t0 A(s)}).  Stable iff rho* < 1 - margin, with
    decay rate eps = -ln(rho*)/t0 and envelope constant M fitted as
    sup_t ||e^{tA(s)}|| e^{eps t} over a trajectory grid; NotStable iff
    rho* >= 1; Inconclusive inside the margin band.  A Stable verdict is
    cross-checked by requiring the ess-sup trajectory norms to fall below
    `decay_threshold` before the horizon (the horizon auto-extends when not
    supplied, so slow transients do not cause false alarms).
    """
    if t0 <= 0:
        raise DomainError("reference time t0 must be positive")
    if margin <= linalg.RADIUS_ROUNDOFF:
        raise DomainError("margin must exceed the spectral-radius roundoff floor")
    rhos = _cell_radii_at(family, t0)
    rho_star = ess_sup(family.space, rhos)
    positive = family.space.positive_cells()
    worst = int(positive[np.argmax(rhos[positive])])
    tolerances = {"t0": t0, "margin": margin, "decay_threshold": decay_threshold}
    if rho_star >= 1.0 - linalg.RADIUS_ROUNDOFF:
        return UniformResult(
            NOT_STABLE,
            rho_star,
            witnesses=(Witness(worst, rho_star, "pointwise-spectral-radius"),),
            tolerances=tolerances,
        )
    if rho_star >= 1.0 - margin:
        return UniformResult(
            INCONCLUSIVE,
            rho_star,
            witnesses=(Witness(worst, rho_star, "spectral-radius-in-margin-band"),),
            tolerances=tolerances,
        )
    eps = -math.log(rho_star) / t0
    active = family.active_dims
    max_dim = family.dim if active is None else int(active.max())
    fixed_horizon = horizon is not None
    h = float(horizon) if fixed_horizon else max(2 * math.log(1e3) / eps, 4 * max_dim / eps)
    times = ess_norms = None
    decayed = False
    for _ in range(max_extensions + 1):
        times = semigroup.time_grid(h, grid_points)
        _, norms = semigroup.norm_curves(family, times)
        ess_norms = norms[:, positive].max(axis=1)
        decayed = bool(ess_norms[times > 0].min() < decay_threshold)
        if decayed or fixed_horizon:
            break
        h *= 2.0
    tolerances["horizon"] = h
    if not decayed:
        return UniformResult(
            INCONCLUSIVE,
            rho_star,
            witnesses=(
                Witness(None, float(ess_norms[times > 0].min()), "norm-decay-crosscheck-failed"),
            ),
            tolerances=tolerances,
        )
    bound = max(1.0, float((ess_norms * np.exp(eps * times)).max()))
    return UniformResult(
        STABLE,
        rho_star,
        decay_eps=eps,
        bound_M=bound,
        times=times,
        ess_norms=ess_norms,
        tolerances=tolerances,
    )


class BoundednessCertificate(NamedTuple):
    certified: bool
    bound: float
    witnesses: tuple


def certify_bounded(family, horizon, *, grid_points=48, re_tol=1e-9, match_tol=1e-6,
                    times=None, norms=None):
    """Certify sup_t ||e^{tA}|| < inf and report the bound observed on a grid.

    A cell is certified either by eventual contraction (some grid norm < 1,
    which caps the tail by submultiplicativity) or spectrally: all
    eigenvalues in the closed left half plane and every eigenvalue on the
    imaginary axis semisimple.  Both certificates are sound in finite
    dimension; the spectral one also covers purely oscillatory cells that
    never contract.
    """
    if times is None:
        times = semigroup.time_grid(horizon, grid_points)
        _, norms = semigroup.norm_curves(family, times)
    positive = family.space.positive_cells()
    bound = float(norms[:, positive].max())
    later = times > 0
    witnesses = []
    certified = True
    for c in positive:
        if bool((norms[later, c] < 1.0 - semigroup.CONTRACTION_TOL).any()):
            continue
        block = family.block(int(c))
        eigs = linalg.eigenvalues(block)
        bound_re = float(eigs.real.max())
        if bound_re > re_tol:
            certified = False
            witnesses.append(Witness(int(c), bound_re, "positive-spectral-bound"))
            continue
        on_axis = eigs[np.abs(eigs.real) <= re_tol]
        for rep in linalg.cluster_representatives(on_axis, match_tol):
            alg, geo = linalg.semisimple_multiplicities(block, rep, match_tol)
            if geo < alg:
                certified = False
                witnesses.append(Witness(int(c), rep, "defective-imaginary-eigenvalue"))
                break
    return BoundednessCertificate(certified, bound, tuple(witnesses))


def _restrict_probe(family, probe):
    if family.active_dims is None:
        return probe
    vectors = probe.vectors.copy()
    for c, k in enumerate(family.active_dims):
        vectors[c, int(k):] = 0.0
    return semigroup.BochnerFunction(space=probe.space, dim=probe.dim, vectors=vectors)


def classify_strong(family, horizon, probes, *, p=2.0, re_tol=1e-9, grid_points=48,
                    probe_threshold=PROBE_THRESHOLD, match_tol=1e-6):
    """Strong stability: certified bound, then pointwise spectral bounds
    strictly negative on every positive-weight cell, corroborated by probe
    orbits decaying below `probe_threshold` of their initial norm.

    An uncertified bound or a non-decaying probe yields Inconclusive; a cell
    with nonnegative spectral bound yields NotStable with that cell as the
    witness.
    """
    if not probes:
        raise ShapeError("probes must be nonempty")
    times = semigroup.time_grid(horizon, grid_points)
    samples, norms = semigroup.norm_curves(family, times)
    gate = certify_bounded(
        family, horizon, re_tol=re_tol, match_tol=match_tol, times=times, norms=norms
    )
    tolerances = {
        "horizon": horizon,
        "p": p,
        "re_tol": re_tol,
        "probe_threshold": probe_threshold,
    }
    if not gate.certified:
        return StrongResult(
            INCONCLUSIVE,
            bound_M=gate.bound,
            certified=False,
            witnesses=gate.witnesses + (Witness(None, gate.bound, "boundedness-gate-uncertified"),),
            tolerances=tolerances,
        )
    witnesses = []
    verdict = STABLE
    for c in family.space.positive_cells():
        eigs = linalg.eigenvalues(family.block(int(c)))
        lam = complex(eigs[np.argmax(eigs.real)])
        if lam.real >= 0.0:
            return StrongResult(
                NOT_STABLE,
                bound_M=gate.bound,
                certified=True,
                witnesses=(Witness(int(c), lam, "nonnegative-spectral-bound"),),
                tolerances=tolerances,
            )
        if lam.real >= -re_tol:
            verdict = INCONCLUSIVE
            witnesses.append(Witness(int(c), lam, "spectral-bound-inside-tolerance-band"))
    if verdict == STABLE:
        for idx, probe in enumerate(probes):
            restricted = _restrict_probe(family, probe)
            base = semigroup.lp_norm(restricted, p)
            if base == 0.0:
                raise DomainError(f"probe {idx} has zero norm on the active blocks")
            decayed = False
            for sample in samples[1:]:
                ratio = semigroup.lp_norm(semigroup.apply(sample, restricted), p) / base
                if ratio <= probe_threshold:
                    decayed = True
                    break
            if not decayed:
                verdict = INCONCLUSIVE
                witnesses.append(Witness(None, float(times[-1]), "probe-did-not-decay"))
    return StrongResult(
        verdict,
        bound_M=gate.bound,
        certified=True,
        witnesses=tuple(witnesses),
        tolerances=tolerances,
    )


def imaginary_point_spectrum(family, re_tol=1e-9, match_tol=1e-6):
    """Eigenvalues on the imaginary axis carried by cells of positive weight,
    clustered across cells into balls of radius match_tol.

    Each cluster reports a representative value, the supporting cell ids,
    and their total measure. On an atomic space any cluster certifies the
    representative as an approximate eigenvalue of the multiplication
    operator, since its support has positive measure.
    """
    if re_tol <= 0 or match_tol <= 0:
        raise DomainError("tolerances must be positive")
    cand_vals = []
    cand_cells = []
    for c in family.space.positive_cells():
        eigs = linalg.eigenvalues(family.block(int(c)))
        for lam in eigs[np.abs(eigs.real) <= re_tol]:
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
    weights = family.space.weights
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


def classify_almost_weak(family, *, mode=None, re_tol=1e-9, match_tol=1e-6, horizon=50.0,
                         grid_points=33, delta_sweep=(0.1, 0.05, 0.025), slope_cap=2.1,
                         intercept_tol=None):
    """Almost weak stability via imaginary-axis point spectrum.

    Atomic mode: Stable iff no imaginary eigenvalue cluster of positive
    measure exists (the clusters are exactly the witness sets reported on a
    NotStable verdict). NonAtomicLimit mode: sweeps the cluster radius delta
    while refining the space, and declares stability in the limit iff the
    largest cluster measure vanishes linearly in delta (fitted slope at most
    `slope_cap` and intercept within the finest cell width).
    """
    if mode is None:
        mode = (
            MODE_NONATOMIC_LIMIT
            if family.space.mode == REFINEMENT_FAMILY
            else MODE_ATOMIC
        )
    if mode not in (MODE_ATOMIC, MODE_NONATOMIC_LIMIT):
        raise DomainError(f"unknown analysis mode {mode!r}")
    times = semigroup.time_grid(horizon, grid_points)
    _, norms = semigroup.norm_curves(family, times)
    gate = certify_bounded(family, horizon, re_tol=re_tol, times=times, norms=norms)
    tolerances = {"re_tol": re_tol, "match_tol": match_tol, "horizon": horizon}
    if not gate.certified:
        return AlmostWeakResult(
            INCONCLUSIVE,
            mode,
            witnesses=gate.witnesses + (Witness(None, gate.bound, "boundedness-gate-uncertified"),),
            tolerances=tolerances,
        )
    if mode == MODE_ATOMIC:
        clusters = imaginary_point_spectrum(family, re_tol, match_tol)
        if clusters:
            witnesses = tuple(
                Witness(cl.cells[0], cl.eigenvalue, "imaginary-eigenvalue-cluster")
                for cl in clusters
            )
            return AlmostWeakResult(
                NOT_STABLE, mode, tuple(clusters), witnesses, tolerances=tolerances
            )
        return AlmostWeakResult(STABLE, mode, tolerances=tolerances)
    deltas = tuple(float(d) for d in delta_sweep)
    if len(deltas) < 2:
        raise DomainError("the delta sweep needs at least two radii")
    if any(d <= 0 for d in deltas):
        raise DomainError("cluster radii must be positive")
    measures = []
    fam = family
    last_clusters = ()
    for j, delta in enumerate(deltas):
        if j > 0:
            fam = semigroup.refine_family(fam)
        clusters = imaginary_point_spectrum(fam, re_tol, match_tol=delta)
        last_clusters = tuple(clusters)
        measures.append(max((cl.measure for cl in clusters), default=0.0))
    tolerances["delta_sweep"] = list(deltas)
    tolerances["slope_cap"] = slope_cap
    if max(measures) == 0.0:
        return AlmostWeakResult(
            STABLE, mode, slope=0.0, intercept=0.0, deltas=deltas,
            measures=tuple(measures), tolerances=tolerances,
        )
    slope, intercept = (float(v) for v in np.polyfit(deltas, measures, 1))
    width = float(fam.space.widths.max()) if fam.space.widths is not None else 0.0
    cap = max(2.0 * width, 1e-9) if intercept_tol is None else intercept_tol
    if slope <= slope_cap and intercept <= cap:
        verdict, witnesses = STABLE, ()
    else:
        verdict = NOT_STABLE
        worst = max(last_clusters, key=lambda cl: cl.measure)
        witnesses = (Witness(worst.cells[0], worst.eigenvalue, "cluster-measure-does-not-vanish"),)
    return AlmostWeakResult(
        verdict,
        mode,
        last_clusters,
        witnesses,
        slope=slope,
        intercept=intercept,
        deltas=deltas,
        measures=tuple(measures),
        tolerances=tolerances,
    )


class WeakOrbitEvidence(NamedTuple):
    bad_density: float
    passed: bool


def weak_orbit_density_test(a, x, phi, horizon, eps, *, n_points=2048,
                            density_cap=DENSITY_CAP):
    """Finite-horizon evidence for weak decay of one orbit.

    Samples w(t) = |<e^{tA}x, phi>| on a uniform grid over [0, horizon] and
    estimates the density of the bad set {t : w(t) >= eps ||x|| ||phi||}.
    Passes when that density is at most `density_cap`. Evidence only, not
    proof: the horizon is finite.
    """
    a = linalg.as_matrix(a)
    x = np.asarray(x, dtype=complex).ravel()
    phi = np.asarray(phi, dtype=complex).ravel()
    n = a.shape[0]
    if x.shape != (n,) or phi.shape != (n,):
        raise ShapeError("x and phi must match the matrix dimension")
    nx = float(np.linalg.norm(x))
    nphi = float(np.linalg.norm(phi))
    if nx == 0.0 or nphi == 0.0:
        raise DomainError("x and phi must be nonzero")
    if horizon <= 0 or eps <= 0:
        raise DomainError("horizon and eps must be positive")
    if n_points < 2:
        raise DomainError("need at least two sample points")
    step = linalg.expm(a, horizon / (n_points - 1))
    vals = np.empty(n_points)
    v = x.copy()
    for k in range(n_points):
        vals[k] = abs(np.vdot(phi, v))
        v = step @ v
    bad = (vals >= eps * nx * nphi).astype(float)
    density = density_continuous(bad, horizon)
    return WeakOrbitEvidence(bad_density=density, passed=density <= density_cap)


def cesaro_verify(a, x, t_list, *, re_tol=1e-9):
    """Residuals ||S(t)x - Px|| of the Cesaro means against the mean ergodic
    projection, at the requested times.

    Uses the closed form when the generator is nonsingular and Simpson
    quadrature otherwise. Raises UnboundedSemigroupError (via the
    projection) when the zero eigenvalue is defective.
    """
    a = linalg.as_matrix(a)
    x = np.asarray(x, dtype=complex).ravel()
    if x.shape != (a.shape[0],):
        raise ShapeError("x must match the matrix dimension")
    t_arr = np.asarray(t_list, dtype=float)
    if t_arr.size == 0:
        raise ShapeError("need at least one time")
    if np.any(t_arr <= 0) or np.any(np.diff(t_arr) < 0):
        raise DomainError("times must be positive and nondecreasing")
    projection = linalg.ergodic_projection(a, re_tol)
    px = projection @ x
    sig = np.linalg.svd(a, compute_uv=False)
    nonsingular = sig[0] > 0 and sig[-1] >= 1e-12 * sig[0]
    method = linalg.CLOSED_FORM if nonsingular else linalg.QUADRATURE
    out = []
    for t in t_arr:
        mean = linalg.cesaro_mean(a, float(t), method)
        out.append((float(t), float(np.linalg.norm(mean @ x - px))))
    return out


def build_report(uniform, strong, almost_weak):
    """Assemble the aggregate report from the three classifier fragments."""
    tolerances = {}
    for frag in (uniform, strong, almost_weak):
        tolerances.update(frag.tolerances)
    return StabilityReport(
        uniform=uniform,
        strong=strong,
        almost_weak=almost_weak,
        mode=almost_weak.mode,
        tolerances=tolerances,
    )
