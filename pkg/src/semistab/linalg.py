"""Dense complex matrix kernels.

Matrix exponential by scaling-and-squaring with diagonal Pade approximants,
spectral functionals on top of the LAPACK dense eigensolver, Cesaro time
averages of a semigroup (closed form and composite Simpson), and the mean
ergodic projection onto the kernel of a generator.

Matrices are plain complex ndarrays; the operator norm is the 2-norm
(largest singular value) throughout.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    InvalidMatrixError,
    NumericalFailureError,
    SingularMatrixError,
    UnboundedSemigroupError,
)

CLOSED_FORM = "ClosedForm"
QUADRATURE = "Quadrature"

_EPS = float(np.finfo(float).eps)

#: computed spectral radii of unitary orbits land at 1 +- a few ulps; radii
#: at least 1 - RADIUS_ROUNDOFF are treated as >= 1 by the classifiers.
RADIUS_ROUNDOFF = 1e-12


def as_matrix(a):
    """Validate and return a square complex matrix with finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvalidMatrixError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise InvalidMatrixError("matrix contains NaN or Inf entries")
    return m


def norm2(a):
    """Operator 2-norm (largest singular value)."""
    m = np.asarray(a, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


# Diagonal Pade coefficients and 1-norm switchover thresholds for the
# scaling-and-squaring matrix exponential (orders 3/5/7/9/13).
_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0,
        8821612800.0,
        2075673600.0,
        302702400.0,
        30270240.0,
        2162160.0,
        110880.0,
        3960.0,
        90.0,
        1.0,
    ),
    13: (
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ),
}
_PADE_THETA = (
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
)


def _pade_low(a, coeffs):
    # odd/even split: u = a * (c1 I + c3 a^2 + ...), v = c0 I + c2 a^2 + ...
    n = a.shape[0]
    a2 = a @ a
    pows = [np.eye(n, dtype=complex)]
    for _ in range((len(coeffs) - 1) // 2):
        pows.append(pows[-1] @ a2)
    v = sum(coeffs[2 * j] * pows[j] for j in range((len(coeffs) + 1) // 2))
    u = a @ sum(coeffs[2 * j + 1] * pows[j] for j in range(len(coeffs) // 2))
    return u, v


def _pade13(a):
    c = _PADE_COEFFS[13]
    n = a.shape[0]
    ident = np.eye(n, dtype=complex)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (
        a6 @ (c[13] * a6 + c[11] * a4 + c[9] * a2)
        + c[7] * a6
        + c[5] * a4
        + c[3] * a2
        + c[1] * ident
    )
    v = (
        a6 @ (c[12] * a6 + c[10] * a4 + c[8] * a2)
        + c[6] * a6
        + c[4] * a4
        + c[2] * a2
        + c[0] * ident
    )
    return u, v


def _pade_solve(u, v):
    try:
        return np.linalg.solve(v - u, v + u)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological
        raise NumericalFailureError(f"Pade denominator solve failed: {exc}")


def expm(a, t=1.0):
    """e^{tA} for t >= 0 by scaling-and-squaring with diagonal Pade
    approximants. Accurate to ~1e-13 relative for well-conditioned inputs
    of moderate norm."""
    a = as_matrix(a)
    if t < 0:
        raise DomainError("time must be nonnegative")
    m = t * a
    norm1 = float(np.abs(m).sum(axis=0).max())
    for order, theta in _PADE_THETA[:-1]:
        if norm1 <= theta:
            return _pade_solve(*_pade_low(m, _PADE_COEFFS[order]))
    theta13 = _PADE_THETA[-1][1]
    squarings = max(0, int(np.ceil(np.log2(norm1 / theta13))))
    f = _pade_solve(*_pade13(m / (2.0**squarings)))
    for _ in range(squarings):
        f = f @ f
    return f


def eigenvalues(a):
    """All n eigenvalues with multiplicity (dense QR algorithm)."""
    a = as_matrix(a)
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        # LAPACK caps the implicit QR sweep count at 30 per eigenvalue.
        raise NumericalFailureError(
            f"dense eigensolver did not converge: {exc}", iterations=30 * a.shape[0]
        )


def spectral_bound(a):
    """Largest real part over the spectrum."""
    return float(eigenvalues(a).real.max())


def spectral_radius(a):
    """Largest modulus over the spectrum."""
    return float(np.abs(eigenvalues(a)).max())


@dataclass(frozen=True)
class SpectralSummary:
    """Spectrum of a generator plus the derived stability quantities."""

    eigenvalues: np.ndarray
    spectral_bound: float
    re_tol: float
    imaginary_eigs: np.ndarray = field(init=False)

    def __post_init__(self):
        on_axis = self.eigenvalues[np.abs(self.eigenvalues.real) <= self.re_tol]
        object.__setattr__(self, "imaginary_eigs", on_axis)

    def exp_radius_at(self, t):
        """Spectral radius of e^{tA}; in finite dimension this is exactly
        e^{t * spectral_bound}."""
        return float(np.exp(t * self.spectral_bound))


def summarize(a, re_tol=1e-9):
    eigs = eigenvalues(a)
    return SpectralSummary(
        eigenvalues=eigs, spectral_bound=float(eigs.real.max()), re_tol=re_tol
    )


def cluster_representatives(values, tol):
    """Greedy ball clustering of complex values: walk the values in a
    canonical order (imag, then real) and open a ball of radius tol around
    the first unassigned value. Returns the member means, one per ball."""
    values = np.asarray(values, dtype=complex).ravel()
    if values.size == 0:
        return []
    order = np.lexsort((values.real, values.imag))
    vals = values[order]
    assigned = np.zeros(vals.size, dtype=bool)
    reps = []
    for i in range(vals.size):
        if assigned[i]:
            continue
        members = (~assigned) & (np.abs(vals - vals[i]) <= tol)
        assigned |= members
        reps.append(complex(vals[members].mean()))
    return reps


def semisimple_multiplicities(a, lam, match_tol=1e-6, rank_rtol=1e-8):
    """(algebraic, geometric) multiplicity of the eigenvalue cluster of `a`
    within match_tol of lam; geometric via a rank test on a - lam*I."""
    a = as_matrix(a)
    n = a.shape[0]
    eigs = eigenvalues(a)
    alg = int(np.count_nonzero(np.abs(eigs - lam) <= match_tol))
    shifted = a - lam * np.eye(n)
    sig = np.linalg.svd(shifted, compute_uv=False)
    cut = rank_rtol * max(1.0, float(sig[0]))
    geo = n - int(np.count_nonzero(sig > cut))
    return alg, geo


def ergodic_projection(a, re_tol=1e-9):
    """Spectral projection onto ker A along ran A (the limit of the Cesaro
    means of e^{tA} when the zero eigenvalue is semisimple).

    Returns the zero matrix when 0 is not an eigenvalue (|lambda| <= re_tol)
    and the identity for A = 0. Raises UnboundedSemigroupError when the zero
    eigenvalue is defective, i.e. ker A meets the closure of ran A: the time
    averages then diverge and no projection exists.
    """
    a = as_matrix(a)
    n = a.shape[0]
    u, sig, vh = np.linalg.svd(a)
    scale = float(sig[0])
    cut = max(re_tol, n * _EPS * scale)
    null_dim = int(np.count_nonzero(sig <= cut))
    near_zero = int(np.count_nonzero(np.abs(eigenvalues(a)) <= re_tol))
    if null_dim == 0:
        if near_zero > 0:
            raise UnboundedSemigroupError(
                "zero eigenvalue with no resolvable kernel direction (defective)"
            )
        return np.zeros((n, n), dtype=complex)
    kernel = vh[n - null_dim :].conj().T
    ran = u[:, : n - null_dim]
    basis = np.hstack([kernel, ran])
    gap = float(np.linalg.svd(basis, compute_uv=False)[-1])
    if gap <= 1e-7 or near_zero > null_dim:
        raise UnboundedSemigroupError(
            "zero eigenvalue is defective (kernel meets the range closure); "
            "time averages diverge"
        )
    inv = np.linalg.solve(basis, np.eye(n, dtype=complex))
    return kernel @ inv[:null_dim]


_SIMPSON_START = 64
_SIMPSON_MAX_PANELS = 1 << 20
_SIMPSON_CHUNK = 4096


def _step_powers(e_step, count):
    # e_step^0 .. e_step^{count-1}, filled by batched doubling.
    n = e_step.shape[0]
    out = np.empty((count, n, n), dtype=complex)
    out[0] = np.eye(n)
    filled = 1
    while filled < count:
        take = min(filled, count - filled)
        head = out[filled - 1] @ e_step
        out[filled : filled + take] = np.matmul(head, out[:take])
        filled += take
    return out


def _simpson_estimate(a, t, panels):
    nodes = panels + 1
    h = t / panels
    e_step = expm(a, h)
    w = np.full(nodes, 2.0)
    w[1::2] = 4.0
    w[0] = 1.0
    w[-1] = 1.0
    w *= h / 3.0
    n = a.shape[0]
    table_len = min(_SIMPSON_CHUNK, nodes)
    table = _step_powers(e_step, table_len)
    e_block = table[-1] @ e_step
    total = np.zeros((n, n), dtype=complex)
    carry = np.eye(n, dtype=complex)
    for start in range(0, nodes, table_len):
        m = min(table_len, nodes - start)
        block = table[:m] if start == 0 else np.matmul(carry, table[:m])
        total += np.einsum("b,bij->ij", w[start : start + m], block)
        carry = carry @ e_block
    return total / t


def cesaro_mean(a, t, method=CLOSED_FORM):
    """Time average (1/t) * integral_0^t e^{sA} ds.

    ClosedForm evaluates (1/t) A^{-1} (e^{tA} - I) and requires A to be
    numerically nonsingular. Quadrature runs composite Simpson with the
    panel count doubled until the extrapolated error estimate drops below
    1e-10 * max(1, ||e^{tA}||).
    """
    a = as_matrix(a)
    if t <= 0:
        raise DomainError("averaging window must be positive")
    if method == CLOSED_FORM:
        sig = np.linalg.svd(a, compute_uv=False)
        if sig[0] == 0.0 or sig[-1] < 1e-12 * sig[0]:
            raise SingularMatrixError(
                "generator is numerically singular; use the Quadrature method"
            )
        e = expm(a, t)
        return np.linalg.solve(a, e - np.eye(a.shape[0], dtype=complex)) / t
    if method == QUADRATURE:
        tol = 1e-10 * max(1.0, norm2(expm(a, t)))
        panels = _SIMPSON_START
        prev = _simpson_estimate(a, t, panels)
        while panels <= _SIMPSON_MAX_PANELS:
            panels *= 2
            cur = _simpson_estimate(a, t, panels)
            # composite Simpson is O(h^4): Richardson error estimate
            if norm2(cur - prev) <= 15.0 * tol:
                return cur
            prev = cur
        raise NumericalFailureError(
            f"Simpson refinement did not reach tolerance by {panels} panels",
            iterations=int(np.log2(panels)),
        )
    raise DomainError(f"unknown Cesaro method {method!r}")
