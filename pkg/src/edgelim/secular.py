"""Eigendecomposition of a real diagonal plus a Hermitian rank-1 term.

For D = diag(d_1 <= ... <= d_m), rho > 0 and a unit vector z, the eigenvalues
of D + rho z z^H are the roots of

    f(lam) = 1 + rho * sum_j |z_j|^2 / (d_j - lam),

one root strictly inside each interval (d_j, d_{j+1}) (the last interval
capped at d_m + rho).  Components with z_j = 0, and all but one member of any
group of equal d_j, do not move at all and are deflated away before root
finding.  Roots are located by a bracketed two-pole (hyperbolic) iteration
with a bisection fallback; eigenvectors are assembled from weights recomputed
to be exactly consistent with the computed roots, which keeps them orthogonal
even when roots cluster.

All heavy lifting is done on the real problem with weights |z_j|^2; complex
phases of z enter only when eigenvectors are assembled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "RankOneProblem",
    "DeflationResult",
    "SecularRoots",
    "RankOneEig",
    "deflate",
    "apply_deflation",
    "solve_secular",
    "eigenvectors",
    "rank_one_eig",
    "debug_dump",
]

_EPS = float(np.finfo(float).eps)
DEFAULT_DEFLATION_TOL = 64.0 * _EPS


@dataclass(frozen=True)
class RankOneProblem:
    """One rank-1 update: sorted real d, positive rho, unit complex z."""

    d: np.ndarray
    rho: float
    z: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        z = np.asarray(self.z, dtype=complex)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "z", z)
        if d.ndim != 1 or z.shape != d.shape:
            raise ValueError("d and z must be vectors of equal length")
        if np.any(np.diff(d) < 0):
            raise ValueError("d must be sorted non-decreasing")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        nrm = np.linalg.norm(z)
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"z must have unit norm, got {nrm}")

    @property
    def m(self) -> int:
        return self.d.size


@dataclass(frozen=True)
class DeflationResult:
    """Which components stay in the secular solve and how the rest were fixed.

    ``phase_scalings[j]`` is the unit scalar making z_j real nonnegative;
    ``rotations`` are plane rotations (i, j, c, s) applied in order among
    equal-d components, each moving the remaining weight of component i onto
    component j; ``locked_eigenpairs`` are (index, d_index) pairs whose
    eigenpair is already exact.
    """

    kept: tuple[int, ...]
    rotations: tuple[tuple[int, int, float, float], ...]
    phase_scalings: tuple[complex, ...]
    locked_eigenpairs: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class SecularRoots:
    """Roots of the secular equation and their normalized shifts.

    ``lam[j] = d[j] + rho * mu[j]``.  ``pole`` and ``tau`` record each root as
    an offset from its nearest pole (``lam[j] = d[pole[j]] + tau[j]``), which
    downstream eigenvector assembly uses to evaluate differences lam - d_i
    without cancellation.
    """

    lam: np.ndarray
    mu: np.ndarray
    pole: np.ndarray
    tau: np.ndarray


class RankOneEig(NamedTuple):
    """Full-pipeline result: unitary q, ascending eigenvalues, flags."""

    q: np.ndarray
    lam: np.ndarray
    trivial: bool
    n_deflated: int


def deflate(p: RankOneProblem, tol: float | None = None) -> DeflationResult:
    """Split the problem into locked eigenpairs and a kept secular system.

    Components with |z_j| below ``tol`` (relative to ||z|| = 1) keep their
    eigenvalue d_j outright.  Within each group of (nearly) equal d values a
    chain of plane rotations concentrates the group's weight onto its last
    member, after which the zeroed members lock as well.  The kept system has
    strictly increasing d and all-positive weights.
    """
    if tol is None:
        tol = DEFAULT_DEFLATION_TOL
    d, z = p.d, p.z
    m = p.m
    absz = np.abs(z)
    phases = np.where(absz > 0, z / np.where(absz > 0, absz, 1.0), 1.0 + 0.0j)
    v = absz.copy()

    tol_d = tol * max(1.0, float(np.max(np.abs(d))) if m else 1.0)
    rotations: list[tuple[int, int, float, float]] = []
    i = 0
    while i < m:
        j = i
        while j + 1 < m and d[j + 1] - d[i] <= tol_d:
            j += 1
        for a in range(i, j):
            # Move component a's weight onto a+1 (both have "the same" d).
            r = float(np.hypot(v[a], v[a + 1]))
            if r == 0.0 or v[a] == 0.0:
                continue
            c, s = v[a + 1] / r, v[a] / r
            rotations.append((a, a + 1, c, s))
            v[a + 1] = r
            v[a] = 0.0
        i = j + 1

    kept = tuple(int(k) for k in np.nonzero(v > tol)[0])
    locked = tuple((int(k), float(d[k])) for k in range(m) if v[k] <= tol)
    return DeflationResult(kept, tuple(rotations), tuple(phases), locked)


def apply_deflation(res: DeflationResult, z: np.ndarray) -> np.ndarray:
    """Apply the recorded phases and rotations to a vector.

    Applied to the problem's own z this yields a real nonnegative vector that
    vanishes (to tolerance) outside the kept components.
    """
    w = np.conj(np.asarray(res.phase_scalings)) * np.asarray(z, dtype=complex)
    for (a, b, c, s) in res.rotations:
        wa, wb = w[a], w[b]
        w[a] = c * wa - s * wb
        w[b] = s * wa + c * wb
    return w


def _quadratic_roots_in(qa, qb, qc, lo, hi):
    """Per-column root of qa t^2 + qb t + qc inside (lo, hi), else midpoint."""
    out = 0.5 * (lo + hi)
    taken = np.zeros(out.shape, dtype=bool)
    disc = qb * qb - 4.0 * qa * qc
    ok = (qa != 0.0) & (disc >= 0.0)
    sq = np.sqrt(np.where(disc >= 0.0, disc, 0.0))
    q = -0.5 * (qb + np.copysign(sq, qb))  # stable split: big root first
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(ok, q / np.where(qa != 0.0, qa, 1.0), np.nan)
        r2 = np.where(ok & (q != 0.0), qc / np.where(q != 0.0, q, 1.0), np.nan)
        rlin = np.where((qa == 0.0) & (qb != 0.0),
                        -qc / np.where(qb != 0.0, qb, 1.0), np.nan)
    for cand in (r1, r2, rlin):
        use = ~taken & (lo < cand) & (cand < hi)
        out = np.where(use, cand, out)
        taken |= use
    return out


def _solve_all_intervals(d: np.ndarray, rho: float, w: np.ndarray, total: float,
                         maxiter: int = 200):
    """All m roots at once: lockstep bracketed two-pole iteration.

    Interval j is (d_j, d_{j+1}), the last one (d_m, d_m + rho*total).  Each
    root is tracked as an offset tau from the nearer interval end (its origin
    pole) and kept strictly inside a shrinking bracket with a guaranteed sign
    change; every sweep fits one hyperbola to the pole terms at-or-below the
    interval and one to those above (matching value and slope), jumps to the
    model root, and falls back to the bracket midpoint when the jump escapes.
    """
    m = d.size
    jdx = np.arange(m)
    gaps = np.diff(d)
    width = np.append(gaps, rho * total)

    # Origin pole per interval: the end the root is closer to, decided by the
    # sign of f at the interior midpoints (f increases across each interval).
    pole = jdx.copy()
    if m > 1:
        mids = d[:-1] + 0.5 * gaps
        fmid = 1.0 + rho * (w[:, None] / (d[:, None] - mids[None, :])).sum(axis=0)
        pole[:-1] = np.where(fmid >= 0.0, jdx[:-1], jdx[1:])
    delta = d[:, None] - d[pole][None, :]  # (k, j): d_k relative to origin j
    left = pole == jdx
    lo = np.where(left, 0.0, -width)
    hi = np.where(left, width, 0.0)

    # Initial guesses: the point where the two adjacent pole terms balance
    # (weighted by sqrt of the weights); first-order shift for the last root.
    tau = np.empty(m)
    if m > 1:
        sq = np.sqrt(w)
        bal = sq[:-1] * gaps / (sq[:-1] + sq[1:])
        tau[:-1] = np.where(left[:-1], bal, bal - gaps)
    tau[-1] = rho * w[-1] if 0.0 < rho * w[-1] < width[-1] else 0.5 * width[-1]
    off = ~((lo < tau) & (tau < hi))
    tau[off] = 0.5 * (lo[off] + hi[off])

    active = np.ones(m, dtype=bool)
    for _ in range(maxiter):
        diff = delta - tau[None, :]
        terms = w[:, None] / diff
        f = 1.0 + rho * terms.sum(axis=0)
        scale = 1.0 + abs(rho) * np.abs(terms).sum(axis=0)
        active &= np.abs(f) > 8.0 * _EPS * scale
        neg = active & (f < 0.0)
        pos = active & (f >= 0.0)
        lo[neg] = tau[neg]
        hi[pos] = tau[pos]
        active &= (hi - lo) > 2.0 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        if not active.any():
            break

        terms2 = terms / diff
        psi = np.cumsum(terms, axis=0)[jdx, jdx]
        psip = np.cumsum(terms2, axis=0)[jdx, jdx]
        phi = terms.sum(axis=0) - psi
        phip = terms2.sum(axis=0) - psip
        du = diff[jdx, jdx]
        c1 = psip * du * du
        k0 = 1.0 + rho * (psi - psip * du)

        nxt = 0.5 * (lo + hi)
        if m > 1:
            dv = diff[jdx[:-1] + 1, jdx[:-1]]
            c2 = phip[:-1] * dv * dv
            k0i = k0[:-1] + rho * (phi[:-1] - phip[:-1] * dv)
            aj = delta[jdx[:-1], jdx[:-1]]
            bj = delta[jdx[:-1] + 1, jdx[:-1]]
            qa = k0i
            qb = -k0i * (aj + bj) - rho * (c1[:-1] + c2)
            qc = k0i * aj * bj + rho * (c1[:-1] * bj + c2 * aj)
            nxt[:-1] = _quadratic_roots_in(qa, qb, qc, lo[:-1], hi[:-1])
        if k0[-1] > 0.0:
            cand = delta[m - 1, m - 1] + rho * c1[-1] / k0[-1]
            if lo[-1] < cand < hi[-1]:
                nxt[-1] = cand

        inside = (lo < nxt) & (nxt < hi)
        nxt = np.where(inside, nxt, 0.5 * (lo + hi))
        active &= nxt != tau
        tau = np.where(active, nxt, tau)

    # Never return the bracket endpoints themselves.
    out = (tau <= lo) | (tau >= hi)
    tau[out] = 0.5 * (lo[out] + hi[out])
    return pole, tau


def solve_secular(d: np.ndarray, rho: float, zabs2: np.ndarray) -> SecularRoots:
    """All m roots of the secular equation of a deflated system.

    Requires strictly increasing d, positive weights summing to 1 (within
    1e-6), rho > 0.  Returns roots in ascending order, one per interval, with
    the normalized shifts mu = (lam - d)/rho.
    """
    d = np.asarray(d, dtype=float)
    w = np.asarray(zabs2, dtype=float)
    if d.ndim != 1 or w.shape != d.shape:
        raise ValueError("d and zabs2 must be vectors of equal length")
    m = d.size
    if m == 0:
        return SecularRoots(np.zeros(0), np.zeros(0), np.zeros(0, int), np.zeros(0))
    if m > 1 and np.any(np.diff(d) <= 0):
        raise ValueError("d must be strictly increasing; deflate the problem first")
    if np.any(w <= 0):
        raise ValueError("all weights must be positive; deflate the problem first")
    if not rho > 0:
        raise ValueError("rho must be positive")
    total = float(w.sum())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"weights must sum to 1 (got {total}); normalize the problem")

    if m == 1:
        pole = np.zeros(1, dtype=int)
        tau = np.array([rho * total])  # 1 + rho*w/(d - lam) = 0 exactly
    else:
        pole, tau = _solve_all_intervals(d, rho, w, total)
    lam = d[pole] + tau
    mu = (d[pole] - d[np.arange(m)] + tau) / rho
    return SecularRoots(lam, mu, pole, tau)


def _root_minus_pole(d: np.ndarray, roots: SecularRoots) -> np.ndarray:
    """Matrix of differences lam_j - d_i, evaluated without cancellation.

    Entry (j, i) is (d[pole_j] - d_i) + tau_j, which is exact when root j's
    origin pole is d_i itself.
    """
    return (d[roots.pole][:, None] - d[None, :]) + roots.tau[:, None]


def _loewner_weights(d: np.ndarray, rho: float, roots: SecularRoots,
                     diff: np.ndarray) -> np.ndarray:
    """Weights exactly consistent with the computed roots.

    From the root/pole product form of the secular function, the weight of
    component i must equal prod_j (lam_j - d_i) / (rho * prod_{j!=i}
    (d_j - d_i)); using these instead of the input weights makes the
    eigenvector matrix orthogonal to machine precision.
    """
    m = d.size
    den = d[:, None] - d[None, :]  # (j, i) -> d_j - d_i
    np.fill_diagonal(den, 1.0)
    ratio = diff / den
    ratio[np.arange(m), np.arange(m)] = diff.diagonal() / rho
    return ratio.prod(axis=0)


def eigenvectors(p: RankOneProblem, roots: SecularRoots) -> np.ndarray:
    """Unit eigenvectors of D + rho z z^H for a kept (deflated) problem.

    Column j is proportional to z_i / (d_i - lam_j) componentwise, but with
    |z_i| replaced by the root-consistent weights; the original phases of z
    are reattached afterwards.
    """
    d, rho, z = p.d, p.rho, p.z
    diff = _root_minus_pole(d, roots)
    w = _loewner_weights(d, rho, roots, diff)
    if np.any(w <= 0):
        # Interlacing guarantees positivity; numeric dust can only appear for
        # weights that should have been deflated.
        w = np.maximum(w, _EPS**2)
    absz = np.abs(z)
    phases = np.where(absz > 0, z / np.where(absz > 0, absz, 1.0), 1.0 + 0.0j)
    q = np.sqrt(w)[:, None] / (-diff.T)  # (i, j) -> zhat_i / (d_i - lam_j)
    q /= np.linalg.norm(q, axis=0, keepdims=True)
    return phases[:, None] * q


def _solve_sorted(d: np.ndarray, rho: float, z: np.ndarray, tol: float | None):
    """Eigendecomposition for sorted d and rho > 0, ||z|| = 1."""
    m = d.size
    prob = RankOneProblem(d, rho, z)
    defl = deflate(prob, tol)
    v = apply_deflation(defl, z)
    kept = list(defl.kept)
    n_locked = m - len(kept)

    lam = d.astype(float).copy()
    qreal = np.eye(m)
    if kept:
        dk = d[np.array(kept)]
        wk = np.abs(v[np.array(kept)]) ** 2
        wk = wk / wk.sum()  # renormalize away the locked dust
        roots = solve_secular(dk, rho, wk)
        kp = RankOneProblem(dk, rho, np.sqrt(wk).astype(complex))
        qk = eigenvectors(kp, roots).real
        lam[np.array(kept)] = roots.lam
        qreal[np.ix_(kept, kept)] = qk

    # Undo the deflation rotations (rows) and reattach phases.
    for (a, b, c, s) in reversed(defl.rotations):
        ra, rb = qreal[a].copy(), qreal[b].copy()
        qreal[a] = c * ra + s * rb
        qreal[b] = -s * ra + c * rb
    q = np.asarray(defl.phase_scalings)[:, None] * qreal

    order = np.argsort(lam, kind="stable")
    return q[:, order], lam[order], n_locked


def rank_one_eig(
    d_in, rho: float, z_in, *, deflation_tol: float | None = None
) -> RankOneEig:
    """Eigendecomposition of diag(d_in) + rho * z_in z_in^H.

    Accepts d in any order, z of any norm, and rho of either sign.  The
    scaling moves into rho (rho' = rho ||z||^2), negative rho is handled by
    solving the negated problem and flipping the spectrum, and the sorting
    permutation is undone on output: rows of q follow the input order while
    the eigenvalues (and q's columns) come back ascending.

    A zero z (or zero rho) is an identity update: q is the permutation matrix
    sorting d_in and the result is flagged trivial.
    """
    d_in = np.asarray(d_in, dtype=float)
    z_in = np.asarray(z_in, dtype=complex)
    if d_in.ndim != 1 or z_in.shape != d_in.shape:
        raise ValueError("d_in and z_in must be vectors of equal length")
    n = d_in.size
    nrm = float(np.linalg.norm(z_in))
    if nrm == 0.0 or rho == 0.0:
        perm = np.argsort(d_in, kind="stable")
        return RankOneEig(np.eye(n, dtype=complex)[:, perm], d_in[perm], True, n)

    rho_eff = float(rho) * nrm * nrm
    z = z_in / nrm
    mirror = rho_eff < 0.0
    dwork = -d_in if mirror else d_in
    rwork = -rho_eff if mirror else rho_eff

    perm = np.argsort(dwork, kind="stable")
    q_s, lam_s, n_locked = _solve_sorted(dwork[perm], rwork, z[perm], deflation_tol)

    q = np.empty_like(q_s)
    q[perm, :] = q_s  # back to input row order
    if mirror:
        q = q[:, ::-1]
        lam = -lam_s[::-1]
    else:
        lam = lam_s
    return RankOneEig(q, lam, False, n_locked)


def debug_dump(d, rho, zabs2, roots: SecularRoots | None = None) -> str:
    """JSON snapshot of a secular solve for failure triage."""
    payload = {
        "d": np.asarray(d, dtype=float).tolist(),
        "rho": float(rho),
        "zabs2": np.asarray(zabs2, dtype=float).tolist(),
    }
    if roots is not None:
        payload["lam"] = roots.lam.tolist()
        payload["mu"] = roots.mu.tolist()
    return json.dumps(payload, indent=2)
