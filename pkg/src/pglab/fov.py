"""Field-of-values computation in arbitrary HPD-Gram geometry, coercivity
measurement, and singular-value (compact-class) diagnostics.

The weighted field of values of Q is computed on the similarity transform
Qhat = H^(1/2) Q H^(-1/2) built from the Hermitian square root of the Gram
matrix, which leaves the set invariant.  Boundary points come from the
support-function method: for each angle theta the largest eigenpair of the
Hermitian part of e^(-i theta) Qhat gives the support value h(theta) and a
boundary point (the Rayleigh quotient of the maximizing eigenvector).  The
distance of the set from the origin is max(0, max_theta(-h(theta))), refined
adaptively around the maximizing angle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import config, densela


@dataclass(frozen=True)
class FovSample:
    """Sampled boundary of a field of values.

    ``v_h`` is the distance of the set from the origin; it is zero exactly
    when the origin lies in the (sampled) set, in which case ``contains_zero``
    is set.
    """

    angles: np.ndarray
    support_values: np.ndarray
    boundary_points: np.ndarray
    v_h: float
    contains_zero: bool


@dataclass(frozen=True)
class CoercivityReport:
    v_h: float
    elliptic: bool
    rotation: float
    h_normal: bool


@dataclass(frozen=True)
class CarlemanDiagnostics:
    """Weighted singular values of a preconditioned compact part, their
    partial arithmetic means and the p-class norm (sum of p-th powers to the
    1/p; the plain spectral norm is reported for p = 0, where no norm
    exists)."""

    singular_values: np.ndarray
    partial_means: np.ndarray
    carleman_norm: float
    p: float


def _support(qhat: np.ndarray, theta: float) -> tuple[float, complex]:
    """Support value and boundary point of F_2(qhat) in direction theta."""
    rot = np.exp(-1j * theta) * qhat
    herm = 0.5 * (rot + rot.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    vec = vecs[:, -1]
    point = complex(np.vdot(vec, qhat @ vec))  # unit vector: Rayleigh quotient
    return float(vals[-1]), point


def field_of_values(q, gram=None, samples: int = config.FOV_BASE_SAMPLES) -> FovSample:
    """Sampled field of values of q in the geometry of an HPD Gram matrix.

    ``samples`` uniform angles trace the boundary; the origin distance is then
    sharpened by golden-section refinement around the angle that realizes it,
    until it moves by less than the configured tolerance.
    """
    q = np.asarray(q)
    if samples < config.FOV_MIN_SAMPLES:
        raise ValueError(f"need at least {config.FOV_MIN_SAMPLES} angles")
    if gram is None:
        qhat = q
    else:
        root, inv_root = densela.hermitian_sqrt_pair(gram)
        qhat = root @ q @ inv_root

    angles = 2.0 * np.pi * np.arange(samples) / samples
    support = np.empty(samples)
    boundary = np.empty(samples, dtype=complex)
    for i, theta in enumerate(angles):
        support[i], boundary[i] = _support(qhat, theta)

    # distance from origin: maximize g(theta) = -h(theta)
    i_star = int(np.argmin(support))
    spacing = 2.0 * np.pi / samples
    lo = angles[i_star] - spacing
    hi = angles[i_star] + spacing
    best = -support[i_star]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    gc = -_support(qhat, c)[0]
    gd = -_support(qhat, d)[0]
    for _ in range(config.FOV_REFINE_MAX_ITER):
        new_best = max(best, gc, gd)
        if abs(new_best - best) < config.FOV_REFINE_TOL and (b - a) < spacing:
            best = new_best
            break
        best = new_best
        if gc > gd:
            b, d, gd = d, c, gc
            c = b - invphi * (b - a)
            gc = -_support(qhat, c)[0]
        else:
            a, c, gc = c, d, gd
            d = a + invphi * (b - a)
            gd = -_support(qhat, d)[0]
    v_h = max(0.0, best)
    return FovSample(angles, support, boundary, v_h, contains_zero=(best <= 0.0))


def origin_rotation(sample: FovSample) -> float:
    """Angle phi such that Re(e^{-i phi} z) > 0 over the set, when it exists
    (the separating direction opposite the support minimizer)."""
    i_star = int(np.argmin(sample.support_values))
    return float((sample.angles[i_star] + np.pi) % (2.0 * np.pi))


def coercivity_check(op, gram, samples: int = config.FOV_BASE_SAMPLES) -> CoercivityReport:
    """Distance of the weighted field of values from the origin, an
    ellipticity flag (set when a rotation puts the set in the open right half
    plane, i.e. the distance is positive) and a weighted-normality flag."""
    q = op.matrix if hasattr(op, "matrix") else np.asarray(op)
    sample = field_of_values(q, gram, samples)
    gram_arr = np.eye(q.shape[0]) if gram is None else np.asarray(gram)
    qstar = densela.solve_linear(gram_arr, q.conj().T @ gram_arr)
    comm = q @ qstar - qstar @ q
    scale = densela.spectral_norm(q) ** 2
    h_normal = densela.spectral_norm(comm) <= config.HNORMAL_RTOL * max(scale, 1e-300)
    return CoercivityReport(
        v_h=sample.v_h,
        elliptic=sample.v_h > 0.0,
        rotation=origin_rotation(sample),
        h_normal=h_normal,
    )


def carleman_diagnostics(compact_part, mass, gram, p: float) -> CarlemanDiagnostics:
    """Weighted singular values sigma_j of mass^-1 K, i.e. the singular values
    of H^(1/2) mass^-1 K H^(-1/2), with partial means and p-class norm."""
    if p < 0.0:
        raise ValueError("class index p must be >= 0")
    compact_part = np.asarray(compact_part)
    prec = densela.solve_linear(np.asarray(mass), compact_part)
    root, inv_root = densela.hermitian_sqrt_pair(np.asarray(gram))
    sigma = densela.svd(root @ prec @ inv_root).singular_values
    k = np.arange(1, len(sigma) + 1)
    means = np.cumsum(sigma) / k
    if p > 0.0:
        norm = float(np.sum(sigma**p) ** (1.0 / p))
    else:
        norm = float(sigma[0]) if len(sigma) else 0.0
    return CarlemanDiagnostics(sigma, means, norm, p)


# -- convex geometry helpers ---------------------------------------------------


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Hull vertices of complex points, counter-clockwise (monotone chain)."""
    pts = sorted(set((float(z.real), float(z.imag)) for z in np.asarray(points).ravel()))
    if len(pts) <= 2:
        return np.array([complex(x, y) for x, y in pts])

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for pt in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper: list = []
    for pt in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    hull = lower[:-1] + upper[:-1]
    return np.array([complex(x, y) for x, y in hull])


def point_in_hull(z: complex, hull: np.ndarray, tol: float = 0.0) -> bool:
    """Whether z lies in the convex hull, dilated outward by tol."""
    hull = np.asarray(hull).ravel()
    if len(hull) == 0:
        return False
    if len(hull) == 1:
        return abs(z - hull[0]) <= tol
    if len(hull) == 2:
        a, b = hull
        ab = b - a
        t = np.clip(((z - a) * ab.conjugate()).real / abs(ab) ** 2, 0.0, 1.0)
        return abs(z - (a + t * ab)) <= tol
    for i in range(len(hull)):
        a = hull[i]
        b = hull[(i + 1) % len(hull)]
        edge = b - a
        # signed distance to the edge line, positive inside (ccw hull)
        dist = (edge.conjugate() * (z - a)).imag / abs(edge)
        if dist < -tol:
            return False
    return True
