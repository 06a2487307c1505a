"""Support-function calculus for smooth convex bodies.

A body is represented by its support function h on the unit sphere; the
1-homogeneous extension H(x) = |x| h(x/|x|) drives everything.  The reverse
Gauss map is x(u) = grad H(u) and the principal radii of curvature at the
boundary point with outer normal u are the eigenvalues of the Hessian of H
restricted to the tangent plane of the sphere at u.  Surface integrals pull
back to the sphere with Jacobian prod(radii).

Analytic gradients/Hessians are used where supplied (balls, ellipsoids);
otherwise central finite differences with step fd_step = 1e-5 * scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spherequad

EQUALITY_BALL = "EqualityBall"
STRICT_INEQUALITY = "StrictInequality"
INCONCLUSIVE = "Inconclusive"

# verdict thresholds (relative): equality requires both a tiny gap and a
# globally umbilical curvature field
GAP_EQUALITY_RTOL = 1e-5
SPREAD_EQUALITY_RTOL = 1e-4

CONVEXITY_EIG_RTOL = 1e-8     # reject bodies with restricted-Hessian eigs below this * scale
FD_STEP_RTOL = 1e-5


class ConvexityError(ValueError):
    """Restricted support Hessian failed the positivity screen."""


@dataclass
class SupportEvaluator:
    """Support function h on S^(dim-1) plus optional analytic derivatives.

    All callables take x of shape (..., dim).  `h` is evaluated on unit
    vectors; `grad` and `hess` (if given) are the gradient and Hessian of
    the 1-homogeneous extension.  `scale` sets finite-difference steps and
    screening thresholds.
    """

    h: callable
    dim: int
    grad: callable | None = None
    hess: callable | None = None
    scale: float = 1.0
    name: str = "body"
    convexity_certificate: bool = field(default=False, init=False)

    @property
    def n(self) -> int:
        """Boundary dimension (number of principal curvatures)."""
        return self.dim - 1

    @property
    def fd_step(self) -> float:
        return FD_STEP_RTOL * self.scale

    # -- 1-homogeneous extension ------------------------------------------
    def hom(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        return r * self.h(x / r[..., None])

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """grad H at unit vectors u = boundary point of the reverse Gauss map."""
        u = np.asarray(u, dtype=float)
        if self.grad is not None:
            return self.grad(u)
        s = self.fd_step
        out = np.empty_like(u)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = s
            out[..., i] = (self.hom(u + e) - self.hom(u - e)) / (2 * s)
        return out

    def hessian(self, u: np.ndarray) -> np.ndarray:
        """Hessian of H at unit vectors u, shape (..., dim, dim)."""
        u = np.asarray(u, dtype=float)
        if self.hess is not None:
            return self.hess(u)
        s = self.fd_step
        d = self.dim
        out = np.empty(u.shape[:-1] + (d, d))
        h0 = self.hom(u)
        basis = np.eye(d) * s
        for i in range(d):
            ei = basis[i]
            out[..., i, i] = (self.hom(u + ei) - 2 * h0 + self.hom(u - ei)) / s**2
            for j in range(i + 1, d):
                ej = basis[j]
                v = (self.hom(u + ei + ej) - self.hom(u + ei - ej)
                     - self.hom(u - ei + ej) + self.hom(u - ei - ej)) / (4 * s**2)
                out[..., i, j] = v
                out[..., j, i] = v
        return out

    def screen_convexity(self, level: int = 4) -> bool:
        """Set convexity_certificate if all restricted-Hessian eigenvalues
        exceed CONVEXITY_EIG_RTOL * scale at the level's quadrature nodes."""
        u, _ = spherequad.rule(self.dim, level)
        radii = _restricted_radii(self, u)
        ok = bool(np.all(radii > CONVEXITY_EIG_RTOL * self.scale)) and \
            bool(np.all(self.h(u) > 0))
        self.convexity_certificate = ok
        return ok


def tangent_basis(u: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of u-perp, shape (..., n, dim)."""
    u = np.asarray(u, dtype=float)
    d = u.shape[-1]
    if d == 2:
        e = np.stack([-u[..., 1], u[..., 0]], axis=-1)
        return e[..., None, :]
    ref = np.zeros_like(u)
    pick = np.argmin(np.abs(u), axis=-1)
    idx = np.meshgrid(*[np.arange(s) for s in u.shape[:-1]], indexing="ij")
    ref[(*idx, pick)] = 1.0
    e1 = np.cross(u, ref)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(u, e1)
    return np.stack([e1, e2], axis=-2)


def _restricted_radii(body: SupportEvaluator, u: np.ndarray) -> np.ndarray:
    """Eigenvalues (ascending) of the support Hessian on u-perp, (..., n)."""
    E = tangent_basis(u)                      # (..., n, d)
    H = body.hessian(u)                       # (..., d, d)
    B = E @ H @ np.swapaxes(E, -1, -2)        # (..., n, n)
    B = 0.5 * (B + np.swapaxes(B, -1, -2))
    return np.linalg.eigvalsh(B)


@dataclass
class BoundaryData:
    """Boundary samples at quadrature nodes; all fields are arrays.

    u (N, d) outer normals, x (N, d) boundary points, radii (N, n) ascending
    principal radii, curvatures (N, n) their reciprocals, area_weight (N,)
    = prod(radii) * spherical quadrature weight.
    """

    u: np.ndarray
    x: np.ndarray
    radii: np.ndarray
    curvatures: np.ndarray
    area_weight: np.ndarray

    def __len__(self):
        return len(self.u)


@dataclass
class BoundaryPointData:
    """Single-normal variant of BoundaryData (quadrature weight taken as 1)."""

    u: np.ndarray
    x: np.ndarray
    radii: np.ndarray
    curvatures: np.ndarray
    area_weight: float


def principal_data(body: SupportEvaluator, u) -> BoundaryPointData:
    """Reverse Gauss map and principal radii/curvatures at one normal u."""
    if not body.convexity_certificate:
        body.screen_convexity()
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    radii = _restricted_radii(body, u[None])[0]
    if np.any(radii <= 0):
        raise ConvexityError(f"non-positive principal radius at u={u}: {radii}")
    x = body.gradient(u[None])[0]
    return BoundaryPointData(u=u, x=x, radii=radii, curvatures=1.0 / radii[::-1],
                             area_weight=float(np.prod(radii)))


def boundary_data(body: SupportEvaluator, level: int) -> BoundaryData:
    """Boundary samples at all quadrature nodes of the given level."""
    if not body.convexity_certificate:
        body.screen_convexity()
    u, w = spherequad.rule(body.dim, level)
    radii = _restricted_radii(body, u)
    if np.any(radii <= 0):
        raise ConvexityError("non-positive principal radius at a quadrature node")
    x = body.gradient(u)
    return BoundaryData(u=u, x=x, radii=radii, curvatures=1.0 / radii[:, ::-1],
                        area_weight=np.prod(radii, axis=1) * w)


def surface_integral(body: SupportEvaluator, f, level: int = 5) -> float:
    """Integrate f over the boundary: sum of area_weight * f(data).

    f maps a BoundaryData batch to an (N,) array.  f = 1 gives the surface
    area; f = (x . u) / dim gives the volume by the divergence theorem.
    """
    data = boundary_data(body, level)
    return float(np.sum(data.area_weight * f(data)))


def elementary_symmetric(kappa: np.ndarray) -> np.ndarray:
    """e_0..e_n of the last axis of kappa, shape (..., n+1)."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    out = np.zeros(kappa.shape[:-1] + (n + 1,))
    out[..., 0] = 1.0
    for i in range(n):
        k = kappa[..., i]
        # DP update: e_j <- e_j + k * e_{j-1}, descending j
        for j in range(min(i + 1, n), 0, -1):
            out[..., j] = out[..., j] + k * out[..., j - 1]
    return out


def pointwise_mean_curvature(data, k: int):
    """H_k = e_k(curvatures); H_0 = 1.  Works on single or batch data."""
    kappa = np.atleast_2d(data.curvatures)
    n = kappa.shape[-1]
    if not 0 <= k <= n:
        raise IndexError(f"k={k} out of range 0..{n}")
    e = elementary_symmetric(kappa)[..., k]
    return float(e[0]) if np.isscalar(data.area_weight) else e


def newton_maclaurin_margin(kappa, k: int):
    """(H_1/n) - (H_k / C(n,k))**(1/k), nonnegative for kappa >= 0.

    Accepts a single vector or a batch (..., n).
    """
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa < 0):
        raise ValueError("curvature entries must be nonnegative")
    n = kappa.shape[-1]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    e = elementary_symmetric(kappa)
    m = e[..., 1] / n - (e[..., k] / math.comb(n, k)) ** (1.0 / k)
    return float(m) if m.ndim == 0 else m


@dataclass
class HKReport:
    """Volume, boundary area and the mean-curvature reciprocal integral,
    with gap = n/(n+1) * hk_integral - volume (nonnegative up to quadrature)."""

    volume: float
    area: float
    hk_integral: float
    gap: float
    quadrature_level: int
    verdict: str

    def as_dict(self) -> dict:
        return {
            "volume": self.volume,
            "area": self.area,
            "hk_integral": self.hk_integral,
            "gap": self.gap,
            "verdict": self.verdict,
            "quadrature_level": self.quadrature_level,
        }


def gap_tolerance(level: int, volume: float) -> float:
    """Quadrature-level-dependent bound on how negative a gap may look."""
    return 1e-6 * abs(volume) * max(1.0, 4.0 ** (5 - level))


def hk_functional(body: SupportEvaluator, level: int = 5) -> HKReport:
    """Evaluate the volume bound functional and classify the body."""
    data = boundary_data(body, level)
    dim = body.dim
    n = body.n
    volume = float(np.sum(data.area_weight * np.sum(data.x * data.u, axis=1)) / dim)
    area = float(np.sum(data.area_weight))
    h1 = np.sum(data.curvatures, axis=1)
    hk_integral = float(np.sum(data.area_weight / h1))
    gap = n / (n + 1) * hk_integral - volume
    spread = float(np.max(data.curvatures) - np.min(data.curvatures))
    kappa_scale = float(np.mean(np.abs(data.curvatures)))
    if abs(gap) <= GAP_EQUALITY_RTOL * volume and spread <= SPREAD_EQUALITY_RTOL * kappa_scale:
        verdict = EQUALITY_BALL
    elif gap > GAP_EQUALITY_RTOL * volume:
        verdict = STRICT_INEQUALITY
    else:
        verdict = INCONCLUSIVE
    return HKReport(volume=volume, area=area, hk_integral=hk_integral, gap=gap,
                    quadrature_level=level, verdict=verdict)


def tube_bound_via_normal_bundle(body: SupportEvaluator, level: int = 5) -> float:
    """Middle quantity of the volume-bound chain.

    Per boundary point the normal ray is integrated up to the first focal
    time 1/kappa_max; the time integral has the closed form
    n/((n+1) H1) * (1 - (1 - H1/(n kappa_max))**(n+1)).  The result sits
    between the volume and n/(n+1) * integral of 1/H1.
    """
    data = boundary_data(body, level)
    n = body.n
    h1 = np.sum(data.curvatures, axis=1)
    kmax = np.max(data.curvatures, axis=1)
    base = 1.0 - h1 / (n * kmax)
    time_integral = n / ((n + 1) * h1) * (1.0 - base ** (n + 1))
    return float(np.sum(data.area_weight * time_integral))


# ---------------------------------------------------------------------------
# evaluator constructors
# ---------------------------------------------------------------------------

def ball_support(radius: float, center=None, dim: int = 3) -> SupportEvaluator:
    if radius <= 0:
        raise ValueError("radius must be positive")
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    if c.shape != (dim,):
        raise ValueError("center has wrong dimension")

    def h(u):
        return radius + u @ c

    def grad(x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        return radius * x / r + c

    def hess(x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        xh = x / r[..., None]
        eye = np.broadcast_to(np.eye(dim), x.shape[:-1] + (dim, dim))
        proj = eye - xh[..., :, None] * xh[..., None, :]
        return radius * proj / r[..., None, None]

    return SupportEvaluator(h=h, dim=dim, grad=grad, hess=hess, scale=radius,
                            name=f"ball(r={radius})")


def ellipsoid_support(semi_axes) -> SupportEvaluator:
    a = np.asarray(semi_axes, dtype=float)
    if np.any(a <= 0):
        raise ValueError("semi-axes must be positive")
    dim = len(a)
    A = a**2

    def h(u):
        u = np.asarray(u, dtype=float)
        return np.sqrt(np.sum(A * u * u, axis=-1))

    def grad(x):
        x = np.asarray(x, dtype=float)
        Hv = np.sqrt(np.sum(A * x * x, axis=-1))
        return A * x / Hv[..., None]

    def hess(x):
        x = np.asarray(x, dtype=float)
        Hv = np.sqrt(np.sum(A * x * x, axis=-1))
        Ax = A * x
        eye = np.broadcast_to(np.diag(A), x.shape[:-1] + (dim, dim))
        outer = Ax[..., :, None] * Ax[..., None, :]
        return eye / Hv[..., None, None] - outer / Hv[..., None, None] ** 3

    return SupportEvaluator(h=h, dim=dim, grad=grad, hess=hess, scale=float(a.mean()),
                            name=f"ellipsoid{tuple(a)}")


def bumpy_support(r0: float, directions, amplitudes, widths, dim: int = 3) -> SupportEvaluator:
    """Ball of radius r0 with smooth exponential support bumps.

    h(u) = r0 + sum_m a_m * exp((u . d_m - 1) / w_m^2).  Derivatives fall
    back to finite differences.  Convexity is screened, not guaranteed.
    """
    D = np.asarray(directions, dtype=float)
    A = np.asarray(amplitudes, dtype=float)
    W = np.asarray(widths, dtype=float)

    def h(u):
        u = np.asarray(u, dtype=float)
        t = u @ D.T                      # (..., M)
        return r0 + np.sum(A * np.exp((t - 1.0) / W**2), axis=-1)

    return SupportEvaluator(h=h, dim=dim, scale=r0, name="bumpy")


def scaled_body(body: SupportEvaluator, lam: float) -> SupportEvaluator:
    """Homothety: support function scales linearly."""
    if lam <= 0:
        raise ValueError("scale factor must be positive")
    grad = (lambda x: lam * body.grad(x)) if body.grad is not None else None
    hess = (lambda x: lam * body.hess(x)) if body.hess is not None else None
    return SupportEvaluator(h=lambda u: lam * body.h(u), dim=body.dim, grad=grad,
                            hess=hess, scale=lam * body.scale,
                            name=f"{body.name}*{lam}")


def translated_body(body: SupportEvaluator, t) -> SupportEvaluator:
    """Translation adds a linear term to the support function."""
    t = np.asarray(t, dtype=float)
    grad = (lambda x: body.grad(x) + t) if body.grad is not None else None
    return SupportEvaluator(h=lambda u: body.h(u) + u @ t, dim=body.dim, grad=grad,
                            hess=body.hess, scale=body.scale,
                            name=f"{body.name}+t")


def random_convex_body(rng: np.random.Generator, dim: int = 3,
                       max_tries: int = 50) -> SupportEvaluator:
    """Seeded random smooth convex body: unit ball plus screened bumps."""
    for _ in range(max_tries):
        m = int(rng.integers(2, 6))
        dirs = rng.normal(size=(m, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        widths = rng.uniform(0.35, 0.7, size=m)
        amps = rng.uniform(0.1, 1.0, size=m) * 0.05 * widths**2
        body = bumpy_support(1.0, dirs, amps, widths, dim=dim)
        if body.screen_convexity(level=4):
            return body
    raise ConvexityError("random body generator failed the convexity screen repeatedly")


def random_convex_bodies(count: int, seed: int, dim: int = 3) -> list[SupportEvaluator]:
    rng = np.random.default_rng(seed)
    return [random_convex_body(rng, dim=dim) for _ in range(count)]
