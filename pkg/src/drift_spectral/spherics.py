"""Spherical harmonics on S^{m-1}: eigenvalues, zonal basis, quadrature, coefficients.

For general m the basis is zonal: ``phi_l(theta) = N_l C_l^{(alpha)}(cos theta)``
with ``alpha = (m - 2) / 2``, normalized in L^2(S^{m-1}).  On the circle
(m = 2) the Gegenbauer weight degenerates and the Fourier basis
``cos(l theta) / sqrt(pi)``, ``sin(l theta) / sqrt(pi)`` is used instead.  For
m = 3 full real spherical harmonics ``Y_l^mu(theta, phi)`` are also provided.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AccuracyError, DomainError


def sphere_area(n):
    """Surface area of the unit sphere S^n in R^{n+1}."""
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


def angular_eigenvalue(degree, m):
    """Eigenvalue l (l + m - 2) of -Laplace-Beltrami on S^{m-1}."""
    if degree < 0 or m < 2:
        raise DomainError("need degree >= 0 and m >= 2")
    return float(degree * (degree + m - 2))


def radial_exponent(degree, m):
    """Radial exponent l/2 pairing a degree-l harmonic with r**l.

    Cross-checked against ``(-(m-2) + sqrt((m-2)^2 + 4 lambda_l)) / 4``.
    """
    lam = angular_eigenvalue(degree, m)
    closed = degree / 2.0
    root = (-(m - 2) + math.sqrt((m - 2) ** 2 + 4.0 * lam)) / 4.0
    if abs(root - closed) > 1e-12 * max(1.0, closed):
        raise ArithmeticError(f"radial exponent mismatch at degree {degree}, m = {m}")
    return closed


@dataclass(frozen=True)
class ModeIndex:
    """A spherical-harmonic degree with its eigenvalue and radial exponent."""

    degree: int
    m: int

    @property
    def eigenvalue(self):
        return angular_eigenvalue(self.degree, self.m)

    @property
    def radial_exponent(self):
        return radial_exponent(self.degree, self.m)


# ---------------------------------------------------------------- Gegenbauer

def gegenbauer(n, alpha, t):
    """C_n^{(alpha)}(t) by the three-term recurrence (alpha > 0)."""
    t = np.asarray(t, dtype=float)
    c_prev = np.ones_like(t)
    if n == 0:
        return c_prev
    c = 2.0 * alpha * t
    for k in range(1, n):
        c_prev, c = c, (2.0 * t * (k + alpha) * c - (k + 2.0 * alpha - 1.0) * c_prev) / (k + 1)
    return c


def _gegenbauer_log_norm(n, alpha):
    # log of int_{-1}^{1} (1 - t^2)^(alpha - 1/2) C_n^alpha(t)^2 dt
    return (
        math.log(math.pi)
        + (1.0 - 2.0 * alpha) * math.log(2.0)
        + math.lgamma(n + 2.0 * alpha)
        - math.lgamma(n + 1.0)
        - math.log(n + alpha)
        - 2.0 * math.lgamma(alpha)
    )


def zonal_normalization(degree, m):
    """Constant N_l making N_l C_l^{((m-2)/2)}(cos theta) unit in L^2(S^{m-1})."""
    if m == 2:
        return 1.0 / math.sqrt(2.0 * math.pi) if degree == 0 else 1.0 / math.sqrt(math.pi)
    alpha = (m - 2) / 2.0
    log_h = _gegenbauer_log_norm(degree, alpha)
    return 1.0 / math.sqrt(sphere_area(m - 2) * math.exp(log_h))


@lru_cache(maxsize=None)
def gauss_gegenbauer(n, m):
    """Gauss nodes/weights in t = cos(theta) for the weight (1 - t^2)^((m-3)/2).

    Initial guesses come from the Jacobi matrix eigenvalues; each node is then
    polished by Newton iteration on the three-term recurrence.  Weights are
    ``1 / sum_j p_j(t_k)^2`` over orthonormal polynomials p_j, j < n.

    Returns read-only arrays ``(nodes, weights)``, nodes ascending.
    """
    if m < 3:
        raise DomainError("Gauss-Gegenbauer quadrature needs m >= 3 (use Fourier for m = 2)")
    alpha = (m - 2) / 2.0
    k = np.arange(1, n)
    # monic recurrence for Gegenbauer: t p_k = p_{k+1} + beta_k p_{k-1}
    beta = k * (k + 2.0 * alpha - 1.0) / (4.0 * (k + alpha) * (k + alpha - 1.0))
    if alpha == 0.5:
        beta = k**2 / (4.0 * k**2 - 1.0)
    jac = np.diag(np.sqrt(beta), 1) + np.diag(np.sqrt(beta), -1)
    t = np.sort(np.linalg.eigvalsh(jac))

    for _ in range(100):
        p = gegenbauer(n, alpha, t)
        p_nm1 = gegenbauer(n - 1, alpha, t)
        # (1 - t^2) C_n' = (n + 2 alpha - 1) C_{n-1} - n t C_n
        dp = ((n + 2.0 * alpha - 1.0) * p_nm1 - n * t * p) / (1.0 - t * t)
        step = p / dp
        t = t - step
        if np.max(np.abs(step)) < 1e-16:
            break

    acc = np.zeros_like(t)
    for j in range(n):
        acc += gegenbauer(j, alpha, t) ** 2 / math.exp(_gegenbauer_log_norm(j, alpha))
    w = 1.0 / acc
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def sphere_integrate_zonal(values_at_nodes, weights, m):
    """Integral over S^{m-1} of a zonal function sampled at Gauss nodes."""
    return sphere_area(m - 2) * float(np.dot(weights, values_at_nodes))


# ---------------------------------------------------------------- basis

@dataclass(frozen=True)
class AngularFunction:
    """One L^2-unit basis function on S^{m-1}.

    kind = "zonal"   : degree l, dimension m >= 3 (or m = 2 with phase "cos").
    kind = "fourier" : m = 2, frequency l, phase "cos" or "sin".
    kind = "sph3"    : m = 3 real spherical harmonic of degree l and order mu
                       (mu > 0 uses cos(mu phi), mu < 0 uses sin(|mu| phi)).
    """

    degree: int
    m: int
    kind: str = "zonal"
    phase: str = "cos"
    order: int = 0

    def __post_init__(self):
        if self.kind not in ("zonal", "fourier", "sph3"):
            raise DomainError(f"unknown angular kind {self.kind!r}")
        if self.kind == "fourier" and self.m != 2:
            raise DomainError("fourier basis is only for m = 2")
        if self.kind == "sph3" and (self.m != 3 or abs(self.order) > self.degree):
            raise DomainError("sph3 needs m = 3 and |order| <= degree")
        if self.phase not in ("cos", "sin"):
            raise DomainError("phase must be 'cos' or 'sin'")
        if self.phase == "sin" and self.degree == 0:
            raise DomainError("sin phase at degree 0 is identically zero")

    @property
    def eigenvalue(self):
        return angular_eigenvalue(self.degree, self.m)


def zonal(degree, m):
    """The zonal basis function of the given degree (cosine phase on the circle)."""
    if m == 2:
        return AngularFunction(degree, 2, "fourier", "cos")
    return AngularFunction(degree, m, "zonal")


def _check_theta(theta, upper):
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0.0) or np.any(th > upper) or np.any(~np.isfinite(th)):
        raise DomainError(f"angle outside [0, {upper:g}]")
    return th


def _assoc_legendre_normalized(l, mu, x):
    # fully normalized P_l^mu such that Y = P * cos/sin(mu phi) is unit on S^2
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    p = np.full_like(x, 1.0 / math.sqrt(4.0 * math.pi))
    for k in range(1, mu + 1):
        p = -math.sqrt((2.0 * k + 1.0) / (2.0 * k)) * s * p
    if l == mu:
        return p
    p_prev = p
    p = math.sqrt(2.0 * mu + 3.0) * x * p_prev
    for k in range(mu + 2, l + 1):
        a = math.sqrt((4.0 * k * k - 1.0) / (k * k - mu * mu))
        b = math.sqrt(((k - 1.0) ** 2 - mu * mu) / (4.0 * (k - 1.0) ** 2 - 1.0))
        p_prev, p = p, a * (x * p - b * p_prev)
    return p


def evaluate_angular(f, theta, phi=None):
    """Evaluate a basis function at polar angle(s) theta.

    Zonal functions take theta in [0, pi]; on the circle theta is the angle in
    [0, 2 pi); ``sph3`` also needs the azimuth `phi`.
    """
    if f.kind == "fourier" or (f.kind == "zonal" and f.m == 2):
        th = _check_theta(theta, 2.0 * math.pi)
        if f.degree == 0:
            return np.full_like(th, 1.0 / math.sqrt(2.0 * math.pi))[()]
        trig = np.cos if f.phase == "cos" else np.sin
        return (trig(f.degree * th) / math.sqrt(math.pi))[()]
    th = _check_theta(theta, math.pi)
    if f.kind == "zonal":
        alpha = (f.m - 2) / 2.0
        return (zonal_normalization(f.degree, f.m) * gegenbauer(f.degree, alpha, np.cos(th)))[()]
    if phi is None:
        raise DomainError("sph3 evaluation needs an azimuth phi")
    mu = abs(f.order)
    p = _assoc_legendre_normalized(f.degree, mu, np.cos(th))
    if f.order == 0:
        return p[()]
    ph = np.asarray(phi, dtype=float)
    trig = np.cos(mu * ph) if f.order > 0 else np.sin(mu * ph)
    return (math.sqrt(2.0) * p * trig)[()]


def theta_grid(m, n=256):
    """Uniform angle grid used for sup-norm checks."""
    if m == 2:
        return np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return np.linspace(0.0, math.pi, n)


# ---------------------------------------------------------------- coefficients

def _project(g, m, max_degree, n_nodes):
    if m == 2:
        # trapezoid rule on the circle is exact for trigonometric polynomials
        th = np.linspace(0.0, 2.0 * math.pi, n_nodes, endpoint=False)
        vals = np.asarray(g(th), dtype=float)
        h = 2.0 * math.pi / n_nodes
        return np.array(
            [h * np.dot(vals, evaluate_angular(zonal(l, 2), th)) for l in range(max_degree + 1)]
        )
    t, w = gauss_gegenbauer(n_nodes, m)
    th = np.arccos(np.clip(t, -1.0, 1.0))
    vals = np.asarray(g(th), dtype=float)
    return np.array(
        [
            sphere_integrate_zonal(vals * evaluate_angular(zonal(l, m), th), w, m)
            for l in range(max_degree + 1)
        ]
    )


def fourier_coefficients(g, m, max_degree, tol=1e-8):
    """Coefficients <g, phi_l> for l = 0..max_degree.

    `g` is either a mapping ``degree -> coefficient`` (returned unchanged, with
    integer keys) or a callable of the polar angle (zonal data; on the circle
    only the cosine part is projected).  Callables are integrated with
    ``2 * max_degree + 8`` Gauss nodes and checked against twice as many.

    Raises
    ------
    AccuracyError
        If the two resolutions disagree by more than `tol`.
    """
    if max_degree < 0:
        raise DomainError("max_degree must be >= 0")
    if not callable(g):
        return {int(k): float(v) for k, v in dict(g).items()}
    n = 2 * max_degree + 8
    c1 = _project(g, m, max_degree, n)
    c2 = _project(g, m, max_degree, 2 * n)
    diff = float(np.max(np.abs(c1 - c2)))
    if diff > tol:
        raise AccuracyError(f"quadrature disagreement {diff:.3g} between {n} and {2 * n} nodes")
    return {l: float(c2[l]) for l in range(max_degree + 1)}


def trace_function(coeffs, m):
    """Callable theta -> sum_l coeffs[l] phi_l(theta) for a coefficient map."""
    items = sorted((int(k), float(v)) for k, v in coeffs.items())

    def g(theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for l, c in items:
            if c != 0.0:
                out = out + c * evaluate_angular(zonal(l, m), theta)
        return out

    return g


def sobolev_admissible(coeffs, m, order):
    """Decay proxy for membership of a zonal expansion in H^order(S^{m-1}).

    The weighted terms ``w_l = lambda_l**order * C_l**2`` are the summands of
    the squared Sobolev seminorm.  Fewer than three nonzero entries is a
    finite expansion and always admissible.  Otherwise the power-law exponent
    of ``w_l`` over the upper half of the supplied degrees must be below -1
    (a convergent tail).
    """
    items = sorted((int(k), float(v)) for k, v in coeffs.items() if float(v) != 0.0)
    if any(not math.isfinite(v) for _, v in items):
        return False
    items = [(l, v) for l, v in items if l > 0]
    if len(items) < 3:
        return True
    ls = np.array([l for l, _ in items], dtype=float)
    w = np.array([angular_eigenvalue(l, m) ** order * v * v for l, v in items])
    half = ls >= ls[len(ls) // 2]
    if half.sum() < 2:
        half[-2:] = True
    slope = np.polyfit(np.log(ls[half]), np.log(w[half]), 1)[0]
    return bool(slope < -1.0)


def dumps_coefficients(coeffs):
    """JSON object {"degree": value} with shortest round-trip float repr."""
    return json.dumps({str(int(k)): float(v) for k, v in sorted(coeffs.items())})


def loads_coefficients(text):
    return {int(k): float(v) for k, v in json.loads(text).items()}
