"""Upper half-space model of hyperbolic 3-space and its isometries.

Points are (x, y, z) with z > 0 and metric (dx^2+dy^2+dz^2)/z^2.
Orientation-preserving isometries are 2x2 complex matrices of determinant 1
acting by the Mobius extension; the action on interior points is computed in
the quaternion model q = (x + iy) + z j.

Frames: the group acts simply transitively on positively oriented orthonormal
frames.  The base frame sits at j = (0, 0, 1) with tangent pointing up the
vertical axis and normal pointing along +x.  `frame_to_matrix` returns the
unique (up to sign) matrix moving the base frame onto a given frame, and
`matrix_to_frame` is its inverse; all exact-composition machinery reduces to
2x2 products.

Tangent vectors are stored as Euclidean 3-vectors whose Euclidean norm equals
the z-coordinate of the footpoint (i.e. hyperbolic unit vectors).  Because the
metric is conformal, angles and orthogonality are the Euclidean ones.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.spatial.transform import Rotation

TOL_GEO = 1e-9          # framewise/positional comparison tolerance (model units)
LOXODROMIC_TOL = 1e-8   # |tr^2 - 4| threshold

Matrix = tuple[complex, complex, complex, complex]  # row-major (a, b, c, d)

IDENTITY: Matrix = (1 + 0j, 0j, 0j, 1 + 0j)


# ---------------------------------------------------------------------------
# 2x2 complex matrices


def mul(m: Matrix, n: Matrix) -> Matrix:
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def inv(m: Matrix) -> Matrix:
    a, b, c, d = m
    det = a * d - b * c
    return (d / det, -b / det, -c / det, a / det)


def inv_unit(m: Matrix) -> Matrix:
    """Inverse of a determinant-1 matrix (adjugate; no cancellation-prone det).

    Every matrix this library composes is a product of determinant-1 factors,
    for which the explicit ad - bc suffers catastrophic cancellation at large
    entries even though the true value is 1.
    """
    a, b, c, d = m
    return (d, -b, -c, a)


def det(m: Matrix) -> complex:
    a, b, c, d = m
    return a * d - b * c


def trace(m: Matrix) -> complex:
    return m[0] + m[3]


def normalize_det(m: Matrix) -> Matrix:
    """Scale so the determinant is 1 (sign of the root is irrelevant)."""
    s = cmath.sqrt(det(m))
    return (m[0] / s, m[1] / s, m[2] / s, m[3] / s)


def axis_translation(length: float, phase: float) -> Matrix:
    """Loxodromic fixing the vertical axis: translate by `length`, rotate by `phase`."""
    u = cmath.exp((length + 1j * phase) / 2.0)
    return (u, 0j, 0j, 1 / u)


def su2_about_tangent(phi: float) -> Matrix:
    """Frame-coordinate rotation by phi about the tangent axis (e_z at j)."""
    u = cmath.exp(0.5j * phi)
    return (u, 0j, 0j, u.conjugate())


def su2_about_normal(beta: float) -> Matrix:
    """Frame-coordinate rotation by beta about the normal axis (e_x at j)."""
    c, s = math.cos(beta / 2.0), math.sin(beta / 2.0)
    return (complex(c), complex(0.0, s), complex(0.0, s), complex(c))


def apply_boundary(m: Matrix, zeta: complex | None) -> complex | None:
    """Mobius action on the boundary plane; None stands for infinity."""
    a, b, c, d = m
    if zeta is None:
        return None if abs(c) == 0.0 else a / c
    den = c * zeta + d
    if abs(den) == 0.0:
        return None
    return (a * zeta + b) / den


def apply_point(m: Matrix, w: complex, t: float) -> tuple[complex, float]:
    """Mobius action on an interior point q = w + t j (quaternion arithmetic)."""
    a, b, c, d = m
    # numerator a q + b = (aw + b) + (a t) j, denominator c q + d likewise
    nw, nv = a * w + b, a * t
    dw, dv = c * w + d, c * t
    # q' = num * conj(den) / |den|^2 with conj(w + vj) = conj(w) - vj
    norm = abs(dw) ** 2 + abs(dv) ** 2
    rw = (nw * dw.conjugate() + nv * dv.conjugate()) / norm
    rv = (-nw * dv + nv * dw) / norm
    return rw, abs(rv)


# ---------------------------------------------------------------------------
# points, metric, tangents


def dist(p: np.ndarray, q: np.ndarray) -> float:
    """Hyperbolic distance between interior points.

    Uses sinh(d/2) = |p - q| / (2 sqrt(z1 z2)), stable near zero where the
    cosh form saturates.
    """
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    dz = p[2] - q[2]
    if dx == 0.0 and dy == 0.0 and dz == 0.0:
        return 0.0
    if p[2] <= 0.0 or q[2] <= 0.0:
        return math.inf
    r = math.sqrt(dx * dx + dy * dy + dz * dz)
    return 2.0 * math.asinh(r / (2.0 * math.sqrt(p[2] * q[2])))


def unitize(v: np.ndarray) -> np.ndarray:
    """Scale-safe Euclidean normalization (vectors may have huge norms)."""
    m = float(np.max(np.abs(v)))
    if m == 0.0:
        raise ValueError("cannot normalize the zero vector")
    w = v / m
    return w / np.linalg.norm(w)


def angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between tangent vectors at a common point, in [0, pi].

    Computed as 2 atan2(|u - v|, |u + v|) on unit vectors: well conditioned
    at both 0 and pi, unlike the arccos of the inner product.
    """
    a = unitize(u)
    b = unitize(v)
    return 2.0 * math.atan2(float(np.linalg.norm(a - b)), float(np.linalg.norm(a + b)))


def direction_to(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hyperbolic-unit tangent at p of the geodesic from p to q.

    Scale invariant: the configuration is normalized before squaring so huge
    coordinate spreads do not overflow.
    """
    w0 = complex(p[0], p[1])
    w1 = complex(q[0], q[1])
    d = abs(w1 - w0)
    if d <= 1e-300 * max(1.0, abs(w0)):
        return np.array([0.0, 0.0, math.copysign(p[2], q[2] - p[2])])
    u = (w1 - w0) / d
    # in the vertical plane through p and q: p at (0, t0), q at (d, t1)
    scale = max(d, p[2], q[2])
    t0, t1, ds = p[2] / scale, q[2] / scale, d / scale
    xc = (ds * ds + t1 * t1 - t0 * t0) / (2.0 * ds)
    tangent2d = np.array([t0, xc])
    tangent2d /= np.linalg.norm(tangent2d)
    vec = np.array([u.real * tangent2d[0], u.imag * tangent2d[0], tangent2d[1]])
    return vec * p[2]


def ideal_endpoints(p: np.ndarray, v: np.ndarray) -> tuple[complex | None, complex | None]:
    """(backward, forward) ideal endpoints of the geodesic through p directed v."""
    w0 = complex(p[0], p[1])
    vh = complex(v[0], v[1])
    if abs(vh) <= 1e-14 * np.linalg.norm(v):
        return (w0, None) if v[2] > 0 else (None, w0)
    u = vh / abs(vh)
    t0 = p[2]
    cos_psi = abs(vh) / np.linalg.norm(v)
    sin_psi = v[2] / np.linalg.norm(v)
    xc = t0 * sin_psi / cos_psi
    r = math.hypot(xc, t0)
    fwd, bwd = xc + r, xc - r
    return w0 + bwd * u, w0 + fwd * u


# ---------------------------------------------------------------------------
# frames <-> matrices

_EX = np.array([1.0, 0.0, 0.0])
_EZ = np.array([0.0, 0.0, 1.0])


def _su2_from_rotation(rot: Rotation) -> Matrix:
    """SU(2) matrix whose Mobius action on frames at j realizes `rot`.

    The differential of the stabilizer of j identifies with SO(3) via
    exp(i(theta/2) n.sigma) |-> rotation by theta about (n1, -n2, n3).
    """
    rv = rot.as_rotvec()
    theta = float(np.linalg.norm(rv))
    if theta < 1e-300:
        return IDENTITY
    n = rv / theta
    n1, n2, n3 = float(n[0]), -float(n[1]), float(n[2])
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return (
        complex(c, n3 * s),
        complex(n2 * s, n1 * s),
        complex(-n2 * s, n1 * s),
        complex(c, -n3 * s),
    )


def _rotation_from_su2(u: Matrix) -> Rotation:
    a, b, c, d = u
    # project onto the SU(2) form [[alpha, beta], [-conj(beta), conj(alpha)]]
    alpha = (a + d.conjugate()) / 2.0
    beta = (b - c.conjugate()) / 2.0
    cos_half = alpha.real
    n3s = alpha.imag
    n1s = beta.imag
    n2s = beta.real
    sin_half = math.sqrt(n1s * n1s + n2s * n2s + n3s * n3s)
    if sin_half < 1e-300:
        return Rotation.identity()
    theta = 2.0 * math.atan2(sin_half, cos_half)
    axis = np.array([n1s, -n2s, n3s]) / sin_half
    return Rotation.from_rotvec(axis * theta)


def frame_to_matrix(p: np.ndarray, tangent: np.ndarray, normal: np.ndarray) -> Matrix:
    """Determinant-1 matrix carrying the base frame at j to (p, tangent, normal)."""
    t_hat = unitize(tangent)
    n_hat = unitize(normal)
    n_hat = n_hat - np.dot(n_hat, t_hat) * t_hat
    n_hat /= np.linalg.norm(n_hat)
    rot = Rotation.from_matrix(np.column_stack([n_hat, np.cross(t_hat, n_hat), t_hat]))
    u = _su2_from_rotation(rot)
    rt = math.sqrt(p[2])
    w = complex(p[0], p[1])
    # translate(w) . scale(z) . u  applied left to right on the base frame
    scale_translate = (complex(rt), w / rt, 0j, 1 / complex(rt))
    return mul(scale_translate, u)


def matrix_directions(m: Matrix) -> tuple[np.ndarray, np.ndarray]:
    """Unit tangent and normal directions of the frame m carries the base to.

    Read from the bottom row (see matrix_to_frame); accurate at any distance,
    even where the affine coordinates of the footpoint degrade.
    """
    _, _, c, d = m
    rt = math.sqrt(abs(c) ** 2 + abs(d) ** 2)
    alpha = d.conjugate() / rt
    beta = -c.conjugate() / rt
    rot = _rotation_from_su2((alpha, beta, -beta.conjugate(), alpha.conjugate()))
    return rot.apply(_EZ), rot.apply(_EX)


def su2_directions(alpha: complex, beta: complex) -> tuple[np.ndarray, np.ndarray]:
    """Directions of the rotation with top row (alpha, beta), renormalized."""
    nrm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    a, b = alpha / nrm, beta / nrm
    rot = _rotation_from_su2((a, b, -b.conjugate(), a.conjugate()))
    return rot.apply(_EZ), rot.apply(_EX)


def matrix_to_frame(m: Matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Image of the base frame under m: (position, tangent, normal).

    Writing m = T U with T upper triangular (translate and scale) and U in
    SU(2), the bottom row of m is (-conj(beta), conj(alpha)) / sqrt(t): the
    rotation part is read off directly, with no cancellation even for frames
    far from the origin.  Assumes det(m) = 1, which holds for every matrix
    composed by this library.
    """
    w, t = apply_point(m, 0j, 1.0)
    p = np.array([w.real, w.imag, t])
    _, _, c, d = m
    norm = abs(c) ** 2 + abs(d) ** 2  # equals 1/t
    rt = math.sqrt(norm)
    alpha = d.conjugate() / rt
    beta = -c.conjugate() / rt
    rot = _rotation_from_su2((alpha, beta, -beta.conjugate(), alpha.conjugate()))
    tangent = rot.apply(_EZ) * t
    normal = rot.apply(_EX) * t
    return p, tangent, normal


# ---------------------------------------------------------------------------
# loxodromic translation length


def translation_length(m: Matrix, tol: float = TOL_GEO) -> tuple[float, float]:
    """Complex translation length (length > 0, phase in (-pi, pi]) of a loxodromic.

    Assumes det(m) = 1.  Raises ValueError (caught and rewrapped by callers)
    when the isometry is parabolic, elliptic or the identity within tolerance:
    tr = 2 cosh(l/2) only inverts cleanly off those loci.
    """
    tau = trace(m)
    disc = tau * tau - 4.0
    if abs(disc) <= LOXODROMIC_TOL:
        raise ValueError("parabolic or identity holonomy")
    root = cmath.sqrt(disc)
    # align the root with tau: the larger eigenvalue then comes out of an
    # addition, never a catastrophic cancellation
    if (tau.real * root.real + tau.imag * root.imag) < 0.0:
        root = -root
    u = (tau + root) / 2.0
    length = 2.0 * math.log(abs(u))
    if length <= tol:
        raise ValueError("elliptic holonomy")
    phase = wrap_angle(2.0 * cmath.phase(u))
    return length, phase


def wrap_angle(x: float) -> float:
    """Reduce to (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    if y <= -math.pi:
        y = math.pi
    return y


def circle_distance(x: float, y: float) -> float:
    """Distance on R/2piZ valued in [0, pi]."""
    return abs(math.remainder(x - y, 2.0 * math.pi))


# ---------------------------------------------------------------------------
# hyperboloid embedding (distances to geodesic segments)


def to_hyperboloid(p: np.ndarray) -> np.ndarray:
    """Minkowski coordinates (x1, x2, x3, x0) with -<X,Y> = cosh d."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    s = x * x + y * y + z * z
    return np.array([x / z, y / z, (s - 1.0) / (2.0 * z), (s + 1.0) / (2.0 * z)])


def _mink(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3])


def dist_to_segment(x: np.ndarray, p: np.ndarray, q: np.ndarray) -> float:
    """Hyperbolic distance from x to the geodesic segment [p, q]."""
    X, P, Q = to_hyperboloid(x), to_hyperboloid(p), to_hyperboloid(q)
    length = dist(p, q)
    if length <= 1e-12:
        return dist(x, p)
    # gamma(s) = P cosh s + V sinh s with V the unit tangent at P toward Q
    V = (Q + _mink(P, Q) * P) / math.sinh(length)
    alpha = -_mink(X, P)
    beta = -_mink(X, V)
    # cosh d(x, gamma(s)) = alpha cosh s + beta sinh s, minimized at tanh s = -beta/alpha
    if abs(beta) < alpha:
        s_star = math.atanh(-beta / alpha)
        if 0.0 <= s_star <= length:
            return math.acosh(max(1.0, alpha * math.cosh(s_star) + beta * math.sinh(s_star)))
    return min(dist(x, p), dist(x, q))


def rotate_about(v: np.ndarray, axis: np.ndarray, theta: float) -> np.ndarray:
    """Rodrigues rotation of v about the unit-direction of `axis`."""
    a = unitize(axis)
    return (
        v * math.cos(theta)
        + np.cross(a, v) * math.sin(theta)
        + a * np.dot(a, v) * (1.0 - math.cos(theta))
    )
