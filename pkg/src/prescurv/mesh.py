"""Structured discretization of the round 2-sphere.

Colatitude nodes are staggered off the poles (theta_j = (j+1/2) pi/n_theta);
azimuth is periodic.  Colatitude derivatives are 4th-order centered stencils
that continue through the pole to the antipodal column, with a sign flip for
fields that are odd under that continuation (frame vector components).
Azimuthal derivatives use 6th-order centered stencils: they cost nothing
extra under periodicity and keep the 1/sin(theta)-amplified terms at the
pole rows from dominating the overall (colatitude-limited) 4th-order error.
The reduced mode keeps only the colatitude line for axisymmetric fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SphereMesh:
    n_theta: int
    n_phi: int          # 0 in reduced mode
    reduced: bool
    theta: np.ndarray   # (n_theta,)
    phi: np.ndarray     # (n_phi,) or empty
    dtheta: float
    dphi: float         # 0.0 in reduced mode
    weights: np.ndarray  # quadrature weights per node, sums to 4*pi

    @property
    def shape(self):
        return (self.n_theta,) if self.reduced else (self.n_theta, self.n_phi)

    @property
    def n_nodes(self):
        return self.n_theta if self.reduced else self.n_theta * self.n_phi

    def theta_grid(self):
        """theta broadcast to field shape."""
        if self.reduced:
            return self.theta
        return np.broadcast_to(self.theta[:, None], self.shape)

    def phi_grid(self):
        if self.reduced:
            return np.zeros(self.n_theta)
        return np.broadcast_to(self.phi[None, :], self.shape)


def build_mesh(n_theta: int, n_phi: int = None, reduced: bool = False) -> SphereMesh:
    """Build a staggered colatitude/azimuth mesh.

    The colatitude quadrature weight is the exact cell integral of sin(theta)
    (= sin(theta_j) * 2 sin(dtheta/2), i.e. sin(theta) dtheta up to O(dtheta^2)),
    so the total weight is 4*pi to roundoff.
    """
    if n_theta < 16:
        raise ValueError("n_theta must be >= 16")
    dtheta = np.pi / n_theta
    theta = (np.arange(n_theta) + 0.5) * dtheta
    w_theta = 2.0 * np.sin(theta) * np.sin(0.5 * dtheta)
    if reduced:
        weights = w_theta * 2.0 * np.pi
        return SphereMesh(n_theta, 0, True, theta, np.empty(0), dtheta, 0.0, weights)
    if n_phi is None or n_phi < 4 or n_phi % 2 != 0:
        raise ValueError("n_phi must be an even integer >= 4")
    dphi = 2.0 * np.pi / n_phi
    phi = np.arange(n_phi) * dphi
    weights = np.broadcast_to((w_theta * dphi)[:, None], (n_theta, n_phi)).copy()
    return SphereMesh(n_theta, n_phi, False, theta, phi, dtheta, dphi, weights)


@dataclass(frozen=True)
class ScalarField:
    mesh: SphereMesh
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.mesh.shape:
            raise ValueError(f"field shape {v.shape} != mesh shape {self.mesh.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite values")
        object.__setattr__(self, "values", v)

    def flat(self):
        return self.values.ravel()


def field_from_function(mesh: SphereMesh, fn) -> ScalarField:
    """Sample fn(theta, phi) on the mesh nodes."""
    return ScalarField(mesh, np.asarray(fn(mesh.theta_grid(), mesh.phi_grid()), dtype=float))


def field_from_flat(mesh: SphereMesh, vec) -> ScalarField:
    return ScalarField(mesh, np.asarray(vec, dtype=float).reshape(mesh.shape))


# -- stencil machinery -------------------------------------------------------

def _theta_extended(mesh: SphereMesh, vals: np.ndarray, parity: int) -> np.ndarray:
    """Append two ghost rows per pole via the antipodal continuation.

    parity +1 for scalars (even through the pole), -1 for colatitude-frame
    vector components (odd).
    """
    if mesh.reduced:
        top = vals[1::-1]
        bot = vals[:-3:-1]
    else:
        shift = mesh.n_phi // 2
        top = np.roll(vals[1::-1], shift, axis=1)
        bot = np.roll(vals[:-3:-1], shift, axis=1)
    return np.concatenate([parity * top, vals, parity * bot], axis=0)


def dtheta(mesh: SphereMesh, vals: np.ndarray, parity: int = 1) -> np.ndarray:
    """4th-order d/dtheta with through-pole closure."""
    e = _theta_extended(mesh, vals, parity)
    n = mesh.n_theta
    return (e[0:n] - 8.0 * e[1:n + 1] + 8.0 * e[3:n + 3] - e[4:n + 4]) / (12.0 * mesh.dtheta)


def dtheta2(mesh: SphereMesh, vals: np.ndarray, parity: int = 1) -> np.ndarray:
    """4th-order d^2/dtheta^2 with through-pole closure."""
    e = _theta_extended(mesh, vals, parity)
    n = mesh.n_theta
    return (-e[0:n] + 16.0 * e[1:n + 1] - 30.0 * e[2:n + 2] + 16.0 * e[3:n + 3] - e[4:n + 4]) / (
        12.0 * mesh.dtheta ** 2
    )


def dphi(mesh: SphereMesh, vals: np.ndarray) -> np.ndarray:
    """6th-order periodic d/dphi (zero in reduced mode)."""
    if mesh.reduced:
        return np.zeros_like(vals)
    r = np.roll
    return (
        -r(vals, 3, 1) + 9.0 * r(vals, 2, 1) - 45.0 * r(vals, 1, 1)
        + 45.0 * r(vals, -1, 1) - 9.0 * r(vals, -2, 1) + r(vals, -3, 1)
    ) / (60.0 * mesh.dphi)


def dphi2(mesh: SphereMesh, vals: np.ndarray) -> np.ndarray:
    if mesh.reduced:
        return np.zeros_like(vals)
    r = np.roll
    return (
        2.0 * (r(vals, 3, 1) + r(vals, -3, 1))
        - 27.0 * (r(vals, 2, 1) + r(vals, -2, 1))
        + 270.0 * (r(vals, 1, 1) + r(vals, -1, 1))
        - 490.0 * vals
    ) / (180.0 * mesh.dphi ** 2)


# -- frame derivatives -------------------------------------------------------

def grad_frame(field: ScalarField):
    """Orthonormal-frame gradient components (d_theta, (1/sin) d_phi)."""
    mesh, v = field.mesh, field.values
    r1 = dtheta(mesh, v)
    if mesh.reduced:
        r2 = np.zeros_like(v)
    else:
        r2 = dphi(mesh, v) / np.sin(mesh.theta)[:, None]
    return ScalarField(mesh, r1), ScalarField(mesh, r2)


def hess_frame(field: ScalarField):
    """Orthonormal-frame covariant Hessian components (r_11, r_12, r_22).

    r_12 is computed as d_theta of the frame component r_2 (odd through the
    pole), which equals (1/sin) d_theta d_phi - (cos/sin^2) d_phi and stays
    4th-order accurate at the pole rows.
    """
    mesh, v = field.mesh, field.values
    r11 = dtheta2(mesh, v)
    if mesh.reduced:
        cot = np.cos(mesh.theta) / np.sin(mesh.theta)
        r22 = cot * dtheta(mesh, v)
        r12 = np.zeros_like(v)
    else:
        sin = np.sin(mesh.theta)[:, None]
        cot = (np.cos(mesh.theta) / np.sin(mesh.theta))[:, None]
        r2 = dphi(mesh, v) / sin
        r12 = dtheta(mesh, r2, parity=-1)
        r22 = dphi2(mesh, v) / sin ** 2 + cot * dtheta(mesh, v)
    return ScalarField(mesh, r11), ScalarField(mesh, r12), ScalarField(mesh, r22)


def integrate(field: ScalarField) -> float:
    """Quadrature-weighted sum over the sphere."""
    return float(np.sum(field.values * field.mesh.weights))
