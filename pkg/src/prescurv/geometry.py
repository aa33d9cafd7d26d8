"""Geometry of the radial graph r(u) over S^2 inside dr^2 + lambda(r)^2 g'.

Per node: induced metric, second fundamental form, principal curvatures,
Newton-tensor eigenvalues mu_i = H - kappa_i, support function tau = lambda^2/v,
and the radial normal component.  Independent verification routines: a flat
embedding oracle for the shape operator, support-function identity residuals,
and the Codazzi residual for flat ambient space (all on axisymmetric graphs
where intrinsic differentiation is one-dimensional).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError
from .mesh import ScalarField, SphereMesh, dphi, dphi2, dtheta, dtheta2, grad_frame, hess_frame
from .symm import QuotientOrder, quotient_ratio_batch
from .warp import WarpProfile


def _sym_pair_eigs(g11, g12, g22, h11, h12, h22):
    """Eigenvalues of g^{-1} h for SPD g and symmetric h, via g^{-1/2} h g^{-1/2}.

    The similarity transform keeps the problem symmetric, so the eigenvalues
    stay real in floating point.  Returns (larger, smaller).
    """
    det_g = g11 * g22 - g12 * g12
    s = np.sqrt(det_g)
    t = np.sqrt(g11 + g22 + 2.0 * s)
    st = s * t
    q11 = (g22 + s) / st
    q12 = -g12 / st
    q22 = (g11 + s) / st
    c11 = h11 * q11 + h12 * q12
    c12 = h11 * q12 + h12 * q22
    c21 = h12 * q11 + h22 * q12
    c22 = h12 * q12 + h22 * q22
    b11 = q11 * c11 + q12 * c21
    b22 = q12 * c12 + q22 * c22
    b12 = 0.5 * ((q11 * c12 + q12 * c22) + (q12 * c11 + q22 * c21))
    mean = 0.5 * (b11 + b22)
    root = np.hypot(0.5 * (b11 - b22), b12)
    return mean + root, mean - root


@dataclass(frozen=True)
class GraphGeometry:
    """Per-node geometric state of the graph surface; all arrays mesh-shaped."""

    mesh: SphereMesh
    profile: WarpProfile
    r: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    r11: np.ndarray
    r12: np.ndarray
    r22: np.ndarray
    lam: np.ndarray
    dlam: np.ndarray
    v: np.ndarray
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    gi11: np.ndarray
    gi12: np.ndarray
    gi22: np.ndarray
    h11: np.ndarray
    h12: np.ndarray
    h22: np.ndarray
    hmix: np.ndarray      # shape (2, 2) + mesh shape, h^i_j = g^{ik} h_kj
    H: np.ndarray
    kappa1: np.ndarray    # larger principal curvature
    kappa2: np.ndarray
    mu1: np.ndarray       # H - kappa1 (smaller Newton eigenvalue)
    mu2: np.ndarray
    tau: np.ndarray
    capital_lambda: np.ndarray
    nu_r: np.ndarray      # <nu, d/dr> = lambda / v

    def mu_stack(self):
        """Newton eigenvalues stacked on the last axis, ascending."""
        return np.stack([self.mu1, self.mu2], axis=-1)

    def quotient_ratio(self, q: QuotientOrder):
        """(sigma_k/sigma_l of mu per node, in-cone mask)."""
        return quotient_ratio_batch(self.mu_stack(), q)


def compute_geometry(mesh: SphereMesh, r_field: ScalarField, profile: WarpProfile) -> GraphGeometry:
    """All per-node geometric quantities of the graph of r_field."""
    r = r_field.values
    lam, dlam, _ = profile.eval_lambda(r)
    f1, f2 = grad_frame(r_field)
    f11, f12, f22 = hess_frame(r_field)
    r1, r2 = f1.values, f2.values
    r11, r12, r22 = f11.values, f12.values, f22.values

    v = np.sqrt(lam * lam + r1 * r1 + r2 * r2)
    lam2 = lam * lam
    g11 = lam2 + r1 * r1
    g12 = r1 * r2
    g22 = lam2 + r2 * r2
    inv_v2 = 1.0 / (v * v)
    gi11 = (1.0 - r1 * r1 * inv_v2) / lam2
    gi12 = (-r1 * r2 * inv_v2) / lam2
    gi22 = (1.0 - r2 * r2 * inv_v2) / lam2

    pref = 1.0 / v
    h11 = pref * (-lam * r11 + 2.0 * dlam * r1 * r1 + lam2 * dlam)
    h12 = pref * (-lam * r12 + 2.0 * dlam * r1 * r2)
    h22 = pref * (-lam * r22 + 2.0 * dlam * r2 * r2 + lam2 * dlam)

    hm11 = gi11 * h11 + gi12 * h12
    hm12 = gi11 * h12 + gi12 * h22
    hm21 = gi12 * h11 + gi22 * h12
    hm22 = gi12 * h12 + gi22 * h22
    hmix = np.stack([np.stack([hm11, hm12]), np.stack([hm21, hm22])])

    kappa1, kappa2 = _sym_pair_eigs(g11, g12, g22, h11, h12, h22)
    H = hm11 + hm22

    return GraphGeometry(
        mesh=mesh,
        profile=profile,
        r=r,
        r1=r1,
        r2=r2,
        r11=r11,
        r12=r12,
        r22=r22,
        lam=lam,
        dlam=dlam,
        v=v,
        g11=g11,
        g12=g12,
        g22=g22,
        gi11=gi11,
        gi12=gi12,
        gi22=gi22,
        h11=h11,
        h12=h12,
        h22=h22,
        hmix=hmix,
        H=H,
        kappa1=kappa1,
        kappa2=kappa2,
        mu1=H - kappa1,
        mu2=H - kappa2,
        tau=lam2 / v,
        capital_lambda=profile.capital_lambda(r),
        nu_r=lam / v,
    )


def extrinsic_shape_operator(mesh: SphereMesh, r_field: ScalarField):
    """Shape-operator eigenvalues from a flat R^3 embedding (euclidean ambient only).

    Embeds X = r * (sin th cos ph, sin th sin ph, cos th), forms the first and
    second fundamental forms from finite-difference partials and the
    cross-product normal (oriented outward), and returns (kappa1, kappa2)
    with kappa1 >= kappa2.  Independent of the warped-graph formulas.
    """
    if mesh.reduced:
        raise ValueError("embedding oracle needs the full 2D mesh")
    th = mesh.theta_grid()
    ph = mesh.phi_grid()
    r = r_field.values
    direction = np.stack(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]
    )
    X = r * direction

    Xt = np.stack([dtheta(mesh, X[c]) for c in range(3)])
    Xp = np.stack([dphi(mesh, X[c]) for c in range(3)])
    Xtt = np.stack([dtheta2(mesh, X[c]) for c in range(3)])
    Xtp = np.stack([dtheta(mesh, dphi(mesh, X[c])) for c in range(3)])
    Xpp = np.stack([dphi2(mesh, X[c]) for c in range(3)])

    E = np.einsum("c...,c...->...", Xt, Xt)
    F = np.einsum("c...,c...->...", Xt, Xp)
    G = np.einsum("c...,c...->...", Xp, Xp)

    N = np.cross(Xt, Xp, axis=0)
    norm = np.sqrt(np.einsum("c...,c...->...", N, N))
    if not np.all(norm > 1e-14 * (1.0 + np.max(norm))):
        raise AdmissibilityError("degenerate embedding: near-zero normal")
    N = N / norm
    sign = np.sign(np.einsum("c...,c...->...", N, direction))
    N = N * sign

    L = -np.einsum("c...,c...->...", Xtt, N)
    M = -np.einsum("c...,c...->...", Xtp, N)
    P = -np.einsum("c...,c...->...", Xpp, N)
    return _sym_pair_eigs(E, F, G, L, M, P)


@dataclass(frozen=True)
class SupportResiduals:
    """Max-norm residuals of the support-function identities on an axisymmetric graph."""

    grad_capital_lambda: float   # surface gradient of Lambda vs lambda <e_r, E_1>
    grad_tau: float              # surface gradient of tau vs (grad Lambda) h
    hess_capital_lambda_mm: float  # meridian-meridian Hessian of Lambda
    hess_capital_lambda_pp: float  # parallel-parallel Hessian of Lambda

    @property
    def worst(self) -> float:
        return max(
            self.grad_capital_lambda,
            self.grad_tau,
            self.hess_capital_lambda_mm,
            self.hess_capital_lambda_pp,
        )


def _axisym_frame_curvatures(geom: GraphGeometry):
    """(meridian, parallel) normal curvatures from the diagonal frame components."""
    return geom.h11 / geom.g11, geom.h22 / geom.g22


def check_support_identities(geom: GraphGeometry) -> SupportResiduals:
    """Residuals of grad Lambda, grad tau, and hess Lambda identities on the surface.

    Axisymmetric (reduced) graphs only, over a builtin space-form profile:
    intrinsic covariant differentiation along the surface is then 1D in theta.
    """
    mesh = geom.mesh
    if not mesh.reduced:
        raise ValueError("support identities are checked in reduced (axisymmetric) mode")
    if geom.profile.space_form_curvature is None:
        raise ValueError("support identities need a builtin space-form profile")

    lam, dlam, rt = geom.lam, geom.dlam, geom.r1
    v = geom.v                       # = sqrt(g_theta_theta)
    g_mm = geom.g11
    L = geom.capital_lambda
    tau = geom.tau
    kap_m, kap_p = _axisym_frame_curvatures(geom)
    cot = np.cos(mesh.theta) / np.sin(mesh.theta)

    dL = dtheta(mesh, L)
    dtau = dtheta(mesh, tau)
    ddL = dtheta2(mesh, L)

    r8 = np.abs((dL - lam * rt) / v)
    r9 = np.abs((dtau - dL * kap_m) / v)

    gamma_mm = (lam * dlam * rt + rt * geom.r11) / g_mm
    lhs_mm = (ddL - gamma_mm * dL) / g_mm
    r10a = np.abs(lhs_mm - (dlam - tau * kap_m))

    lhs_pp = dL * (dlam * rt + lam * cot) / (g_mm * lam)
    r10b = np.abs(lhs_pp - (dlam - tau * kap_p))

    return SupportResiduals(
        grad_capital_lambda=float(r8.max()),
        grad_tau=float(r9.max()),
        hess_capital_lambda_mm=float(r10a.max()),
        hess_capital_lambda_pp=float(r10b.max()),
    )


def check_codazzi_flat(geom: GraphGeometry) -> float:
    """Max-norm Codazzi residual on an axisymmetric graph in flat ambient space.

    The only non-trivial component of the antisymmetrized covariant
    derivative of the second fundamental form reduces to the meridian
    relation d kappa_p/ds = (kappa_m - kappa_p) d(log R)/ds with
    R = sqrt(g_phiphi) the parallel-circle radius.  The residual is checked
    in the R-weighted form kappa_p' R - (kappa_m - kappa_p) R', which is the
    same identity without the pole-amplified cot(theta) factor.
    """
    mesh = geom.mesh
    if not mesh.reduced:
        raise ValueError("Codazzi check runs in reduced (axisymmetric) mode")
    if geom.profile.kind != "euclidean":
        raise ValueError("Codazzi check assumes the flat (euclidean) ambient")
    lam, dlam, rt = geom.lam, geom.dlam, geom.r1
    kap_m, kap_p = _axisym_frame_curvatures(geom)
    sin, cos = np.sin(mesh.theta), np.cos(mesh.theta)
    big_r = lam * sin
    d_big_r = dlam * rt * sin + lam * cos
    resid = dtheta(mesh, kap_p) * big_r - (kap_m - kap_p) * d_big_r
    return float(np.abs(resid).max())


def geometry_csv_rows(geom: GraphGeometry):
    """Rows (theta, phi, r, v, H, kappa1, kappa2, mu1, mu2, tau) in node order."""
    th = geom.mesh.theta_grid().ravel()
    ph = geom.mesh.phi_grid().ravel()
    cols = [th, ph] + [
        a.ravel()
        for a in (geom.r, geom.v, geom.H, geom.kappa1, geom.kappa2, geom.mu1, geom.mu2, geom.tau)
    ]
    return list(zip(*cols))
