"""The phase direction of a surface, its differential, and identity checks.

Every oriented tangent plane of a surface in R^4 pairs with the three Kahler
forms to give a unit vector lam in S^2; this module computes that map, its
differential dJ (two independent routes, cross-checked), the curvature form,
the energy splitting driven by det dJ, the tension field, the mapping
degree, and the chart/containment bookkeeping for the closed half great
circle {lam_1 = 0, lam_2 >= 0} that the singularity analysis excludes.

Conventions are pinned numerically rather than by external references: the
normal-curvature sign is the one that makes det dJ = kappa + kappa_perp hold
against a brute-force finite-difference oracle, and the same convention then
feeds every identity below.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (IdentityViolation, NonClosedSurface, NonNormalInput,
                     OnForbiddenSet)
from .structure import StructureTriple, standard_structure
from .surfaces import (FrameData, ParametricSurface, frames, mean_curvature,
                       normal_projection, second_fundamental_form)
from .util import format_float


@dataclass
class PhaseSample:
    """Phase direction and first-order data at one (or a grid of) point(s).

    dj rows are dJ(e_1), dJ(e_2) in R^3, tangent to the sphere at lam.  The
    energy split satisfies, by construction,
        e_del + e_delbar = |dJ|^2 / 2,    e_del - e_delbar = det dJ.
    route_gap records the disagreement between the finite-difference dJ and
    the shape-operator dJ, an end-to-end consistency measure.
    """

    lam: np.ndarray
    dj: np.ndarray
    e_del: np.ndarray
    e_delbar: np.ndarray
    detdj: np.ndarray
    route_gap: float

    def dj_norm2(self):
        return np.sum(self.dj * self.dj, axis=(-2, -1))


@dataclass
class CurvatureForm:
    """Rows <H, J_a e_i>, a = 1..3, for i = 1, 2; tangent to S^2 at lam."""

    hform: np.ndarray

    def norm2(self):
        return np.sum(self.hform * self.hform, axis=(-2, -1))


class SphereChart(NamedTuple):
    r: np.ndarray
    phi: np.ndarray


class ContainmentReport(NamedTuple):
    margin: float
    violation: bool


def phase(s: StructureTriple, fr: FrameData) -> np.ndarray:
    """lam_a = <J_a e1, e2>, the unit phase direction of the tangent plane."""
    je1 = np.einsum("aij,...j->...ai", s.j, fr.e1)
    return np.einsum("...ai,...i->...a", je1, fr.e2)


# ---------------------------------------------------------------------------
# Differential of the phase map
# ---------------------------------------------------------------------------

def _dj_shape_operator(s: StructureTriple, fr: FrameData,
                       sff: np.ndarray) -> np.ndarray:
    """dJ from the second fundamental form.

    Differentiating lam_a = <J_a e1, e2> with the ambient-parallel triple
    gives dlam_a(X) = <B(X, e2), J_a e1> - <B(X, e1), J_a e2>, which in the
    adapted normal frame collapses to two sff combinations:
        dJ(e_i) = (h^1_{2i} + h^2_{1i}) a2 + (h^2_{2i} - h^1_{1i}) a3
    with a2, a3 the S^2-frame rows of nu1, nu2.
    """
    je1 = np.einsum("aij,...j->...ai", s.j, fr.e1)
    a2 = np.einsum("...ai,...i->...a", je1, fr.nu1)
    a3 = np.einsum("...ai,...i->...a", je1, fr.nu2)
    p = sff[..., 0, 1, :] + sff[..., 1, 0, :]
    q = sff[..., 1, 1, :] - sff[..., 0, 0, :]
    return (p[..., :, None] * a2[..., None, :]
            + q[..., :, None] * a3[..., None, :])


def _dj_finite_difference(family: ParametricSurface, u, v, s: StructureTriple,
                          fr: FrameData, h: float) -> np.ndarray:
    """dJ by centered differences of the phase over the parameters."""
    lam_du = (phase(s, frames(family.jet(u + h, v), s))
              - phase(s, frames(family.jet(u - h, v), s))) / (2 * h)
    lam_dv = (phase(s, frames(family.jet(u, v + h), s))
              - phase(s, frames(family.jet(u, v - h), s))) / (2 * h)
    grad = np.stack([lam_du, lam_dv], axis=-2)            # (..., 2, 3)
    return np.einsum("...ia,...ab->...ib", fr.coeffs, grad)


def phase_differential(family: ParametricSurface, u, v,
                       s: StructureTriple | None = None,
                       h: float | None = None) -> PhaseSample:
    """Phase sample with dJ computed two ways and cross-checked.

    The returned dJ is the finite-difference one, so downstream identity
    tests do not merely re-derive the shape-operator algebra from itself.
    Raises StencilOutOfDomain if the stencil leaves the parameter domain and
    IdentityViolation if the routes disagree beyond max(1e-6, 10 h^2).
    """
    if s is None:
        s = standard_structure()
    if h is None:
        h = 1e-4 * family.scale
    family.check_stencil(u, v, h)
    jet = family.jet(u, v)
    fr = frames(jet, s)
    sff = second_fundamental_form(jet, fr)
    dj_b = _dj_shape_operator(s, fr, sff)
    dj_a = _dj_finite_difference(family, u, v, s, fr, h)
    gap = float(np.max(np.abs(dj_a - dj_b)))
    tol = max(1e-6, 10 * h * h)
    if gap > tol:
        raise IdentityViolation(
            f"dJ routes disagree by {format_float(gap)} (tol {format_float(tol)}) "
            f"on {family.name}")
    return _sample_from_dj(fr.lam, dj_a, gap)


def _sample_from_dj(lam, dj, gap: float) -> PhaseSample:
    cross = np.cross(dj[..., 0, :], dj[..., 1, :])
    detdj = np.einsum("...a,...a->...", lam, cross)
    nrm2 = np.sum(dj * dj, axis=(-2, -1))
    e_del = np.maximum(0.25 * nrm2 + 0.5 * detdj, 0.0)
    e_delbar = np.maximum(0.25 * nrm2 - 0.5 * detdj, 0.0)
    return PhaseSample(lam=lam, dj=dj, e_del=e_del, e_delbar=e_delbar,
                       detdj=detdj, route_gap=gap)


def phase_sample_exact(family: ParametricSurface, u, v,
                       s: StructureTriple | None = None) -> PhaseSample:
    """PhaseSample from the shape-operator route alone (no FD stencil).

    Used where stencils are unavailable or quadrature wants exact values;
    route_gap is reported as 0 since only one route runs.
    """
    if s is None:
        s = standard_structure()
    jet = family.jet(u, v)
    fr = frames(jet, s)
    sff = second_fundamental_form(jet, fr)
    return _sample_from_dj(fr.lam, _dj_shape_operator(s, fr, sff), 0.0)


# ---------------------------------------------------------------------------
# Curvature form and energy identities
# ---------------------------------------------------------------------------

def curvature_form(s: StructureTriple, fr: FrameData, h_vec,
                   normal_tol: float = 1e-8) -> CurvatureForm:
    """Rows <H, J_a e_i>; requires h_vec normal to the tangent plane."""
    h_vec = np.asarray(h_vec, dtype=float)
    t1 = np.abs(np.sum(h_vec * fr.e1, axis=-1))
    t2 = np.abs(np.sum(h_vec * fr.e2, axis=-1))
    worst = float(np.max(np.maximum(t1, t2)))
    if worst > normal_tol:
        raise NonNormalInput(
            f"input vector has tangential component {format_float(worst)}")
    je = np.stack([
        np.einsum("aij,...j->...ai", s.j, fr.e1),
        np.einsum("aij,...j->...ai", s.j, fr.e2),
    ], axis=-3)                                           # (..., 2, 3, 4)
    return CurvatureForm(np.einsum("...k,...iak->...ia", h_vec, je))


def energy_split(sample: PhaseSample, h_vec, tol: float = 1e-6):
    """Check |dJ|^2-splitting against the mean curvature: e_del = |H|^2/4.

    Returns the pointwise residual; raises IdentityViolation above tol
    (which would indicate a convention bug, not a numerical failure).
    """
    h2 = np.sum(np.asarray(h_vec, dtype=float) ** 2, axis=-1)
    residual = np.abs(sample.e_del - 0.25 * h2)
    worst = float(np.max(residual))
    if worst > tol:
        raise IdentityViolation(
            f"energy identity residual {format_float(worst)} exceeds "
            f"{format_float(tol)}")
    return residual


def gauss_normal_curvatures(sff: np.ndarray):
    """(kappa, kappa_perp) from sff components.

    kappa is the Gauss curvature (flat ambient), kappa_perp the normal-bundle
    curvature; the sign of kappa_perp is the one that satisfies
    det dJ = kappa + kappa_perp against the finite-difference oracle.
    """
    kappa = (sff[..., 0, 0, 0] * sff[..., 0, 1, 1] - sff[..., 0, 0, 1] ** 2
             + sff[..., 1, 0, 0] * sff[..., 1, 1, 1] - sff[..., 1, 0, 1] ** 2)
    kperp = np.sum(sff[..., 0, 0, :] * sff[..., 1, 1, :]
                   - sff[..., 0, 1, :] * sff[..., 1, 0, :], axis=-1)
    return kappa, kperp


def coupling_residual(s: StructureTriple, fr: FrameData, sff: np.ndarray,
                      dj: np.ndarray) -> np.ndarray:
    """First-order coupling of the shape operator to the phase differential.

    On any immersed surface the second fundamental form, the tangent
    rotation Jt (e1 -> e2 -> -e1) and its normal companion (nu1 -> nu2 ->
    -nu1) satisfy

        B(X, Jt Y) - Jt_perp B(X, Y) = sum_a dlam_a(X) J_a Y,

    pointwise in flat ambient space.  Returns the max-norm residual per
    point; anything above finite-difference noise means the frame, sff and
    dJ conventions have drifted apart.
    """
    bvec = (sff[..., 0, :, :, None] * fr.nu1[..., None, None, :]
            + sff[..., 1, :, :, None] * fr.nu2[..., None, None, :])
    bjt = np.stack([bvec[..., :, 1, :], -bvec[..., :, 0, :]], axis=-2)
    jperp = (sff[..., 0, :, :, None] * fr.nu2[..., None, None, :]
             - sff[..., 1, :, :, None] * fr.nu1[..., None, None, :])
    e = np.stack([fr.e1, fr.e2], axis=-2)
    jae = np.einsum("akl,...jl->...ajk", s.j, e)
    third = np.einsum("...ia,...ajk->...ijk", dj, jae)
    res = bjt - jperp - third
    return np.max(np.abs(res), axis=(-3, -2, -1))


# ---------------------------------------------------------------------------
# Tension field
# ---------------------------------------------------------------------------

def _h_field(family: ParametricSurface, u, v, s: StructureTriple):
    jet = family.jet(u, v)
    fr = frames(jet, s)
    return mean_curvature(jet, fr)


def tension(family: ParametricSurface, u, v,
            s: StructureTriple | None = None, h: float | None = None,
            cross_check: bool = False) -> np.ndarray:
    """Tension field of the phase map, tau = lam x m,
    m_a = sum_j <J_a grad^perp_{e_j} H, e_j>.

    The normal connection applied to the mean curvature field is evaluated
    by centered differences of H over the parameters.  With cross_check the
    equivalent contraction tau_a = <grad^perp_{e_2}H, J_a e_1>
    - <grad^perp_{e_1}H, J_a e_2> is also formed and compared.
    """
    if s is None:
        s = standard_structure()
    if h is None:
        h = 1e-4 * family.scale
    family.check_stencil(u, v, h)
    jet = family.jet(u, v)
    fr = frames(jet, s)
    dh_du = (_h_field(family, u + h, v, s) - _h_field(family, u - h, v, s)) / (2 * h)
    dh_dv = (_h_field(family, u, v + h, s) - _h_field(family, u, v - h, s)) / (2 * h)
    grad = np.stack([dh_du, dh_dv], axis=-2)              # (..., 2, 4)
    de = np.einsum("...ia,...ak->...ik", fr.coeffs, grad)
    e = np.stack([fr.e1, fr.e2], axis=-2)
    # normal part of each derivative row
    tang = np.einsum("...ik,...jk->...ij", de, e)
    nab = de - np.einsum("...ij,...jk->...ik", tang, e)
    jnab = np.einsum("aij,...kj->...kai", s.j, nab)
    m = np.einsum("...kai,...ki->...a", jnab, e)
    tau = np.cross(fr.lam, m)
    if cross_check:
        je = np.stack([
            np.einsum("aij,...j->...ai", s.j, fr.e1),
            np.einsum("aij,...j->...ai", s.j, fr.e2),
        ], axis=-3)
        alt = (np.einsum("...k,...ak->...a", nab[..., 1, :], je[..., 0, :, :])
               - np.einsum("...k,...ak->...a", nab[..., 0, :], je[..., 1, :, :]))
        gap = float(np.max(np.abs(alt - tau)))
        tol = max(1e-6, 10 * h * h)
        if gap > tol:
            raise IdentityViolation(
                f"tension contractions disagree by {format_float(gap)}")
    return tau


# ---------------------------------------------------------------------------
# Degree
# ---------------------------------------------------------------------------

def degree(family: ParametricSurface, n: int = 64,
           s: StructureTriple | None = None) -> float:
    """(1/4pi) integral of det dJ, by the tensor midpoint rule on n x n.

    Midpoint quadrature is spectrally accurate for the periodic directions
    of closed parametrizations and keeps the grid off boundary poles.
    """
    if not family.closed:
        raise NonClosedSurface(f"{family.name} is not closed")
    if s is None:
        s = standard_structure()
    (u0, u1), (v0, v1) = family.domain
    du = (u1 - u0) / n
    dv = (v1 - v0) / n
    uu = u0 + (np.arange(n) + 0.5) * du
    vv = v0 + (np.arange(n) + 0.5) * dv
    ug, vg = np.meshgrid(uu, vv, indexing="ij")
    jet = family.jet(ug, vg)
    fr = frames(jet, s)
    sff = second_fundamental_form(jet, fr)
    dj = _dj_shape_operator(s, fr, sff)
    cross = np.cross(dj[..., 0, :], dj[..., 1, :])
    detdj = np.einsum("...a,...a->...", fr.lam, cross)
    dmu = np.sqrt(np.linalg.det(fr.g))
    return float(np.sum(detdj * dmu) * du * dv / (4 * np.pi))


def euler_numbers(family: ParametricSurface, n: int = 64,
                  s: StructureTriple | None = None):
    """(chi_T, chi_N): Euler numbers of tangent and normal bundle.

    Both by curvature integrals, (1/2pi) integral of kappa resp. kappa_perp;
    independent of the degree quadrature, so the two sides of
    2 deg = chi_T + chi_N are genuinely distinct computations.
    """
    if not family.closed:
        raise NonClosedSurface(f"{family.name} is not closed")
    if s is None:
        s = standard_structure()
    (u0, u1), (v0, v1) = family.domain
    du = (u1 - u0) / n
    dv = (v1 - v0) / n
    uu = u0 + (np.arange(n) + 0.5) * du
    vv = v0 + (np.arange(n) + 0.5) * dv
    ug, vg = np.meshgrid(uu, vv, indexing="ij")
    jet = family.jet(ug, vg)
    fr = frames(jet, s)
    sff = second_fundamental_form(jet, fr)
    kappa, kperp = gauss_normal_curvatures(sff)
    dmu = np.sqrt(np.linalg.det(fr.g))
    chi_t = float(np.sum(kappa * dmu) * du * dv / (2 * np.pi))
    chi_n = float(np.sum(kperp * dmu) * du * dv / (2 * np.pi))
    return chi_t, chi_n


# ---------------------------------------------------------------------------
# Chart off the half circle, containment margin
# ---------------------------------------------------------------------------

def chart(lam) -> SphereChart:
    """Polar chart (r, phi) with (lam_1, lam_2) = (r sin phi, r cos phi).

    Defined away from the closed half great circle {lam_1 = 0, lam_2 >= 0};
    the forbidden set is detected exactly (it includes both poles).
    """
    lam = np.asarray(lam, dtype=float)
    l1, l2 = lam[..., 0], lam[..., 1]
    if np.any((l1 == 0.0) & (l2 >= 0.0)):
        raise OnForbiddenSet("phase direction lies on {lam1 = 0, lam2 >= 0}")
    r = np.hypot(l1, l2)
    phi = np.arctan2(l1, l2)
    phi = np.where(phi <= 0.0, phi + 2 * np.pi, phi)
    return SphereChart(r=r, phi=phi)


def arc_distance(lam) -> np.ndarray:
    """Pointwise geodesic distance on S^2 to the half circle, closed form.

    The half circle is p(t) = (0, cos t, sin t), |t| <= pi/2; the maximum of
    <lam, p(t)> is hypot(lam2, lam3) when lam2 >= 0 and |lam3| otherwise.
    Points on the set (lam1 = 0, lam2 >= 0) return exactly 0.
    """
    lam = np.asarray(lam, dtype=float)
    l1, l2, l3 = lam[..., 0], lam[..., 1], lam[..., 2]
    best = np.where(l2 >= 0.0, np.hypot(l2, l3), np.abs(l3))
    d = np.arccos(np.clip(best, -1.0, 1.0))
    return np.where((l1 == 0.0) & (l2 >= 0.0), 0.0, d)


def containment_margin(lams) -> ContainmentReport:
    """Min distance of a phase sample set to the half circle.

    A sample lying on the set exactly forces margin 0 and the violation
    flag; otherwise the margin is the smallest pointwise distance.
    """
    lams = np.asarray(lams, dtype=float)
    if lams.size == 0:
        raise ValueError("empty phase sample set")
    d = arc_distance(lams)
    hit = bool(np.any((lams[..., 0] == 0.0) & (lams[..., 1] >= 0.0)))
    margin = 0.0 if hit else float(np.min(d))
    return ContainmentReport(margin=margin, violation=hit)


# ---------------------------------------------------------------------------
# Phase-field dump
# ---------------------------------------------------------------------------

def write_phase_field_csv(path, family: ParametricSurface, n: int = 32,
                          s: StructureTriple | None = None) -> None:
    """Midpoint-grid phase field as CSV.

    Columns: u, v, lam1, lam2, lam3, e_del, e_delbar, detdJ, margin, where
    margin is the pointwise distance to the half circle.
    """
    if s is None:
        s = standard_structure()
    (u0, u1), (v0, v1) = family.domain
    u0, u1 = max(u0, -family.scale * 4), min(u1, family.scale * 4)
    v0, v1 = max(v0, -family.scale * 4), min(v1, family.scale * 4)
    du = (u1 - u0) / n
    dv = (v1 - v0) / n
    uu = u0 + (np.arange(n) + 0.5) * du
    vv = v0 + (np.arange(n) + 0.5) * dv
    ug, vg = np.meshgrid(uu, vv, indexing="ij")
    sample = phase_sample_exact(family, ug, vg, s)
    margin = arc_distance(sample.lam)
    cols = [ug, vg, sample.lam[..., 0], sample.lam[..., 1], sample.lam[..., 2],
            sample.e_del, sample.e_delbar, sample.detdj, margin]
    header = "u,v,lam1,lam2,lam3,e_del,e_delbar,detdJ,margin"
    lines = [header]
    flat = [np.ravel(c) for c in cols]
    for row in zip(*flat):
        lines.append(",".join(format_float(x) for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
