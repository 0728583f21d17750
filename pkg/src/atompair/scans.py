"""Angle scans of the intensity pattern and of the two-detector coincidence rate.

Scan conventions
----------------
Atoms sit at +-d/2 on the x axis and the drive runs along +y by default
(:func:`atompair.atom_model.standard_geometry`).  Detector directions sweep
a full circle in the chosen plane:

* ``xy``: n(theta) = (cos, sin, 0), reference direction +y (theta = pi/2);
* ``xz``: n(theta) = (sin, 0, cos), reference direction +z (theta = 0).

The reference direction is perpendicular to the atom axis, so its fringe
phase is zero; with the default separation d = 1/2 the phase sweeps exactly
[-pi, pi] over a scan, and a grid whose point count is a multiple of 4
contains the phase extrema exactly.  Scanned visibilities then reproduce
the closed forms to rounding error, which the acceptance tolerances assume.

Analyzer convention: polarization keywords are resolved once, at the
reference direction, and the resulting vectors are held fixed while the
directions move.  For the coincidence scan this is the matched-analyzer
idealization (both arms configured identically) under which equal
polarizations give unit fringe contrast at any drive strength; recomputing
a transverse sigma analyzer at every angle would instead roll the contrast
off geometrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atom_model import (
    Detector,
    DriveDecayParams,
    Geometry,
    LevelScheme,
    WAVENUMBER,
    pi_polarization,
    sigma_polarization,
    transverse_projection,
)
from .correlations import (
    _g2_normalized_given_state,
    g2_factorized,
    gamma2_from_operators,
    modulation_depth,
    witness_from_g2,
)
from .dynamics import build_liouvillian, steady_state_numeric
from .exact_oracle import g2_exact
from .farfield import field_operator, intensity, intensity_visibility

__all__ = [
    "scan_angles",
    "scan_direction",
    "reference_direction",
    "resolve_polarization",
    "IntensityScan",
    "intensity_scan",
    "G2Scan",
    "g2_scan",
    "scan_depth",
]

_PLANES = ("xy", "xz")


def scan_angles(n_points: int) -> np.ndarray:
    if n_points < 2:
        raise ValueError("scan needs at least 2 points")
    return np.linspace(0.0, 2.0 * math.pi, n_points, endpoint=False)


def scan_direction(plane: str, theta: float) -> np.ndarray:
    if plane == "xy":
        return np.array([math.cos(theta), math.sin(theta), 0.0])
    if plane == "xz":
        return np.array([math.sin(theta), 0.0, math.cos(theta)])
    raise ValueError(f"scan plane must be one of {_PLANES}, got {plane!r}")


def reference_direction(plane: str) -> np.ndarray:
    """Fixed detector direction of a scan: in plane, perpendicular to the atom axis."""
    if plane == "xy":
        return np.array([0.0, 1.0, 0.0])
    if plane == "xz":
        return np.array([0.0, 0.0, 1.0])
    raise ValueError(f"scan plane must be one of {_PLANES}, got {plane!r}")


def resolve_polarization(kind: str, n_ref, vector=None) -> np.ndarray:
    """Analyzer vector for a keyword at the reference direction.

    ``pi``/``sigma`` project the quantization axis / the circular sigma
    vector transverse to ``n_ref`` and normalize; ``custom`` does the same
    to a user-supplied complex vector.  A numerically null projection is
    rejected (analyzer lies along the observation direction).
    """
    if kind == "pi":
        return pi_polarization(n_ref)
    if kind == "sigma":
        return sigma_polarization(n_ref)
    if kind == "custom":
        if vector is None:
            raise ValueError("custom polarization requires an explicit vector")
        proj = transverse_projection(n_ref, vector)
        norm = np.linalg.norm(proj)
        if norm < 1e-8:
            raise ValueError("custom polarization has no transverse component at the reference direction")
        return proj / norm
    raise ValueError(f"polarization must be pi, sigma or custom, got {kind!r}")


def scan_depth(values: np.ndarray) -> float:
    """(max - min)/(max + min) of a sampled fringe; 0 for an all-zero scan."""
    hi = float(np.max(values))
    lo = float(np.min(values))
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


def _fringe_phase(geometry: Geometry, n_det, n_ref=None) -> float:
    reference = geometry.n_l if n_ref is None else n_ref
    return WAVENUMBER * ((n_det - reference) @ geometry.separation)


@dataclass(frozen=True, eq=False)
class IntensityScan:
    angles: np.ndarray
    phases: np.ndarray          # k (n - n_l).(R_A - R_B)
    intensities: np.ndarray
    visibility: float           # (max - min)/(max + min) of the samples
    visibility_closed_form: float
    polarization: np.ndarray


def intensity_scan(
    scheme: LevelScheme,
    geometry: Geometry,
    params: DriveDecayParams,
    polarization,
    *,
    plane: str = "xy",
    n_points: int = 360,
    rho: np.ndarray | None = None,
) -> IntensityScan:
    """Steady-state far-field intensity over a full circle of directions."""
    epsilon = np.asarray(polarization, dtype=complex).reshape(3)
    if rho is None:
        rho = steady_state_numeric(build_liouvillian(scheme, params))
    angles = scan_angles(n_points)
    phases = np.empty_like(angles)
    values = np.empty_like(angles)
    for i, theta in enumerate(angles):
        n = scan_direction(plane, theta)
        det = Detector(n, epsilon)
        phases[i] = _fringe_phase(geometry, n)
        values[i] = intensity(scheme, geometry, det, rho, rho)
    return IntensityScan(
        angles=angles,
        phases=phases,
        intensities=values,
        visibility=scan_depth(values),
        visibility_closed_form=intensity_visibility(params, epsilon),
        polarization=epsilon,
    )


@dataclass(frozen=True, eq=False)
class G2Scan:
    angles: np.ndarray
    phases: np.ndarray          # k (n1 - n2).(R_A - R_B)
    g2_factorized: np.ndarray
    g2_exact: np.ndarray
    gamma2: np.ndarray
    g2_normalized: np.ndarray
    witness_lhs: np.ndarray
    witness_rhs: np.ndarray
    violated: np.ndarray
    modulation_depth: float     # (max - min)/(max + min) of the factorized column
    modulation_closed_form: float  # |eps1^dag . eps2|^2
    detector_1: Detector


def g2_scan(
    scheme: LevelScheme,
    geometry: Geometry,
    params: DriveDecayParams,
    polarization_1,
    polarization_2,
    *,
    plane: str = "xy",
    n_points: int = 360,
) -> G2Scan:
    """Coincidence quantities with detector 1 fixed at the reference direction
    and detector 2 sweeping the scan plane, both analyzers held fixed."""
    eps_1 = np.asarray(polarization_1, dtype=complex).reshape(3)
    eps_2 = np.asarray(polarization_2, dtype=complex).reshape(3)
    n_ref = reference_direction(plane)
    det_1 = Detector(n_ref, eps_1)
    rho = steady_state_numeric(build_liouvillian(scheme, params))
    rho_pair = np.kron(rho, rho)

    op_a1 = field_operator(scheme, geometry, det_1, "A", require_transverse=False)
    op_b1 = field_operator(scheme, geometry, det_1, "B", require_transverse=False)
    g2_11 = _g2_normalized_given_state(scheme, geometry, det_1, det_1, rho)

    angles = scan_angles(n_points)
    phases = np.empty_like(angles)
    fact = np.empty_like(angles)
    exact = np.empty_like(angles)
    gam2 = np.empty_like(angles)
    norm = np.empty_like(angles)
    lhs = np.empty_like(angles)
    rhs = np.empty_like(angles)
    violated = np.zeros(angles.shape, dtype=bool)
    for i, theta in enumerate(angles):
        n2 = scan_direction(plane, theta)
        det_2 = Detector(n2, eps_2)
        op_a2 = field_operator(scheme, geometry, det_2, "A", require_transverse=False)
        op_b2 = field_operator(scheme, geometry, det_2, "B", require_transverse=False)
        phases[i] = _fringe_phase(geometry, det_1.n, n2)
        fact[i] = g2_factorized(op_a1, op_b1, op_a2, op_b2, rho)
        exact[i] = g2_exact(scheme, geometry, det_1, det_2, rho_pair)
        gam2[i] = gamma2_from_operators(op_a1, op_b1, op_a2, op_b2, rho)
        norm[i] = _g2_normalized_given_state(scheme, geometry, det_1, det_2, rho)
        g2_22 = _g2_normalized_given_state(scheme, geometry, det_2, det_2, rho)
        witness = witness_from_g2(g2_11, g2_22, norm[i])
        lhs[i] = witness.lhs
        rhs[i] = witness.rhs
        violated[i] = witness.violated
    return G2Scan(
        angles=angles,
        phases=phases,
        g2_factorized=fact,
        g2_exact=exact,
        gamma2=gam2,
        g2_normalized=norm,
        witness_lhs=lhs,
        witness_rhs=rhs,
        violated=violated,
        modulation_depth=scan_depth(fact),
        modulation_closed_form=float(abs(np.vdot(eps_1, eps_2)) ** 2),
        detector_1=det_1,
    )
