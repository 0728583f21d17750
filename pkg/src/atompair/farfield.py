"""Far-field field operators and first-order (intensity) quantities.

The positive-frequency field radiated by one atom toward a detector is,
up to a global prefactor that cancels in every reported quantity,

    E^(+)  =  exp(-i k (n - n_l) . R_atom) * sum_t (eps^dag . d_t) |lower_t><upper_t|

summed over the decay channels t of the scheme.  The geometric phase keeps
the drive-imprinted phase exp(i k n_l . R) together with the propagation
phase exp(-i k n . R); only position differences ever enter observables.

Because the coefficient matrix only lowers (excited columns to ground
rows), products of two field operators of the same atom vanish identically:
one atom cannot emit twice without re-excitation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atom_model import (
    Detector,
    DriveDecayParams,
    Geometry,
    LevelScheme,
    WAVENUMBER,
    Z_HAT,
)

__all__ = [
    "FieldOperator",
    "lowering_coefficients",
    "atom_position",
    "geometric_phase",
    "field_operator",
    "mean_field",
    "g1",
    "intensity",
    "intensity_modulation_factor",
    "intensity_visibility",
]


def lowering_coefficients(scheme: LevelScheme, epsilon) -> np.ndarray:
    """Matrix of analyzer-projected dipole elements, coeff[l, u] = eps^dag . d_{lu}."""
    epsilon = np.asarray(epsilon, dtype=complex).reshape(3)
    coeff = np.zeros((scheme.n_levels, scheme.n_levels), dtype=complex)
    for t in scheme.transitions:
        coeff[t.lower, t.upper] += np.vdot(epsilon, t.dipole)
    return coeff


def atom_position(geometry: Geometry, atom: str) -> np.ndarray:
    if atom == "A":
        return geometry.r_a
    if atom == "B":
        return geometry.r_b
    raise ValueError(f"atom must be 'A' or 'B', got {atom!r}")


def geometric_phase(geometry: Geometry, detector: Detector, atom: str) -> complex:
    """exp(-i k (n - n_l) . R_atom) with k = 2*pi and positions in wavelengths."""
    r = atom_position(geometry, atom)
    return complex(np.exp(-1j * WAVENUMBER * ((detector.n - geometry.n_l) @ r)))


@dataclass(frozen=True, eq=False)
class FieldOperator:
    """Lowering part of one atom's field at one detector.

    ``coeff`` maps excited columns to ground rows only; ``phase`` is the
    unit-modulus geometric factor of the atom position.
    """

    atom: str
    detector: Detector
    phase: complex
    coeff: np.ndarray

    @property
    def dim(self) -> int:
        return self.coeff.shape[0]


def field_operator(
    scheme: LevelScheme,
    geometry: Geometry,
    detector: Detector,
    atom: str,
    *,
    require_transverse: bool = True,
) -> FieldOperator:
    """Field operator of ``atom`` ("A" or "B") as seen by ``detector``.

    ``require_transverse`` rejects analyzers with eps^dag . n != 0.  The scan
    code disables the check: there the analyzer vector is fixed at the
    reference direction while the observation direction moves (matched
    analyzers, the idealization under which equal polarizations give unit
    second-order fringe contrast).
    """
    if require_transverse and detector.transversality_defect() > 1e-9:
        raise ValueError(
            "detector polarization is not transverse to its observation direction "
            f"(|eps^dag.n| = {detector.transversality_defect():.3e})"
        )
    coeff = lowering_coefficients(scheme, detector.epsilon)
    coeff.setflags(write=False)
    return FieldOperator(
        atom=atom,
        detector=detector,
        phase=geometric_phase(geometry, detector, atom),
        coeff=coeff,
    )


def _check_rho(op: FieldOperator, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != op.coeff.shape:
        raise ValueError(f"density matrix shape {rho.shape} does not match operator {op.coeff.shape}")
    return rho


def mean_field(op: FieldOperator, rho) -> complex:
    """Mean radiated amplitude <E^(+)> = phase * tr(rho coeff)."""
    rho = _check_rho(op, rho)
    return op.phase * complex(np.trace(rho @ op.coeff))


def g1(op_i: FieldOperator, op_j: FieldOperator, rho) -> complex:
    """Amplitude correlation <E_i^(-) E_j^(+)> of one atom between two detectors.

    Both operators must belong to the same atom; cross-atom first-order
    terms factorize into mean fields for uncorrelated atoms and are handled
    by :func:`intensity`.
    """
    if op_i.atom != op_j.atom:
        raise ValueError(
            f"g1 is a single-atom quantity; got operators for atoms {op_i.atom!r} and {op_j.atom!r}"
        )
    rho = _check_rho(op_i, rho)
    return (
        np.conj(op_i.phase)
        * op_j.phase
        * complex(np.trace(rho @ op_i.coeff.conj().T @ op_j.coeff))
    )


def intensity(
    scheme: LevelScheme,
    geometry: Geometry,
    detector: Detector,
    rho_a,
    rho_b,
    *,
    require_transverse: bool = False,
) -> float:
    """Far-field intensity of the pair for uncorrelated atoms in states rho_a, rho_b.

    I = G1_A(1,1) + G1_B(1,1) + 2 Re[<E_A^(+)>^* <E_B^(+)>]; the cross term
    carries the fringe phase k (n - n_l).(R_A - R_B).
    """
    op_a = field_operator(scheme, geometry, detector, "A", require_transverse=require_transverse)
    op_b = field_operator(scheme, geometry, detector, "B", require_transverse=require_transverse)
    baseline = g1(op_a, op_a, rho_a).real + g1(op_b, op_b, rho_b).real
    cross = 2.0 * (np.conj(mean_field(op_a, rho_a)) * mean_field(op_b, rho_b)).real
    return float(baseline + cross)


def intensity_modulation_factor(params: DriveDecayParams) -> float:
    """|2 rho12|^2 / (2 rho11) in steady state = Gamma^2 / (2 g^2 + Gamma^2)."""
    if params.g <= 0:
        raise ValueError("modulation factor requires g > 0")
    gam = params.total
    return gam**2 / (2.0 * params.g**2 + gam**2)


def intensity_visibility(params: DriveDecayParams, epsilon) -> float:
    """Closed-form fringe visibility Gamma^2/(2 g^2 + Gamma^2) * |z . eps|^2.

    Equals (max - min)/(max + min) of a full-period steady-state intensity
    scan with the analyzer vector ``epsilon`` held fixed; the scan is the
    independent cross-check, this is the formula.
    """
    epsilon = np.asarray(epsilon, dtype=complex).reshape(3)
    norm2 = np.vdot(epsilon, epsilon).real
    if norm2 <= 0:
        raise ValueError("polarization vector must be nonzero")
    z_weight = abs(Z_HAT @ epsilon) ** 2 / norm2
    return intensity_modulation_factor(params) * z_weight
