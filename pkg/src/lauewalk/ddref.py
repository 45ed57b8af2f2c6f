"""Two-beam dynamical diffraction in Laue geometry (non-absorbing crystal).

Closed-form transmitted/reflected amplitudes, their mapping onto an
effective 2x2 blade unitary, the analytic three-blade interferometer output,
and a cross-check of the lattice model against these formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .crystal import BladeSpec, integrated_intensities
from .interferometer import InterferometerSpec, UndefinedContrastError, contrast, default_chi_grid, fringe_scan
from .lattice import InvalidParameterError, SplitterParams

__all__ = [
    "DDParams",
    "DDAmplitudes",
    "BladeAngles",
    "dd_amplitudes",
    "dd_blade_angles",
    "dd_unitary",
    "analytic_three_blade",
    "analytic_h_contrast",
    "qi_dd_crosscheck",
]


@dataclass(frozen=True)
class DDParams:
    """Dimensionless thickness ``A``, Bragg deviation ``eta``, exit coordinate ``z/D``,
    nuclear phase ``chi_nuc`` and the phase of ``v_H / v_-H``."""

    A: float
    eta: float = 0.0
    z_over_D: float = 1.0
    chi_nuc: float = 0.0
    vratio_phase: float = 0.0

    def __post_init__(self):
        for name in ("A", "eta", "z_over_D", "chi_nuc", "vratio_phase"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.A < 0:
            raise InvalidParameterError(f"A must be >= 0, got {self.A}")
        if not 0.0 <= self.z_over_D <= 1.0:
            raise InvalidParameterError(f"z_over_D must lie in [0, 1], got {self.z_over_D}")

    @property
    def pendellosung_phase(self) -> float:
        return self.A * math.sqrt(1 + self.eta**2)


@dataclass(frozen=True)
class DDAmplitudes:
    t: complex
    r: complex

    @property
    def T(self) -> float:
        return abs(self.t) ** 2

    @property
    def R(self) -> float:
        return abs(self.r) ** 2


@dataclass(frozen=True)
class BladeAngles:
    phi: float
    rho: float
    vartheta: float


def dd_amplitudes(p: DDParams) -> DDAmplitudes:
    s = math.sqrt(1 + p.eta**2)
    big_phi = p.A * s
    overall = np.exp(1j * p.chi_nuc)
    t = overall * np.exp(-1j * p.A * p.eta) * (math.cos(big_phi) + 1j * p.eta / s * math.sin(big_phi))
    r_phase = -p.A * p.eta + 2 * p.A * p.eta * p.z_over_D + p.vratio_phase
    r = overall * np.exp(1j * r_phase) * (-1j / s) * math.sin(big_phi)
    return DDAmplitudes(complex(t), complex(r))


def dd_blade_angles(p: DDParams) -> BladeAngles:
    """Angles of the effective blade unitary.

    ``phi`` is the phase of ``t`` taken with a two-argument arctangent, so it
    stays continuous through the poles of tan(A sqrt(1 + eta^2)) and also
    picks up the sign of cos(A sqrt(1 + eta^2)).  ``vartheta`` uses the
    principal arcsin branch.
    """
    s = math.sqrt(1 + p.eta**2)
    big_phi = p.A * s
    phi = -p.A * p.eta + math.atan2(p.eta / s * math.sin(big_phi), math.cos(big_phi))
    rho = -p.A * p.eta + 2 * p.A * p.eta * p.z_over_D + math.pi / 2 + p.vratio_phase
    ratio = max(-1.0, min(1.0, math.sin(big_phi) / s))
    return BladeAngles(phi, rho, math.asin(ratio))


def dd_unitary(angles: BladeAngles, chi_nuc: float = 0.0) -> np.ndarray:
    c, s = math.cos(angles.vartheta), math.sin(angles.vartheta)
    return np.exp(1j * chi_nuc) * np.array(
        [
            [np.exp(1j * angles.phi) * c, np.exp(1j * angles.rho) * s],
            [-np.exp(-1j * angles.rho) * s, np.exp(-1j * angles.phi) * c],
        ],
        dtype=complex,
    )


def analytic_three_blade(vartheta: float, phi: float, chi: float) -> tuple[complex, complex]:
    """O- and H-beam amplitudes of an ideal three-blade interferometer of identical blades."""
    c, s = math.cos(vartheta), math.sin(vartheta)
    amp_o = -np.exp(-0.5j * phi) * c * s**2 * (np.exp(-0.5j * chi) + np.exp(0.5j * chi))
    amp_h = 1j * np.exp(0.5j * phi) * (c**2 * s * np.exp(0.5j * chi) - s**3 * np.exp(-0.5j * chi))
    return complex(amp_o), complex(amp_h)


def analytic_h_contrast(vartheta: float) -> float:
    """H-beam visibility of :func:`analytic_three_blade`: 2 c^2 s^2 / (c^4 + s^4)."""
    c2, s2 = math.cos(vartheta) ** 2, math.sin(vartheta) ** 2
    return 2 * c2 * s2 / (c2**2 + s2**2)


def qi_dd_crosscheck(
    blade: BladeSpec,
    dd: DDParams,
    chi_points: int = 128,
    contrast_target: float | None = None,
) -> dict:
    """Compare a lattice blade with the analytic theory; reports deviations, no verdict."""
    i_t, i_r = integrated_intensities(blade)
    amps = dd_amplitudes(dd)
    angles = dd_blade_angles(dd)

    chi = default_chi_grid(chi_points)
    report = {
        "planes": blade.planes,
        "qi_I_T": i_t,
        "qi_I_R": i_r,
        "dd_T": amps.T,
        "dd_R": amps.R,
        "dev_T": abs(i_t - amps.T),
        "dev_R": abs(i_r - amps.R),
        "dd_phi": angles.phi,
        "dd_rho": angles.rho,
        "dd_vartheta": angles.vartheta,
    }
    if isinstance(blade.params, SplitterParams):
        report["implied_tau_over_extinction"] = blade.params.theta / math.pi

    qi_fringe = fringe_scan(InterferometerSpec((blade, blade, blade)), chi)
    try:
        qc = contrast(qi_fringe)
        report.update(qi_contrast_O=qc.contrast_O, qi_contrast_H=qc.contrast_H,
                      qi_residual_O=qc.residual_O, qi_residual_H=qc.residual_H)
    except UndefinedContrastError:
        report.update(qi_contrast_O=math.nan, qi_contrast_H=math.nan,
                      qi_residual_O=math.nan, qi_residual_H=math.nan)

    amps_chi = [analytic_three_blade(angles.vartheta, angles.phi, x) for x in chi]
    dd_o = np.array([abs(o) ** 2 for o, _ in amps_chi])
    ideal = 1 + np.cos(chi)
    a = float(np.dot(ideal, dd_o) / np.dot(ideal, ideal))
    report["dd_residual_O"] = float(np.max(np.abs(dd_o - a * ideal)))
    report["dd_contrast_H"] = analytic_h_contrast(angles.vartheta)
    report["dev_contrast_H"] = abs(report["qi_contrast_H"] - report["dd_contrast_H"])
    if contrast_target is not None:
        report["contrast_target"] = contrast_target
        report["dev_contrast_target"] = abs(report["qi_contrast_H"] - contrast_target)
    return report
