"""Single-blade experiments: Borrmann-fan profiles, integrated intensities and scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import (
    BeamState,
    InvalidParameterError,
    NodeCoefficients,
    NodeParameterSource,
    SplitterParams,
    propagate,
)

__all__ = [
    "BladeSpec",
    "IntensityProfile",
    "ScanSeries",
    "blade_output",
    "borrmann_profile",
    "integrated_intensities",
    "thickness_scan",
    "pendellosung_scan",
    "default_theta_grid",
    "exit_face_to_lattice",
    "count_local_maxima",
    "skewness",
    "interquartile_width",
    "mirror_defect",
]

DEFAULT_THETA_POINTS = 500


@dataclass(frozen=True)
class BladeSpec:
    """One crystal blade: ``planes`` planes of nodes drawn from ``node_source``."""

    planes: int
    params: SplitterParams | NodeCoefficients = field(default_factory=SplitterParams)
    node_source: NodeParameterSource | None = None

    def __post_init__(self):
        if int(self.planes) != self.planes or self.planes < 1:
            raise InvalidParameterError(f"a blade needs planes >= 1, got {self.planes!r}")
        object.__setattr__(self, "planes", int(self.planes))
        if self.node_source is None:
            object.__setattr__(self, "node_source", NodeParameterSource(self.params, planes=self.planes))

    def apply(self, state: BeamState) -> BeamState:
        return propagate(state, self.planes, self.node_source)


@dataclass(frozen=True)
class IntensityProfile:
    """Exit intensities per lattice node, restricted to occupied nodes (sorted by index)."""

    j: np.ndarray
    intensity_T: np.ndarray
    intensity_R: np.ndarray

    @classmethod
    def from_state(cls, state: BeamState) -> "IntensityProfile":
        it = np.abs(state.up) ** 2
        ir = np.abs(state.down) ** 2
        keep = (it > 0) | (ir > 0)
        return cls(state.indices[keep], it[keep], ir[keep])

    @property
    def rows(self) -> list[tuple[int, float, float]]:
        return [(int(j), float(t), float(r)) for j, t, r in zip(self.j, self.intensity_T, self.intensity_R)]

    def total(self) -> float:
        return float(self.intensity_T.sum() + self.intensity_R.sum())

    def width_normalized(self) -> np.ndarray:
        """Node positions mapped linearly onto [0, 1] across the occupied window."""
        if len(self.j) < 2:
            return np.zeros(len(self.j))
        lo, hi = self.j[0], self.j[-1]
        return (self.j - lo) / (hi - lo)

    def sector(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        """``(j, intensity)`` for one sector, restricted to its own non-zero nodes."""
        values = self.intensity_T if which == "T" else self.intensity_R
        keep = values > 0
        return self.j[keep], values[keep]


@dataclass(frozen=True)
class ScanSeries:
    """Rows of a one-parameter scan; the first column is the scanned parameter."""

    parameter_name: str
    rows: list[tuple]
    columns: tuple[str, ...] = ()
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.columns:
            object.__setattr__(self, "columns", (self.parameter_name, "value_T", "value_R"))
        values = [row[0] for row in self.rows]
        if any(b <= a for a, b in zip(values, values[1:])) and any(b >= a for a, b in zip(values, values[1:])):
            raise InvalidParameterError(f"{self.parameter_name} must be strictly monotonic across rows")

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([row[k] for row in self.rows], dtype=float)


def blade_output(blade: BladeSpec, input: BeamState | None = None) -> BeamState:
    return blade.apply(BeamState.ray() if input is None else input)


def borrmann_profile(blade: BladeSpec, input: BeamState | None = None) -> IntensityProfile:
    """Transmitted and reflected intensity per exit node; default input is ``|a_0>``."""
    return IntensityProfile.from_state(blade_output(blade, input))


def integrated_intensities(blade: BladeSpec, input: BeamState | None = None) -> tuple[float, float]:
    out = blade_output(blade, input)
    return out.norm_up, out.norm_down


def thickness_scan(params: SplitterParams, n_min: int, n_max: int) -> ScanSeries:
    """Integrated (I_T, I_R) for every plane count in ``[n_min, n_max]``.

    One walk serves the whole range: the state after N planes is the input
    to plane N + 1.
    """
    if not 1 <= n_min <= n_max:
        raise InvalidParameterError(f"need 1 <= n_min <= n_max, got [{n_min}, {n_max}]")
    source = NodeParameterSource(params)
    state = propagate(BeamState.ray(), n_min, source)
    rows = [(n_min, state.norm_up, state.norm_down)]
    for n in range(n_min + 1, n_max + 1):
        state = propagate(state, 1, source, first_plane=n - 1)
        rows.append((n, state.norm_up, state.norm_down))
    return ScanSeries("N", rows, ("N", "I_T", "I_R"))


def default_theta_grid(points: int = DEFAULT_THETA_POINTS) -> np.ndarray:
    if points < 1:
        raise InvalidParameterError("theta grid needs at least one point")
    return np.linspace(0.0, math.pi, points)


def exit_face_to_lattice(node: float, planes: int) -> float:
    """Exit-face position ``k`` (0 at the bottom edge of the fan, ``planes`` at the top) to lattice index."""
    return 2 * node - planes


def pendellosung_scan(
    planes: int,
    node: float,
    theta_grid: Sequence[float] | None = None,
    xi: float = 0.0,
    zeta: float = 0.0,
    axis: str = "exit",
) -> ScanSeries:
    """Post-selected intensities at one exit node while the splitting angle varies.

    ``axis="exit"`` counts ``node`` along the exit face (``0..planes``, so
    ``planes / 2`` is the centre of the fan).  ``axis="lattice"`` takes the
    raw lattice index, where only indices of the same parity as ``planes``
    are ever occupied.  Fractional or out-of-fan nodes give zero rows.
    """
    if axis not in ("exit", "lattice"):
        raise InvalidParameterError(f"axis must be 'exit' or 'lattice', got {axis!r}")
    grid = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    j = exit_face_to_lattice(node, planes) if axis == "exit" else float(node)
    on_lattice = float(j).is_integer() and -planes <= j <= planes

    rows = []
    for theta in grid:
        if on_lattice:
            out = propagate(BeamState.ray(), planes, SplitterParams(xi, theta, zeta))
            amp_t, amp_r = out.amplitude("a", int(j)), out.amplitude("b", int(j))
            rows.append((float(theta), abs(amp_t) ** 2, abs(amp_r) ** 2))
        else:
            rows.append((float(theta), 0.0, 0.0))
    return ScanSeries(
        "theta", rows, ("theta", "I_T", "I_R"), notes={"lattice_index": j, "axis": axis}
    )


def count_local_maxima(values, floor: float = 1e-12) -> int:
    """Interior strict-left/weak-right local maxima above ``floor``."""
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        return 0
    mid = v[1:-1]
    return int(np.sum((mid > v[:-2]) & (mid >= v[2:]) & (mid > floor)))


def skewness(j, weights) -> float:
    """Standardized third central moment of a non-negative weight profile."""
    j = np.asarray(j, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    mean = np.dot(w, j)
    var = np.dot(w, (j - mean) ** 2)
    if var == 0:
        return 0.0
    return float(np.dot(w, (j - mean) ** 3) / var**1.5)


def interquartile_width(j, weights) -> float:
    """Distance between the first nodes reaching 25% and 75% cumulative weight."""
    j = np.asarray(j, dtype=float)
    cdf = np.cumsum(weights) / np.sum(weights)
    return float(j[np.searchsorted(cdf, 0.75)] - j[np.searchsorted(cdf, 0.25)])


def mirror_defect(values) -> float:
    """Max |v[p] - v[-1-p]| relative to max |v|."""
    v = np.asarray(values, dtype=float)
    if not len(v) or not v.any():
        return 0.0
    return float(np.max(np.abs(v - v[::-1])) / np.max(np.abs(v)))
