"""Multi-blade Mach-Zehnder composition on the beam-splitter lattice.

Blades are composed back to back on one index lattice.  Between blades the
state is projected onto the upward (O) or downward (H) sector; only the
branch histories in ``kept_paths`` continue, everything else leaves the
device and is booked as discarded intensity.  The inter-path phase acts as
``exp(+i chi/2)`` on a-rays and ``exp(-i chi/2)`` on b-rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .crystal import BladeSpec, IntensityProfile, ScanSeries
from .lattice import BeamState, InvalidParameterError, NodeCoefficients, SplitterParams

__all__ = [
    "UnsupportedGeometryError",
    "UndefinedContrastError",
    "InterferometerSpec",
    "PathSelector",
    "FringeSeries",
    "ContrastResult",
    "SimulationResult",
    "apply_phase",
    "project_branch",
    "path_amplitude",
    "simulate",
    "fringe_scan",
    "contrast",
    "contrast_vs_planes",
    "blade_output_profiles",
    "default_chi_grid",
    "PROFILE_LABELS",
]

BRANCHES = ("O", "H")
DEFAULT_CHI_POINTS = 128
PROFILE_LABELS = ("1T", "1R", "2TT", "2TR", "2RT", "2RR", "O", "H")


class UnsupportedGeometryError(ValueError):
    """The requested quantity is only defined for a different blade count."""


class UndefinedContrastError(ArithmeticError):
    """Fringe series is constant or identically zero, so visibility is undefined."""


def _alternating_paths(gaps: int) -> frozenset:
    a = tuple("OH"[k % 2] for k in range(gaps))
    b = tuple("HO"[k % 2] for k in range(gaps))
    return frozenset({a, b})


@dataclass(frozen=True)
class PathSelector:
    """Sector kept after each inter-blade gap, e.g. ``("O", "H")``."""

    branches: tuple[str, ...]

    def __post_init__(self):
        branches = tuple(self.branches)
        bad = [b for b in branches if b not in BRANCHES]
        if bad:
            raise InvalidParameterError(f"branch labels must be O or H, got {bad}")
        object.__setattr__(self, "branches", branches)

    @classmethod
    def of(cls, value) -> "PathSelector":
        if isinstance(value, PathSelector):
            return value
        return cls(tuple(value))

    def __len__(self):
        return len(self.branches)

    def __str__(self):
        return "".join(self.branches)


@dataclass(frozen=True)
class InterferometerSpec:
    """Ordered blades, phase placement and the kept-path policy.

    The default policy keeps the two branch histories that alternate
    sector at every gap, i.e. every middle blade reflects.  For three
    blades these are (O, H) and (H, O).
    """

    blades: tuple[BladeSpec, ...]
    phase_after_blade: int = 1
    kept_paths: frozenset | None = None

    def __post_init__(self):
        blades = tuple(self.blades)
        if len(blades) < 2:
            raise InvalidParameterError("an interferometer needs at least two blades")
        object.__setattr__(self, "blades", blades)
        if not 1 <= self.phase_after_blade < len(blades):
            raise InvalidParameterError(
                f"phase_after_blade must lie in [1, {len(blades) - 1}], got {self.phase_after_blade}"
            )
        gaps = len(blades) - 1
        if self.kept_paths is None:
            kept = _alternating_paths(gaps)
        else:
            kept = frozenset(PathSelector.of(p).branches for p in self.kept_paths)
        for path in kept:
            if len(path) != gaps:
                raise InvalidParameterError(f"kept path {path} does not match {gaps} gaps")
        object.__setattr__(self, "kept_paths", kept)

    @classmethod
    def identical(
        cls,
        planes: int,
        params: SplitterParams | NodeCoefficients,
        n_blades: int = 3,
        **kwargs,
    ) -> "InterferometerSpec":
        blade = BladeSpec(planes, params)
        return cls(tuple([blade] * n_blades), **kwargs)

    @property
    def gaps(self) -> int:
        return len(self.blades) - 1

    def is_kept(self, selector) -> bool:
        return PathSelector.of(selector).branches in self.kept_paths

    def sorted_paths(self) -> list[tuple[str, ...]]:
        return sorted(self.kept_paths)

    def describe(self) -> dict:
        return {
            "blades": [
                {"planes": b.planes, "params": b.params.as_dict()} for b in self.blades
            ],
            "phase_after_blade": self.phase_after_blade,
            "kept_paths": ["".join(p) for p in self.sorted_paths()],
        }


@dataclass(frozen=True)
class SimulationResult:
    psi_O: BeamState
    psi_H: BeamState
    I_O: float
    I_H: float
    I_discarded: float


@dataclass(frozen=True)
class FringeSeries:
    chi: np.ndarray
    I_O: np.ndarray
    I_H: np.ndarray
    I_discarded: np.ndarray | None = None

    def __post_init__(self):
        for name in ("chi", "I_O", "I_H"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.I_discarded is None:
            object.__setattr__(self, "I_discarded", np.full(len(self.chi), np.nan))
        else:
            object.__setattr__(self, "I_discarded", np.asarray(self.I_discarded, dtype=float))
        if not (len(self.chi) == len(self.I_O) == len(self.I_H) == len(self.I_discarded)):
            raise InvalidParameterError("fringe columns must have equal length")

    @property
    def rows(self) -> list[tuple[float, float, float]]:
        return [(float(c), float(o), float(h)) for c, o, h in zip(self.chi, self.I_O, self.I_H)]


@dataclass(frozen=True)
class ContrastResult:
    """Fringe visibility.

    ``contrast_O``/``contrast_H`` come from a least-squares cosine fit
    (``I_H = coeff_B - coeff_A cos(chi - phase_H)``); the ``*_maxmin``
    fields use (max - min)/(max + min) over the sampled grid.
    """

    coeff_A: float
    coeff_B: float
    contrast_O: float
    contrast_H: float
    contrast_O_maxmin: float = math.nan
    contrast_H_maxmin: float = math.nan
    phase_O: float = 0.0
    phase_H: float = 0.0
    residual_O: float = math.nan
    residual_H: float = math.nan


def apply_phase(state: BeamState, chi: float) -> BeamState:
    """Inter-path phase: a-rays pick up ``exp(i chi/2)``, b-rays ``exp(-i chi/2)``."""
    half = np.exp(0.5j * chi)
    return BeamState(state.base_index, state.up * half, state.down * np.conj(half))


def project_branch(state: BeamState, branch: str) -> BeamState:
    """Zero the complementary sector; no renormalization."""
    if branch not in BRANCHES:
        raise InvalidParameterError(f"branch must be O or H, got {branch!r}")
    zeros = np.zeros(len(state), dtype=complex)
    if branch == "O":
        return BeamState(state.base_index, state.up, zeros)
    return BeamState(state.base_index, zeros, state.down)


def _input(state: BeamState | None) -> BeamState:
    return BeamState.ray() if state is None else state


def path_amplitude(spec: InterferometerSpec, selector, input: BeamState | None = None) -> BeamState:
    """Blade 1, project, blade 2, project, ..., last blade; no phase applied.

    The selector does not have to be a kept path.
    """
    selector = PathSelector.of(selector)
    if len(selector) != spec.gaps:
        raise InvalidParameterError(f"selector {selector} has {len(selector)} labels, spec has {spec.gaps} gaps")
    state = spec.blades[0].apply(_input(input))
    for branch, blade in zip(selector.branches, spec.blades[1:]):
        state = blade.apply(project_branch(state, branch))
    return state


def _run_kept(spec: InterferometerSpec, input: BeamState | None, chi: float | None):
    """Propagate every kept branch history; returns ``({path: output}, discarded)``.

    With ``chi=None`` no phase is applied.
    """
    live = {(): spec.blades[0].apply(_input(input))}
    discarded = 0.0
    for gap in range(spec.gaps):
        nxt = {}
        for prefix, state in live.items():
            if chi is not None and gap + 1 == spec.phase_after_blade:
                state = apply_phase(state, chi)
            for branch in BRANCHES:
                path = prefix + (branch,)
                piece = project_branch(state, branch)
                if any(k[: len(path)] == path for k in spec.kept_paths):
                    nxt[path] = spec.blades[gap + 1].apply(piece)
                else:
                    discarded += piece.norm()
        live = nxt
    return live, discarded


def simulate(spec: InterferometerSpec, chi: float, input: BeamState | None = None) -> SimulationResult:
    """Run the device at phase ``chi`` by explicit operator composition."""
    live, discarded = _run_kept(spec, input, chi)
    states = [live[p] for p in sorted(live)]
    total = states[0]
    for s in states[1:]:
        total = total + s
    psi_O, psi_H = project_branch(total, "O"), project_branch(total, "H")
    return SimulationResult(psi_O, psi_H, psi_O.norm(), psi_H.norm(), discarded)


def _kept_outputs(spec: InterferometerSpec, input: BeamState | None):
    """Unphased kept-path outputs on a shared window, with their phase signs."""
    live, discarded = _run_kept(spec, input, None)
    paths = sorted(live)
    # the phase acts on the sector occupied right after blade `phase_after_blade`
    signs = np.array([1.0 if p[spec.phase_after_blade - 1] == "O" else -1.0 for p in paths])
    lo = min(live[p].base_index for p in paths)
    hi = max(live[p].base_index + len(live[p]) for p in paths)
    aligned = [live[p].reindexed(lo, hi - lo) for p in paths]
    ups = np.array([s.up for s in aligned])
    downs = np.array([s.down for s in aligned])
    return paths, signs, ups, downs, discarded


def default_chi_grid(points: int = DEFAULT_CHI_POINTS) -> np.ndarray:
    """``points`` phases evenly covering [0, 2pi)."""
    if points < 1:
        raise InvalidParameterError("chi grid needs at least one point")
    return 2 * math.pi * np.arange(points) / points


def fringe_scan(
    spec: InterferometerSpec, chi_grid: Sequence[float] | None = None, input: BeamState | None = None
) -> FringeSeries:
    """O/H intensities over a phase grid.

    The kept-path outputs are phase independent, so they are computed once
    and recombined with ``exp(+-i chi/2)`` for every grid point.
    """
    chi = default_chi_grid() if chi_grid is None else np.asarray(chi_grid, dtype=float)
    if chi.size == 0:
        raise InvalidParameterError("chi grid must be non-empty")
    _paths, signs, ups, downs, discarded = _kept_outputs(spec, input)
    phases = np.exp(0.5j * np.outer(chi, signs))
    out_up = phases @ ups
    out_down = phases @ downs
    i_o = np.sum(np.abs(out_up) ** 2, axis=1)
    i_h = np.sum(np.abs(out_down) ** 2, axis=1)
    return FringeSeries(chi, i_o, i_h, np.full(chi.shape, discarded))


def _check_period(chi: np.ndarray):
    if len(chi) < 8:
        raise InvalidParameterError(f"contrast needs at least 8 phase points, got {len(chi)}")
    span = float(chi.max() - chi.min())
    step = span / (len(chi) - 1)
    if span + step < 2 * math.pi * (1 - 1e-9):
        raise InvalidParameterError("phase grid does not cover a full period")


def _maxmin(values: np.ndarray, label: str) -> float:
    hi, lo = float(values.max()), float(values.min())
    if hi + lo <= 1e-14 or hi - lo <= 1e-12 * (hi + lo):
        raise UndefinedContrastError(f"{label} fringe is degenerate (max={hi:.3g}, min={lo:.3g})")
    return (hi - lo) / (hi + lo)


def contrast(series: FringeSeries) -> ContrastResult:
    """Visibility of both output beams from a full-period fringe series."""
    chi = series.chi
    _check_period(chi)
    v_o = _maxmin(series.I_O, "O-beam")
    v_h = _maxmin(series.I_H, "H-beam")

    design = np.column_stack([np.ones_like(chi), np.cos(chi), np.sin(chi)])
    (o0, oc, os_), *_ = np.linalg.lstsq(design, series.I_O, rcond=None)
    (h0, hc, hs), *_ = np.linalg.lstsq(design, series.I_H, rcond=None)
    amp_o = math.hypot(oc, os_)
    coeff_a = math.hypot(hc, hs)
    coeff_b = float(h0)

    # residuals against the ideal shapes a(1 + cos chi) and b - a cos chi
    ideal_o = 1 + np.cos(chi)
    a_o = float(np.dot(ideal_o, series.I_O) / np.dot(ideal_o, ideal_o))
    res_o = float(np.max(np.abs(series.I_O - a_o * ideal_o)))
    (b_h, a_h), *_ = np.linalg.lstsq(np.column_stack([np.ones_like(chi), -np.cos(chi)]), series.I_H, rcond=None)
    res_h = float(np.max(np.abs(series.I_H - (b_h - a_h * np.cos(chi)))))

    return ContrastResult(
        coeff_A=coeff_a,
        coeff_B=coeff_b,
        contrast_O=amp_o / float(o0),
        contrast_H=coeff_a / coeff_b,
        contrast_O_maxmin=v_o,
        contrast_H_maxmin=v_h,
        phase_O=math.atan2(os_, oc),
        phase_H=math.atan2(-hs, -hc),
        residual_O=res_o,
        residual_H=res_h,
    )


def contrast_vs_planes(
    params: SplitterParams | NodeCoefficients,
    n_min: int,
    n_max: int,
    chi_points: int = DEFAULT_CHI_POINTS,
    n_blades: int = 3,
) -> ScanSeries:
    """Three-blade (by default) contrast for every per-blade plane count in ``[n_min, n_max]``.

    Plane counts whose fringes are degenerate give NaN rows and are listed
    under ``notes["undefined"]``.
    """
    if not 1 <= n_min <= n_max:
        raise InvalidParameterError(f"need 1 <= n_min <= n_max, got [{n_min}, {n_max}]")
    chi = default_chi_grid(chi_points)
    rows, undefined = [], []
    for n in range(n_min, n_max + 1):
        spec = InterferometerSpec.identical(n, params, n_blades)
        try:
            c = contrast(fringe_scan(spec, chi))
        except UndefinedContrastError:
            undefined.append(n)
            rows.append((n, math.nan, math.nan, math.nan, math.nan))
            continue
        rows.append((n, c.contrast_O, c.contrast_H, c.coeff_A, c.coeff_B))
    return ScanSeries(
        "N",
        rows,
        ("N", "contrast_O", "contrast_H", "coeff_A", "coeff_B"),
        notes={"undefined": undefined},
    )


def blade_output_profiles(
    spec: InterferometerSpec, input: BeamState | None = None, chi: float = 0.0
) -> dict[str, IntensityProfile]:
    """Intensity profiles of the eight beams of a three-blade device.

    ``1T``/``1R`` leave blade 1; ``2XY`` is the beam that took branch X at
    blade 1 (T = O sector, R = H sector) and leaves blade 2 in sector Y;
    ``O``/``H`` are the kept-path outputs at phase ``chi``.
    """
    if len(spec.blades) != 3:
        raise UnsupportedGeometryError(f"beam profiles need exactly 3 blades, got {len(spec.blades)}")
    first = spec.blades[0].apply(_input(input))
    profiles = {}
    sector = {"T": "O", "R": "H"}
    for x in "TR":
        after1 = project_branch(first, sector[x])
        profiles[f"1{x}"] = IntensityProfile.from_state(after1)
        after2 = spec.blades[1].apply(after1)
        for y in "TR":
            profiles[f"2{x}{y}"] = IntensityProfile.from_state(project_branch(after2, sector[y]))
    result = simulate(spec, chi, input)
    profiles["O"] = IntensityProfile.from_state(result.psi_O)
    profiles["H"] = IntensityProfile.from_state(result.psi_H)
    return {label: profiles[label] for label in PROFILE_LABELS}
