"""Beam-splitter lattice model of dynamical diffraction in perfect crystals
and multi-blade neutron interferometers."""

__version__ = "0.1.0"

from .lattice import (  # noqa: E402
    BALANCED,
    HADAMARD,
    BeamState,
    InvalidParameterError,
    NodeCoefficients,
    NodeParameterSource,
    SplitterParams,
    apply_plane,
    derive_coefficients,
    enumerate_paths_oracle,
    propagate,
    split_components,
)
from .crystal import (  # noqa: E402
    BladeSpec,
    IntensityProfile,
    ScanSeries,
    borrmann_profile,
    integrated_intensities,
    pendellosung_scan,
    thickness_scan,
)
from .interferometer import (  # noqa: E402
    ContrastResult,
    FringeSeries,
    InterferometerSpec,
    PathSelector,
    UndefinedContrastError,
    UnsupportedGeometryError,
    apply_phase,
    blade_output_profiles,
    contrast,
    contrast_vs_planes,
    fringe_scan,
    path_amplitude,
    project_branch,
    simulate,
)
from .ddref import (  # noqa: E402
    BladeAngles,
    DDAmplitudes,
    DDParams,
    analytic_three_blade,
    dd_amplitudes,
    dd_blade_angles,
    dd_unitary,
    qi_dd_crosscheck,
)
