"""Two-ray lattice wavefunction and the beam-splitter plane walk.

A crystal blade is coarse-grained into vertical planes of scattering nodes.
Every node couples the upward ray ``a_j`` and the downward ray ``b_j``::

    a_j -> t_a a_{j+1} + r_a b_{j-1}
    b_j -> r_b a_{j+1} + t_b b_{j-1}

so one plane moves transmitted amplitude up by one index and reflected
amplitude down by one index.  States are stored densely over a contiguous
index window with an integer base offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

__all__ = [
    "InvalidParameterError",
    "SplitterParams",
    "NodeCoefficients",
    "NodeParameterSource",
    "BeamState",
    "derive_coefficients",
    "apply_plane",
    "propagate",
    "split_components",
    "enumerate_paths",
    "enumerate_paths_oracle",
    "HADAMARD",
    "BALANCED",
    "ORACLE_MAX_PLANES",
]

ORACLE_MAX_PLANES = 20


class InvalidParameterError(ValueError):
    """Raised for non-finite or out-of-range model parameters."""


@dataclass(frozen=True)
class SplitterParams:
    """Node angles: transmission phase ``xi``, splitting angle ``theta``, reflection phase ``zeta``.

    ``theta`` is reduced into [0, pi].  A value in (pi, 2pi) is mapped to
    ``theta - pi`` with ``xi`` and ``zeta`` shifted by pi, which leaves all
    four node coefficients unchanged.  The raw input is kept in
    ``theta_input`` when a reduction happened.
    """

    xi: float = 0.0
    theta: float = 0.0
    zeta: float = 0.0
    theta_input: float | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("xi", "theta", "zeta"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError) as exc:
                raise InvalidParameterError(f"{name} must be a real number, got {value!r}") from exc
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

        theta = self.theta
        if 0.0 <= theta <= math.pi:
            return
        reduced = math.fmod(theta, 2 * math.pi)
        if reduced < 0:
            reduced += 2 * math.pi
        xi, zeta = self.xi, self.zeta
        if reduced > math.pi:
            reduced -= math.pi
            xi += math.pi
            zeta += math.pi
        object.__setattr__(self, "theta_input", theta)
        object.__setattr__(self, "theta", reduced)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "zeta", zeta)

    @property
    def was_reduced(self) -> bool:
        return self.theta_input is not None

    def as_dict(self) -> dict:
        out = {"xi": self.xi, "theta": self.theta, "zeta": self.zeta}
        if self.was_reduced:
            out["theta_input"] = self.theta_input
        return out


BALANCED = SplitterParams(0.0, math.pi / 4, 0.0)


@dataclass(frozen=True)
class NodeCoefficients:
    """Complex node amplitudes; must satisfy the three unitarity identities to 1e-12."""

    t_a: complex
    t_b: complex
    r_a: complex
    r_b: complex

    def __post_init__(self):
        for name in ("t_a", "t_b", "r_a", "r_b"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not self.is_unitary():
            raise InvalidParameterError(f"node coefficients are not unitary: {self.unitarity_defects()}")

    def unitarity_defects(self) -> tuple[float, float, float]:
        """Absolute deviations of the three unitarity identities."""
        return (
            abs(abs(self.t_a) ** 2 + abs(self.r_a) ** 2 - 1.0),
            abs(abs(self.t_b) ** 2 + abs(self.r_b) ** 2 - 1.0),
            abs(self.t_a * self.r_b.conjugate() + self.r_a * self.t_b.conjugate()),
        )

    def is_unitary(self, tol: float = 1e-12) -> bool:
        return max(self.unitarity_defects()) <= tol

    def matrix(self) -> np.ndarray:
        """2x2 node matrix acting on (a, b) column vectors."""
        return np.array([[self.t_a, self.r_b], [self.r_a, self.t_b]], dtype=complex)

    def as_dict(self) -> dict:
        return {k: [getattr(self, k).real, getattr(self, k).imag] for k in ("t_a", "t_b", "r_a", "r_b")}


# a -> (a + b)/sqrt2, b -> (a - b)/sqrt2.  Not a member of the angle family;
# it equals BALANCED up to the sign (-1)**((N - j)/2) on the output node j.
HADAMARD = NodeCoefficients(
    t_a=1 / math.sqrt(2), t_b=-1 / math.sqrt(2), r_a=1 / math.sqrt(2), r_b=1 / math.sqrt(2)
)


def derive_coefficients(params: SplitterParams | NodeCoefficients) -> NodeCoefficients:
    """Node coefficients for the (xi, theta, zeta) parametrization.

    Explicit :class:`NodeCoefficients` pass through unchanged.

    >>> c = derive_coefficients(SplitterParams(0.0, 0.0, 0.0))
    >>> (c.t_a, c.r_a)
    ((1+0j), (-0+0j))
    """
    if isinstance(params, NodeCoefficients):
        return params
    if not isinstance(params, SplitterParams):
        raise InvalidParameterError(f"expected SplitterParams, got {type(params).__name__}")
    c, s = math.cos(params.theta), math.sin(params.theta)
    return NodeCoefficients(
        t_a=complex(np.exp(1j * params.xi) * c),
        t_b=complex(np.exp(-1j * params.xi) * c),
        r_a=complex(-np.exp(-1j * params.zeta) * s),
        r_b=complex(np.exp(1j * params.zeta) * s),
    )


@dataclass(frozen=True)
class NodeParameterSource:
    """Per-node parameter lookup for one blade.

    Every node uses ``uniform`` unless ``overrides`` has an entry keyed by
    ``(plane, node)``; planes are numbered from 0 within the blade.  Values
    may be angles or explicit coefficients.
    """

    uniform: SplitterParams | NodeCoefficients = BALANCED
    overrides: Mapping[tuple[int, int], SplitterParams | NodeCoefficients] | None = None
    planes: int | None = None

    def __post_init__(self):
        if not isinstance(self.uniform, (SplitterParams, NodeCoefficients)):
            raise InvalidParameterError("uniform must be SplitterParams or NodeCoefficients")
        by_plane: dict[int, dict[int, NodeCoefficients]] = {}
        if self.overrides:
            for key, value in self.overrides.items():
                plane, node = int(key[0]), int(key[1])
                if plane < 0 or (self.planes is not None and plane >= self.planes):
                    raise InvalidParameterError(
                        f"override plane {plane} outside declared range [0, {self.planes})"
                    )
                by_plane.setdefault(plane, {})[node] = derive_coefficients(value)
            object.__setattr__(self, "overrides", dict(self.overrides))
        else:
            object.__setattr__(self, "overrides", None)
        object.__setattr__(self, "_by_plane", by_plane)
        object.__setattr__(self, "_uniform_coeffs", derive_coefficients(self.uniform))

    @classmethod
    def of(cls, params) -> "NodeParameterSource":
        if isinstance(params, NodeParameterSource):
            return params
        return cls(uniform=params)

    @property
    def is_uniform(self) -> bool:
        return not self._by_plane

    def coefficients_at(self, plane: int, node: int) -> NodeCoefficients:
        overrides = self._by_plane.get(plane)
        if overrides and node in overrides:
            return overrides[node]
        return self._uniform_coeffs

    def plane_coefficients(self, plane: int, nodes: np.ndarray | None):
        """Coefficients for sorted ``nodes``: four scalars, or four arrays if the plane has overrides."""
        u = self._uniform_coeffs
        overrides = self._by_plane.get(plane)
        if not overrides:
            return u.t_a, u.t_b, u.r_a, u.r_b
        n = len(nodes)
        ta = np.full(n, u.t_a, dtype=complex)
        tb = np.full(n, u.t_b, dtype=complex)
        ra = np.full(n, u.r_a, dtype=complex)
        rb = np.full(n, u.r_b, dtype=complex)
        for node, c in overrides.items():
            p = int(np.searchsorted(nodes, node))
            if p < n and nodes[p] == node:
                ta[p], tb[p], ra[p], rb[p] = c.t_a, c.t_b, c.r_a, c.r_b
        return ta, tb, ra, rb

    def describe(self) -> dict:
        out = {"uniform": self.uniform.as_dict()}
        if self.overrides:
            out["overrides"] = len(self.overrides)
        return out


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=complex, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BeamState:
    """Amplitudes ``up`` (a-rays) and ``down`` (b-rays) on nodes ``base_index + p``."""

    base_index: int
    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        up, down = _frozen(self.up), _frozen(self.down)
        if up.shape != down.shape:
            raise InvalidParameterError("up and down sectors must share one index window")
        if not (np.all(np.isfinite(up)) and np.all(np.isfinite(down))):
            raise InvalidParameterError("amplitudes must be finite")
        object.__setattr__(self, "base_index", int(self.base_index))
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @classmethod
    def ray(cls, sector: str = "a", index: int = 0, amplitude: complex = 1.0) -> "BeamState":
        """A single ray ``|a_index>`` or ``|b_index>``."""
        if sector not in ("a", "b"):
            raise InvalidParameterError(f"sector must be 'a' or 'b', got {sector!r}")
        up = [amplitude if sector == "a" else 0.0]
        down = [amplitude if sector == "b" else 0.0]
        return cls(index, up, down)

    @classmethod
    def from_amplitudes(
        cls, up: Mapping[int, complex] | None = None, down: Mapping[int, complex] | None = None
    ) -> "BeamState":
        up, down = dict(up or {}), dict(down or {})
        keys = list(up) + list(down)
        if not keys:
            return cls.zero()
        lo, hi = min(keys), max(keys)
        u = np.zeros(hi - lo + 1, dtype=complex)
        d = np.zeros(hi - lo + 1, dtype=complex)
        for j, v in up.items():
            u[j - lo] = v
        for j, v in down.items():
            d[j - lo] = v
        return cls(lo, u, d)

    @classmethod
    def zero(cls, base_index: int = 0) -> "BeamState":
        return cls(base_index, np.zeros(0, complex), np.zeros(0, complex))

    def __len__(self):
        return len(self.up)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.base_index, self.base_index + len(self.up))

    @property
    def norm_up(self) -> float:
        return float(np.vdot(self.up, self.up).real)

    @property
    def norm_down(self) -> float:
        return float(np.vdot(self.down, self.down).real)

    def norm(self) -> float:
        """Total probability (squared norm)."""
        return self.norm_up + self.norm_down

    def amplitude(self, sector: str, index: int) -> complex:
        p = index - self.base_index
        if not 0 <= p < len(self.up):
            return 0j
        return complex(self.up[p] if sector == "a" else self.down[p])

    def as_dicts(self, floor: float = 0.0) -> tuple[dict[int, complex], dict[int, complex]]:
        """Non-zero amplitudes keyed by lattice index (|amp| <= floor dropped)."""
        idx = self.indices
        up = {int(j): complex(v) for j, v in zip(idx, self.up) if abs(v) > floor}
        down = {int(j): complex(v) for j, v in zip(idx, self.down) if abs(v) > floor}
        return up, down

    def reindexed(self, base_index: int, length: int) -> "BeamState":
        """Same state on the window ``[base_index, base_index + length)``; must contain the support."""
        up = np.zeros(length, dtype=complex)
        down = np.zeros(length, dtype=complex)
        lo = max(self.base_index, base_index)
        hi = min(self.base_index + len(self.up), base_index + length)
        if hi > lo:
            src = slice(lo - self.base_index, hi - self.base_index)
            dst = slice(lo - base_index, hi - base_index)
            up[dst] = self.up[src]
            down[dst] = self.down[src]
        out = BeamState(base_index, up, down)
        if not math.isclose(out.norm(), self.norm(), rel_tol=0, abs_tol=1e-300 + 1e-15 * self.norm()):
            raise InvalidParameterError("reindex window does not cover the state support")
        return out

    def trimmed(self, floor: float = 0.0) -> "BeamState":
        """Drop leading/trailing nodes whose amplitudes are all ``<= floor`` in magnitude."""
        mask = (np.abs(self.up) > floor) | (np.abs(self.down) > floor)
        if not mask.any():
            return BeamState.zero(self.base_index)
        nz = np.flatnonzero(mask)
        lo, hi = nz[0], nz[-1] + 1
        return BeamState(self.base_index + lo, self.up[lo:hi], self.down[lo:hi])

    def _aligned(self, other: "BeamState"):
        if len(self) == 0:
            return other.base_index, len(other)
        if len(other) == 0:
            return self.base_index, len(self)
        lo = min(self.base_index, other.base_index)
        hi = max(self.base_index + len(self), other.base_index + len(other))
        return lo, hi - lo

    def __add__(self, other: "BeamState") -> "BeamState":
        if not isinstance(other, BeamState):
            return NotImplemented
        lo, n = self._aligned(other)
        a, b = self.reindexed(lo, n), other.reindexed(lo, n)
        return BeamState(lo, a.up + b.up, a.down + b.down)

    def __sub__(self, other: "BeamState") -> "BeamState":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "BeamState":
        if isinstance(scalar, BeamState):
            return NotImplemented
        return BeamState(self.base_index, self.up * scalar, self.down * scalar)

    __rmul__ = __mul__

    def max_abs_difference(self, other: "BeamState") -> float:
        lo, n = self._aligned(other)
        if n == 0:
            return 0.0
        a, b = self.reindexed(lo, n), other.reindexed(lo, n)
        return float(max(np.max(np.abs(a.up - b.up)), np.max(np.abs(a.down - b.down))))

    def __repr__(self):
        return f"BeamState(base_index={self.base_index}, nodes={len(self)}, norm={self.norm():.15g})"


def apply_plane(state: BeamState, source, plane: int = 0) -> BeamState:
    """One plane of nodes acting on every stored index; the window grows by one per side."""
    source = NodeParameterSource.of(source)
    n = len(state)
    ta, tb, ra, rb = source.plane_coefficients(plane, state.indices)
    up = np.zeros(n + 2, dtype=complex)
    down = np.zeros(n + 2, dtype=complex)
    # new window starts at base - 1: a_j lands at p + 2, b_j at p
    up[2:] = ta * state.up + rb * state.down
    down[:n] = ra * state.up + tb * state.down
    return BeamState(state.base_index - 1, up, down)


def propagate(
    state: BeamState,
    planes: int,
    source,
    first_plane: int = 0,
) -> BeamState:
    """Apply ``planes`` successive planes (numbered from ``first_plane``).

    Equivalent to repeated :func:`apply_plane`.  A plane moves every
    amplitude by one index, so the even and odd sublattices never mix; each
    is evolved separately on a compressed grid (every other node), in
    preallocated double buffers with no per-plane allocation.
    """
    if planes < 0:
        raise InvalidParameterError(f"plane count must be >= 0, got {planes}")
    if planes == 0:
        return state
    source = NodeParameterSource.of(source)
    n = len(state)
    up = np.zeros(n + 2 * planes, dtype=complex)
    down = np.zeros(n + 2 * planes, dtype=complex)
    new_base = state.base_index - planes
    for start in (0, 1):
        u, d = state.up[start::2], state.down[start::2]
        if not (u.any() or d.any()):
            continue
        first_node = state.base_index + start
        su, sd = _evolve_sublattice(first_node, u, d, planes, source, first_plane)
        # compressed slot m sits at lattice node first_node - planes + 2m
        p0 = first_node - planes - new_base
        up[p0 : p0 + 2 * len(su) : 2] = su
        down[p0 : p0 + 2 * len(sd) : 2] = sd
    return BeamState(new_base, up, down)


def _real_if_possible(c):
    if np.ndim(c) == 0 and complex(c).imag == 0.0:
        return complex(c).real
    return c


def _evolve_sublattice(first_node, u0, d0, planes, source, first_plane):
    # slot m <-> node first_node + 2m; after a plane the origin moves down by
    # one node, so a-rays advance one slot and b-rays keep their slot
    n0 = len(u0)
    size = n0 + planes
    ups = (np.zeros(size, complex), np.zeros(size, complex))
    downs = (np.zeros(size, complex), np.zeros(size, complex))
    scratch = np.empty(size, complex)
    ups[0][:n0] = u0
    downs[0][:n0] = d0
    uniform = source.is_uniform
    if uniform:
        ta, tb, ra, rb = map(_real_if_possible, source.plane_coefficients(first_plane, None))

    cur, w = 0, n0
    for k in range(planes):
        u, d = ups[cur][:w], downs[cur][:w]
        nu, nd = ups[1 - cur], downs[1 - cur]
        if not uniform:
            nodes = first_node - k + 2 * np.arange(w)
            ta, tb, ra, rb = source.plane_coefficients(first_plane + k, nodes)
        tmp = scratch[:w]

        out = nu[1 : w + 1]
        np.multiply(u, ta, out=out)
        np.multiply(d, rb, out=tmp)
        out += tmp
        nu[0] = 0

        out = nd[:w]
        np.multiply(u, ra, out=out)
        np.multiply(d, tb, out=tmp)
        out += tmp
        nd[w] = 0

        w += 1
        cur = 1 - cur
    return ups[cur][:w], downs[cur][:w]


def split_components(state: BeamState) -> tuple[BeamState, BeamState, float, float]:
    """Separate the a-sector (transmitted) and b-sector (reflected); no renormalization."""
    zeros = np.zeros(len(state), dtype=complex)
    transmitted = BeamState(state.base_index, state.up, zeros)
    reflected = BeamState(state.base_index, zeros, state.down)
    return transmitted, reflected, state.norm_up, state.norm_down


def enumerate_paths(
    start: int, planes: int, source, sector: str = "a"
) -> Iterator[tuple[str, int, complex, int]]:
    """Yield ``(final_sector, final_index, amplitude, reflections)`` for every path history.

    Each of the ``2**planes`` transmit/reflect histories is followed node by
    node and its amplitude is the product of the node coefficients met on
    the way.
    """
    if planes > ORACLE_MAX_PLANES:
        raise InvalidParameterError(
            f"path enumeration is limited to {ORACLE_MAX_PLANES} planes (cost 2**N), got {planes}"
        )
    if planes < 0:
        raise InvalidParameterError(f"plane count must be >= 0, got {planes}")
    source = NodeParameterSource.of(source)

    stack = [(0, sector, start, 1.0 + 0j, 0)]
    while stack:
        plane, sec, j, amp, refl = stack.pop()
        if plane == planes:
            yield sec, j, amp, refl
            continue
        c = source.coefficients_at(plane, j)
        if sec == "a":
            stack.append((plane + 1, "a", j + 1, amp * c.t_a, refl))
            stack.append((plane + 1, "b", j - 1, amp * c.r_a, refl + 1))
        else:
            stack.append((plane + 1, "a", j + 1, amp * c.r_b, refl + 1))
            stack.append((plane + 1, "b", j - 1, amp * c.t_b, refl))


def enumerate_paths_oracle(
    start: int, planes: int, source, sector: str = "a"
) -> BeamState:
    """Brute-force output state for a single input ray, summed over all path histories."""
    up: dict[int, complex] = {}
    down: dict[int, complex] = {}
    for sec, j, amp, _refl in enumerate_paths(start, planes, source, sector):
        target = up if sec == "a" else down
        target[j] = target.get(j, 0j) + amp
    return BeamState.from_amplitudes(up, down)
