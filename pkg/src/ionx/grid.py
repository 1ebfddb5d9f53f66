"""Compartment grids and the circuit-network element values.

Positions are measured in Debye lengths from the left membrane/solution
interface, so the membrane occupies ``0 <= xi <= d`` and the baths extend to
``-delta`` and ``d + delta``.

Every compartment is split into two half-cells.  The discrete unknowns live on
``2N + 1`` nodes: even nodes are compartment faces, odd nodes compartment
centres.  Link ``j`` joins nodes ``j`` and ``j + 1`` and belongs to
compartment ``j // 2``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .csvio import write_csv
from .dimensionless import DimensionlessSystem, InvalidParameterError


class OutOfDomainError(ValueError):
    """A position or time lies outside the domain of a function."""


class Region(enum.IntEnum):
    SOLUTION_LEFT = 0
    MEMBRANE = 1
    SOLUTION_RIGHT = 2


FINE_WIDTH = 0.05
TRANSITION_WIDTH = 0.6

# block counts of the reference grid; each bath: coarse | transition | fine,
# membrane: fine | transition | core | transition | fine
REFERENCE_COUNTS = {"coarse": 30, "transition": 10, "fine": 80, "core": 60}


@dataclass(frozen=True, eq=False)
class CompartmentGrid:
    widths: np.ndarray
    region: np.ndarray

    def __post_init__(self):
        widths = np.asarray(self.widths, dtype=float)
        region = np.asarray(self.region, dtype=int)
        if widths.ndim != 1 or widths.shape != region.shape:
            raise InvalidParameterError("widths and region must be 1-D arrays of equal length")
        if np.any(widths <= 0):
            raise InvalidParameterError("compartment widths must be positive")
        if np.any(np.diff(region) < 0) or not np.isin(region, [0, 1, 2]).all():
            raise InvalidParameterError("regions must be contiguous: left bath, membrane, right bath")
        if not (region == Region.MEMBRANE).any():
            raise InvalidParameterError("grid has no membrane compartments")
        widths.setflags(write=False)
        region.setflags(write=False)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "region", region)

    @property
    def N(self) -> int:
        return self.widths.size

    @property
    def membrane(self) -> np.ndarray:
        return self.region == Region.MEMBRANE

    @property
    def left_length(self) -> float:
        return float(self.widths[self.region == Region.SOLUTION_LEFT].sum())

    @property
    def membrane_length(self) -> float:
        return float(self.widths[self.membrane].sum())

    @property
    def right_length(self) -> float:
        return float(self.widths[self.region == Region.SOLUTION_RIGHT].sum())

    @property
    def faces(self) -> np.ndarray:
        """Face positions, ``N + 1`` values from ``-left_length`` upward."""
        return np.concatenate([[0.0], np.cumsum(self.widths)]) - self.left_length

    @property
    def centers(self) -> np.ndarray:
        f = self.faces
        return 0.5 * (f[:-1] + f[1:])

    @property
    def nodes(self) -> np.ndarray:
        """Positions of all ``2N + 1`` network nodes (faces and centres interleaved)."""
        x = np.empty(2 * self.N + 1)
        x[0::2] = self.faces
        x[1::2] = self.centers
        return x

    @property
    def half_widths(self) -> np.ndarray:
        """Length of each of the ``2N`` links."""
        return np.repeat(0.5 * self.widths, 2)

    @property
    def membrane_slice(self) -> slice:
        idx = np.flatnonzero(self.membrane)
        return slice(int(idx[0]), int(idx[-1]) + 1)

    def exit_face(self) -> int:
        """Face index of the membrane / right-bath interface."""
        return self.membrane_slice.stop

    def mid_membrane(self) -> int:
        """Index of the compartment nearest the membrane mid-plane."""
        sl = self.membrane_slice
        mid = 0.5 * self.membrane_length
        c = self.centers[sl]
        return sl.start + int(np.argmin(np.abs(c - mid)))

    def to_csv(self, path):
        """Dump ``k, xi, width, region`` (1-based ``k``)."""
        names = {int(r): r.name for r in Region}
        rows = [(k + 1, xi, w, names[int(r)])
                for k, (xi, w, r) in enumerate(zip(self.centers, self.widths, self.region))]
        write_csv(path, ["k", "xi", "width", "region"], rows)


def _block(width, count):
    return np.full(count, float(width))


def build_scaled_grid(d: float = 50.0, delta: float = 100.0, counts: dict | None = None) -> CompartmentGrid:
    """Reference grid layout rescaled to a membrane of thickness ``d`` and baths of width ``delta``.

    The fine (0.05) and transition (0.6) widths are kept; the coarse bath
    block and the membrane core block are sized so the regions add up to
    ``delta`` and ``d``.  Each interface sits in the middle of a fine zone.
    """
    n = dict(REFERENCE_COUNTS)
    n.update(counts or {})
    zone = n["fine"] * FINE_WIDTH + n["transition"] * TRANSITION_WIDTH
    coarse = (delta - zone) / n["coarse"]
    core = (d - 2 * zone) / n["core"]
    if coarse <= 0 or core <= 0:
        raise InvalidParameterError(
            f"d={d}, delta={delta} are too small for the fixed fine/transition zones ({zone} each)")
    bath_l = np.concatenate([_block(coarse, n["coarse"]), _block(TRANSITION_WIDTH, n["transition"]),
                             _block(FINE_WIDTH, n["fine"])])
    mem = np.concatenate([_block(FINE_WIDTH, n["fine"]), _block(TRANSITION_WIDTH, n["transition"]),
                          _block(core, n["core"]), _block(TRANSITION_WIDTH, n["transition"]),
                          _block(FINE_WIDTH, n["fine"])])
    bath_r = bath_l[::-1]
    widths = np.concatenate([bath_l, mem, bath_r])
    region = np.concatenate([np.full(bath_l.size, Region.SOLUTION_LEFT),
                             np.full(mem.size, Region.MEMBRANE),
                             np.full(bath_r.size, Region.SOLUTION_RIGHT)])
    return CompartmentGrid(widths, region)


def build_reference_grid() -> CompartmentGrid:
    """The 480-compartment grid with the width list taken verbatim.

    Widths: 3 for k=1..30 and 451..480; 0.6 for k=31..40, 201..210,
    271..280, 441..450; 0.05 for k=41..200 and 281..440; 1.5 for k=211..270.
    The interfaces are placed in the middle of the two 0.05 zones
    (after k=120 and k=360) so that each interface zone covers 4 Debye
    lengths on either side.  The widths then add up to 310: baths of 100 and
    a membrane of 110.
    """
    widths = np.empty(480)
    k = np.arange(1, 481)
    widths[(k <= 30) | (k >= 451)] = 3.0
    widths[((k >= 31) & (k <= 40)) | ((k >= 201) & (k <= 210))
           | ((k >= 271) & (k <= 280)) | ((k >= 441) & (k <= 450))] = 0.6
    widths[((k >= 41) & (k <= 200)) | ((k >= 281) & (k <= 440))] = 0.05
    widths[(k >= 211) & (k <= 270)] = 1.5
    region = np.where(k <= 120, Region.SOLUTION_LEFT,
                      np.where(k <= 360, Region.MEMBRANE, Region.SOLUTION_RIGHT))
    return CompartmentGrid(widths, region)


def build_uniform_grid(n_left: int, n_membrane: int, n_right: int, width: float = 1.0) -> CompartmentGrid:
    """Equal-width compartments; handy for small test problems."""
    widths = np.full(n_left + n_membrane + n_right, float(width))
    region = np.repeat([Region.SOLUTION_LEFT, Region.MEMBRANE, Region.SOLUTION_RIGHT],
                       [n_left, n_membrane, n_right])
    return CompartmentGrid(widths, region)


def system_for_grid(s: DimensionlessSystem, g: CompartmentGrid) -> DimensionlessSystem:
    """Copy of ``s`` whose ``d`` and ``delta`` match the grid geometry."""
    from dataclasses import replace
    if not np.isclose(g.left_length, g.right_length):
        raise InvalidParameterError("grid baths have unequal widths")
    return replace(s, d=g.membrane_length, delta=g.left_length)


def theta_at(s: DimensionlessSystem, xi) -> np.ndarray | float:
    """Fixed-charge density at ``xi``: ``X`` inside ``[0, d]``, zero in the baths."""
    x = np.asarray(xi, dtype=float)
    if np.any(x < -s.delta) or np.any(x > s.d + s.delta):
        raise OutOfDomainError(f"xi outside [{-s.delta}, {s.d + s.delta}]")
    out = np.where((x >= 0.0) & (x <= s.d), s.X, 0.0)
    return float(out) if out.ndim == 0 else out


def theta_profile(g: CompartmentGrid, s: DimensionlessSystem) -> np.ndarray:
    """Per-compartment fixed charge; the jump is aligned with compartment faces."""
    return np.where(g.membrane, s.X, 0.0)


def diffusion_profile(g: CompartmentGrid, s: DimensionlessSystem) -> np.ndarray:
    """``D_ip`` per species and compartment, shape ``(m, N)``."""
    D_S = np.asarray(s.D_S, dtype=float)[:, None]
    D_M = np.asarray(s.D_M, dtype=float)[:, None]
    return np.where(g.membrane[None, :], D_M, D_S)


@dataclass(frozen=True)
class NetworkElements:
    """Element values of the compartment network.

    ``GJ_e[i, k, 0]`` is the migration source on the left half of
    compartment ``k`` (flux entering), ``GJ_e[i, k, 1]`` on the right half
    (flux leaving).
    """

    R_d: np.ndarray
    C_d: np.ndarray
    R_p: np.ndarray
    GJ_p: np.ndarray
    GJ_e: np.ndarray


def network_elements(g: CompartmentGrid, s: DimensionlessSystem, state) -> NetworkElements:
    """Evaluate every network element for ``state`` on grid ``g``."""
    nodes = np.asarray(state.nodes)
    if nodes.shape != (2 * g.N + 1, s.n_species + 1):
        raise ValueError(f"state shape {nodes.shape} does not match grid with N={g.N}")
    D = diffusion_profile(g, s)
    z = np.asarray(s.z, dtype=float)[:, None]
    delta_k = g.widths
    c = nodes[:, :-1].T
    phi = nodes[:, -1]
    c_face = c[:, 0::2]
    c_mid = c[:, 1::2]
    phi_face, phi_mid = phi[0::2], phi[1::2]
    half = 0.5 * delta_k
    ge_minus = -D * z * c_face[:, :-1] * (phi_mid - phi_face[:-1]) / half
    ge_plus = D * z * c_face[:, 1:] * (phi_mid - phi_face[1:]) / half
    rho = (z * c_mid).sum(axis=0) - theta_profile(g, s)
    return NetworkElements(
        R_d=delta_k / (2.0 * D),
        C_d=delta_k.copy(),
        R_p=delta_k / (2.0 * s.epsilon),
        GJ_p=-delta_k * rho,
        GJ_e=np.stack([ge_minus, ge_plus], axis=-1),
    )
