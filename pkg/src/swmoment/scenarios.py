"""Dam-break experiment configurations and the physical/dimensionless map.

All experiments share one scaling: horizontal lengths by L = 100 m (the
computational domain becomes [0,1] or [0,1]^2), heights by H = 1.5 m
(initial heights 1.5 m and 1 m become 1 and 2/3), velocities by
U = 100 m/s, time by L/U = 1 s.  Initial vertical velocity profiles are
given physically, u(z) in m/s, and projected onto the moment basis of
whatever order the model runs at; with the linear profile u = 0.25 z this
yields u_m = H*hhat/(8U), alpha_1 = -H*hhat/(8U) and zero higher moments.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .basis import MomentCoefficients, project_profile, reconstruct_velocity
from .models import ModelSpec, state_size
from .solver import BoundarySpec, GridField

__all__ = [
    "PhysicalSetup",
    "DimensionlessParams",
    "InflowSpec",
    "ScenarioConfig",
    "nondimensionalize",
    "dam_break_setup",
    "model_spec",
    "dambreak_1d",
    "radial_collapse_2d",
    "collapse_with_inflow_2d",
    "build_initial_field",
    "redimensionalize_profile",
]


@dataclass(frozen=True)
class PhysicalSetup:
    """Characteristic scales and fluid constants, all SI."""

    L: float  # horizontal length scale, m
    H: float  # vertical length scale, m
    U: float  # horizontal velocity scale, m/s
    rho: float  # density, kg/m^3
    nu: float  # kinematic viscosity, m^2/s
    g: float  # gravitational acceleration, m/s^2
    kappa: float  # Navier bottom friction, kg/(m^2 s)

    def __post_init__(self):
        for name in ("L", "H", "U", "rho", "nu", "g"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.H >= self.L:
            raise ValueError("shallowness requires H < L")


@dataclass(frozen=True)
class DimensionlessParams:
    eps: float
    g: float
    gamma: float
    gamma_over_eps: float
    re0_inv: float


def nondimensionalize(p: PhysicalSetup) -> DimensionlessParams:
    """eps = H/L, g = g*H/U^2, gamma = kappa/(rho*U), re0_inv = nu/(eps*U*H)."""
    eps = p.H / p.L
    return DimensionlessParams(
        eps=eps,
        g=p.g * p.H / (p.U * p.U),
        gamma=p.kappa / (p.rho * p.U),
        gamma_over_eps=p.kappa / (eps * p.rho * p.U),
        re0_inv=p.nu / (eps * p.U * p.H),
    )


def dam_break_setup(kappa: float = 1e10) -> PhysicalSetup:
    """Scales of the dam-break experiments; kappa = 1e10 mimics non-slip."""
    return PhysicalSetup(L=100.0, H=1.5, U=100.0, rho=1000.0, nu=1e-6, g=9.81, kappa=kappa)


def model_spec(
    family: str,
    order: int,
    physical: Optional[PhysicalSetup] = None,
    bottom=None,
) -> ModelSpec:
    """ModelSpec with parameters derived from a physical setup."""
    p = physical or dam_break_setup()
    d = nondimensionalize(p)
    return ModelSpec(
        family=family,
        order=order,
        g=d.g,
        eps=d.eps,
        gamma=d.gamma,
        re0_inv=d.re0_inv,
        bottom=bottom,
    )


@dataclass(frozen=True)
class InflowSpec:
    """Prescribed inflow: dimensionless height plus physical profiles u(z), v(z)."""

    hhat: float
    u_profile: Optional[Callable] = None
    v_profile: Optional[Callable] = None


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry, initial data and boundaries of one experiment.

    ``height`` maps dimensionless cell-center coordinates to the initial
    dimensionless height; ``u_profile``/``v_profile`` are physical
    vertical profiles in m/s (None means zero velocity).  ``bc`` maps
    sides to "outflow" / "periodic" / "reflective" or an InflowSpec.
    """

    name: str
    dims: int
    height: Callable
    bc: dict
    nx_default: int
    ny_default: int = 0
    u_profile: Optional[Callable] = None
    v_profile: Optional[Callable] = None
    t_end: float = 3.0
    output_times: tuple = (0.0, 1.0, 2.0, 3.0)
    physical: PhysicalSetup = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.physical is None:
            object.__setattr__(self, "physical", dam_break_setup())
        if self.nx_default < 3 or (self.dims == 2 and self.ny_default < 3):
            raise ValueError("default resolution must be >= 3 cells per axis")

    def with_bc(self, **sides) -> "ScenarioConfig":
        bc = dict(self.bc)
        bc.update(sides)
        return replace(self, bc=bc)


_LINEAR_SHEAR = 0.25  # initial profile u(z) = 0.25 z, 1/s


def _linear_profile(z: float) -> float:
    return _LINEAR_SHEAR * z


def dambreak_1d() -> ScenarioConfig:
    """1D dam break: 1.5 m over the left half, 1 m over the right, with the
    linear initial shear profile; inflow left, outflow right, 3 s."""
    return ScenarioConfig(
        name="dambreak1d",
        dims=1,
        height=lambda x: 1.0 if x <= 0.5 else 2.0 / 3.0,
        u_profile=_linear_profile,
        bc={
            "left": InflowSpec(hhat=1.0, u_profile=_linear_profile),
            "right": "outflow",
        },
        nx_default=4000,
    )


def radial_collapse_2d() -> ScenarioConfig:
    """Radial collapse: 1.5 m column of radius 15 m at the domain center
    over a 1 m pool, initially at rest; outflow on all sides."""

    def height(x, y):
        return 1.0 if (x - 0.5) ** 2 + (y - 0.5) ** 2 <= 0.15**2 else 2.0 / 3.0

    return ScenarioConfig(
        name="radialcollapse2d",
        dims=2,
        height=height,
        bc={"left": "outflow", "right": "outflow", "bottom": "outflow", "top": "outflow"},
        nx_default=400,
        ny_default=400,
    )


def collapse_with_inflow_2d() -> ScenarioConfig:
    """Radial collapse geometry with the linear shear profile in both
    horizontal velocities and fixed-profile inflow at x=0 and y=0."""
    inflow = InflowSpec(hhat=2.0 / 3.0, u_profile=_linear_profile, v_profile=_linear_profile)

    def height(x, y):
        return 1.0 if (x - 0.5) ** 2 + (y - 0.5) ** 2 <= 0.15**2 else 2.0 / 3.0

    return ScenarioConfig(
        name="collapseinflow2d",
        dims=2,
        height=height,
        u_profile=_linear_profile,
        v_profile=_linear_profile,
        bc={"left": inflow, "bottom": inflow, "right": "outflow", "top": "outflow"},
        nx_default=400,
        ny_default=400,
    )


def _project_physical(profile, hhat: float, p: PhysicalSetup, order: int) -> MomentCoefficients:
    """Project a physical profile u(z) onto the dimensionless basis at a
    local height hhat: u_tilde(zeta) = u(H*hhat*zeta)/U."""
    if profile is None:
        return MomentCoefficients(mean=0.0, alphas=np.zeros(order))
    return project_profile(lambda zeta: profile(p.H * hhat * zeta) / p.U, order)


def _cell_state(hhat, cu, cv, order, dims):
    n = state_size(order, dims)
    out = np.zeros(n)
    out[0] = hhat
    out[1] = hhat * cu.mean
    if dims == 1:
        out[2:] = hhat * cu.alphas
    else:
        out[2] = hhat * cv.mean
        out[3::2] = hhat * cu.alphas
        out[4::2] = hhat * cv.alphas
    return out


def _boundary_spec(raw, scenario: ScenarioConfig, spec: ModelSpec, coeff_cache) -> BoundarySpec:
    if isinstance(raw, str):
        return BoundarySpec(kind=raw)
    if not isinstance(raw, InflowSpec):
        raise ValueError(f"unsupported boundary spec {raw!r}")
    cu = _coeffs(raw.u_profile, raw.hhat, scenario, spec, coeff_cache, "u")
    cv = _coeffs(raw.v_profile, raw.hhat, scenario, spec, coeff_cache, "v")
    state = _cell_state(raw.hhat, cu, cv, spec.order, scenario.dims)
    return BoundarySpec(kind="inflow", state=state)


def _coeffs(profile, hhat, scenario, spec, cache, tag):
    key = (tag, profile is None, round(hhat, 14))
    if key not in cache:
        cache[key] = _project_physical(profile, hhat, scenario.physical, spec.order)
    return cache[key]


def build_initial_field(
    scenario: ScenarioConfig,
    spec: ModelSpec,
    nx: Optional[int] = None,
    ny: Optional[int] = None,
) -> GridField:
    """Rasterize a scenario onto a grid at the model's moment order."""
    nx = int(nx or scenario.nx_default)
    dims = scenario.dims
    order = spec.order
    cache: dict = {}

    if dims == 1:
        dx = 1.0 / nx
        cells = np.zeros((nx + 2, state_size(order, 1)))
        xs = (np.arange(nx) + 0.5) * dx
        for i, x in enumerate(xs):
            hhat = float(scenario.height(x))
            cu = _coeffs(scenario.u_profile, hhat, scenario, spec, cache, "u")
            cells[1 + i] = _cell_state(hhat, cu, None, order, 1)
        bc = {s: _boundary_spec(r, scenario, spec, cache) for s, r in scenario.bc.items()}
        field = GridField(dims=1, nx=nx, dx=dx, order=order, cells=cells, bc=bc)
    else:
        ny = int(ny or scenario.ny_default or nx)
        dx = 1.0 / nx
        dy = 1.0 / ny
        cells = np.zeros((nx + 2, ny + 2, state_size(order, 2)))
        xs = (np.arange(nx) + 0.5) * dx
        ys = (np.arange(ny) + 0.5) * dy
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                hhat = float(scenario.height(x, y))
                cu = _coeffs(scenario.u_profile, hhat, scenario, spec, cache, "u")
                cv = _coeffs(scenario.v_profile, hhat, scenario, spec, cache, "v")
                cells[1 + i, 1 + j] = _cell_state(hhat, cu, cv, order, 2)
        bc = {s: _boundary_spec(r, scenario, spec, cache) for s, r in scenario.bc.items()}
        field = GridField(
            dims=2, nx=nx, ny=ny, dx=dx, dy=dy, order=order, cells=cells, bc=bc
        )

    if spec.bottom is not None:
        field.grad_hb = _bottom_gradients(spec.bottom, field)
    return field


def _bottom_gradients(bottom, field: GridField) -> np.ndarray:
    """Central-difference bottom slopes at interior cell centers."""
    eps = 1e-6
    if field.dims == 1:
        xs = field.x_centers()
        gx = np.array([(bottom(x + eps) - bottom(x - eps)) / (2 * eps) for x in xs])
        return gx[:, None]
    xs, ys = field.x_centers(), field.y_centers()
    out = np.zeros((field.nx, field.ny, 2))
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            out[i, j, 0] = (bottom(x + eps, y) - bottom(x - eps, y)) / (2 * eps)
            out[i, j, 1] = (bottom(x, y + eps) - bottom(x, y - eps)) / (2 * eps)
    return out


def redimensionalize_profile(
    coeffs: MomentCoefficients, hhat: float, U: float, H: float, z_nodes
) -> np.ndarray:
    """Physical vertical velocity at heights z (m): rows of (z, u).

    u(z) = U * [mean + sum_j alphas_j phi_j(z / (H*hhat))]; z must not
    exceed the local free surface H*hhat.
    """
    z = np.atleast_1d(np.asarray(z_nodes, dtype=float))
    top = H * hhat
    if np.any(z < 0) or np.any(z > top * (1 + 1e-12)):
        raise ValueError(f"profile heights must lie in [0, {top:.6g}] m")
    zeta = np.clip(z / top, 0.0, 1.0)
    u = U * np.atleast_1d(reconstruct_velocity(coeffs, zeta))
    return np.column_stack([z, u])
