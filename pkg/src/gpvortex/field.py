"""Grids, sampled fields, discrete operators, and every energy functional.

All fields live on a uniform cell-centered grid over the box
``[-R, R]^2``: the sample ``values[i, j]`` sits at
``x1 = -R + (i + 1/2) h``, ``x2 = -R + (j + 1/2) h`` with ``h = 2R/n``
(axis 0 is the first coordinate).  Quadrature is the midpoint rule
``h^2 * sum``, and gradients are centered differences with one-sided
stencils on the outermost rows; energies pair the two so that the
product-rule defect of the discrete energy decomposition shrinks at
second order in ``h``.  Fields entering an energy are expected to be
negligible near the box edge; ``check_boundary_tail`` emits a warning
when a physical field is not.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyRegion,
    GridMismatch,
    NonFiniteEnergy,
)
from .params import PhysicalParams, elliptic_radius_sq

__all__ = [
    "Grid2D",
    "ScalarField",
    "ComplexField",
    "integrate",
    "mass",
    "gradient",
    "covariant_kinetic_density",
    "energy_F",
    "energy_E",
    "energy_G",
    "energy_gl2d",
    "local_energy",
    "dump_field",
    "load_field",
    "resample_fourier",
    "check_boundary_tail",
]


class Grid2D:
    """Uniform cell-centered grid on ``[-R, R]^2`` with ``n`` points per axis."""

    def __init__(self, half_extent: float, n: int):
        if half_extent <= 0:
            raise ValueError("half_extent must be positive")
        n = int(n)
        if n < 64 or n % 2:
            raise ValueError(f"n must be an even integer >= 64, got {n}")
        self.half_extent = float(half_extent)
        self.n = n
        self.spacing = 2.0 * self.half_extent / n
        self.x1 = -self.half_extent + (np.arange(n) + 0.5) * self.spacing
        self.x2 = self.x1.copy()
        self._mesh = None

    def mesh(self):
        """Coordinate arrays ``(X1, X2)`` of shape ``(n, n)``, cached."""
        if self._mesh is None:
            self._mesh = np.meshgrid(self.x1, self.x2, indexing="ij")
        return self._mesh

    def radius_sq(self):
        X1, X2 = self.mesh()
        return X1 * X1 + X2 * X2

    def elliptic_radius(self, lam: float):
        X1, X2 = self.mesh()
        return np.sqrt(elliptic_radius_sq(X1, X2, lam))

    def __eq__(self, other):
        return (
            isinstance(other, Grid2D)
            and self.n == other.n
            and self.half_extent == other.half_extent
        )

    def __hash__(self):
        return hash((self.half_extent, self.n))

    def __repr__(self):
        return f"Grid2D(half_extent={self.half_extent}, n={self.n})"


@dataclass
class ScalarField:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise GridMismatch(
                f"values shape {self.values.shape} != grid {self.grid.n}^2"
            )

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteEnergy("field contains NaN or Inf samples")
        return self

    def copy(self):
        return ScalarField(self.grid, self.values.copy())


@dataclass
class ComplexField:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise GridMismatch(
                f"values shape {self.values.shape} != grid {self.grid.n}^2"
            )

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteEnergy("field contains NaN or Inf samples")
        return self

    def copy(self):
        return ComplexField(self.grid, self.values.copy())


def _require_same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatch(f"fields live on different grids: {f.grid} vs {g}")
    return g


def integrate(f: ScalarField) -> float:
    """Midpoint quadrature of a scalar field over its box."""
    return float(np.sum(f.values) * f.grid.spacing**2)


def mass(u, weight: ScalarField | None = None) -> float:
    """``int |u|^2`` or, with a weight, ``int weight^2 |u|^2``."""
    dens = np.abs(u.values) ** 2
    if weight is not None:
        _require_same_grid(u, weight)
        dens = weight.values**2 * dens
    return float(np.sum(dens) * u.grid.spacing**2)


def gradient(values: np.ndarray, spacing: float):
    """Centered differences inside, one-sided on the box edge; both axes."""
    gx = np.empty_like(values)
    gy = np.empty_like(values)
    inv2h = 0.5 / spacing
    invh = 1.0 / spacing
    gx[1:-1, :] = (values[2:, :] - values[:-2, :]) * inv2h
    gx[0, :] = (values[1, :] - values[0, :]) * invh
    gx[-1, :] = (values[-1, :] - values[-2, :]) * invh
    gy[:, 1:-1] = (values[:, 2:] - values[:, :-2]) * inv2h
    gy[:, 0] = (values[:, 1] - values[:, 0]) * invh
    gy[:, -1] = (values[:, -1] - values[:, -2]) * invh
    return gx, gy


def _covariant_density_values(u: ComplexField, omega: float) -> np.ndarray:
    gx, gy = gradient(u.values, u.grid.spacing)
    X1, X2 = u.grid.mesh()
    # gauge potential x^perp/2 = (-x2/2, x1/2)
    dx = gx - 1j * omega * (-0.5 * X2) * u.values
    dy = gy - 1j * omega * (0.5 * X1) * u.values
    return np.abs(dx) ** 2 + np.abs(dy) ** 2


def covariant_kinetic_density(u: ComplexField, omega: float) -> ScalarField:
    """Pointwise ``|(grad - i*omega*A0) u|^2`` with ``A0 = x^perp/2``."""
    return ScalarField(u.grid, _covariant_density_values(u, omega))


def _check_energy(value: float) -> float:
    if not np.isfinite(value):
        raise NonFiniteEnergy(f"energy quadrature is not finite: {value}")
    return float(value)


def _interaction_density(u_sq: np.ndarray, a: np.ndarray, epsilon: float) -> np.ndarray:
    # [a - |u|^2]^2 - [a_-]^2 with a_- = max(-a, 0); the subtraction makes
    # the integrand vanish identically where a < 0 and u = 0.
    a_minus = np.maximum(-a, 0.0)
    return ((a - u_sq) ** 2 - a_minus**2) / (2.0 * epsilon**2)


def energy_F(u: ComplexField, p: PhysicalParams) -> float:
    """Full rotating-frame energy of the order parameter ``u``.

    Covariant kinetic term, renormalized quartic interaction, and the
    centrifugal correction ``-(omega^2/4) |x|^2 |u|^2``.
    """
    g = u.grid
    X1, X2 = g.mesh()
    a = p.a0 - elliptic_radius_sq(X1, X2, p.lam)
    u_sq = np.abs(u.values) ** 2
    dens = (
        _covariant_density_values(u, p.omega)
        + _interaction_density(u_sq, a, p.epsilon)
        - (p.omega**2 / 4.0) * g.radius_sq() * u_sq
    )
    return _check_energy(np.sum(dens) * g.spacing**2)


def energy_E(u, p: PhysicalParams) -> float:
    """Reduced energy: plain gradient, same interaction and centrifugal terms.

    Accepts a real or complex field; this is the functional the density
    profile minimizes under the unit-mass constraint.
    """
    g = u.grid
    X1, X2 = g.mesh()
    a = p.a0 - elliptic_radius_sq(X1, X2, p.lam)
    gx, gy = gradient(u.values, g.spacing)
    u_sq = np.abs(u.values) ** 2
    dens = (
        np.abs(gx) ** 2
        + np.abs(gy) ** 2
        + _interaction_density(u_sq, a, p.epsilon)
        - (p.omega**2 / 4.0) * g.radius_sq() * u_sq
    )
    return _check_energy(np.sum(dens) * g.spacing**2)


def _weighted_gl_density(v: ComplexField, eta: ScalarField, p: PhysicalParams):
    _require_same_grid(v, eta)
    eta_sq = eta.values**2
    v_sq = np.abs(v.values) ** 2
    return eta_sq * _covariant_density_values(v, p.omega) + (
        eta_sq**2 / (2.0 * p.epsilon**2)
    ) * (1.0 - v_sq) ** 2


def energy_G(v: ComplexField, eta: ScalarField, p: PhysicalParams) -> float:
    """Weighted vortex energy: ``int eta^2 |D_A v|^2 + eta^4/(2 eps^2) (1-|v|^2)^2``."""
    if np.any(eta.values < 0):
        raise ValueError("weight eta must be nonnegative")
    dens = _weighted_gl_density(v, eta, p)
    return _check_energy(np.sum(dens) * v.grid.spacing**2)


def energy_gl2d(u: ComplexField, lambda_coef: float, h_ex: float, eps: float) -> float:
    """Reduced two-dimensional Ginzburg-Landau energy on the unit square.

    ``int_K |(grad - i h_ex A0) u|^2 + lambda/(2 eps^2) (1 - |u|^2)^2`` with
    ``K = (-1/2, 1/2)^2``; the grid must cover exactly that square.
    """
    g = u.grid
    if abs(g.half_extent - 0.5) > 1e-12:
        raise GridMismatch(
            f"energy_gl2d needs a grid over the unit square, got half_extent={g.half_extent}"
        )
    u_sq = np.abs(u.values) ** 2
    dens = _covariant_density_values(u, h_ex) + (lambda_coef / (2.0 * eps**2)) * (
        1.0 - u_sq
    ) ** 2
    return _check_energy(np.sum(dens) * g.spacing**2)


def _resolve_mask(grid: Grid2D, region) -> np.ndarray:
    if callable(region):
        X1, X2 = grid.mesh()
        mask = np.asarray(region(X1, X2), dtype=bool)
    else:
        mask = np.asarray(region, dtype=bool)
    if mask.shape != (grid.n, grid.n):
        raise GridMismatch(f"region mask shape {mask.shape} != grid {grid.n}^2")
    return mask


def local_energy(v: ComplexField, eta: ScalarField, p: PhysicalParams, region) -> float:
    """Weighted vortex energy restricted to a region.

    ``region`` is a boolean mask over the grid or a callable
    ``(X1, X2) -> mask``.  Raises ``EmptyRegion`` for an empty mask.
    """
    g = _require_same_grid(v, eta)
    mask = _resolve_mask(g, region)
    if not mask.any():
        raise EmptyRegion("local_energy: region selects no grid cells")
    dens = _weighted_gl_density(v, eta, p)
    return _check_energy(np.sum(dens[mask]) * g.spacing**2)


# ---------------------------------------------------------------------------
# field dumps


def dump_field(field, basepath, meta: dict | None = None):
    """Write a field as raw little-endian float64 planes plus a JSON sidecar.

    ``basepath.bin`` holds the samples row-major (axis 0 major); complex
    fields store the real plane followed by the imaginary plane.  The
    sidecar ``basepath.json`` records the grid and any metadata passed in.
    Round-trips are bit-exact.
    """
    basepath = Path(basepath)
    g = field.grid
    kind = "complex" if np.iscomplexobj(field.values) else "scalar"
    if kind == "complex":
        planes = np.concatenate(
            [np.real(field.values).ravel(), np.imag(field.values).ravel()]
        )
    else:
        planes = field.values.ravel()
    planes.astype("<f8").tofile(basepath.with_suffix(".bin"))
    sidecar = {"n": g.n, "half_extent": g.half_extent, "kind": kind}
    if meta:
        sidecar.update(meta)
    basepath.with_suffix(".json").write_text(json.dumps(sidecar, indent=1, sort_keys=True))


def load_field(basepath):
    """Inverse of ``dump_field``; returns ``(field, sidecar_dict)``."""
    basepath = Path(basepath)
    sidecar = json.loads(basepath.with_suffix(".json").read_text())
    n = int(sidecar["n"])
    grid = Grid2D(sidecar["half_extent"], n)
    raw = np.fromfile(basepath.with_suffix(".bin"), dtype="<f8")
    if sidecar["kind"] == "complex":
        if raw.size != 2 * n * n:
            raise ValueError("dump size does not match sidecar")
        vals = raw[: n * n].reshape(n, n) + 1j * raw[n * n :].reshape(n, n)
        return ComplexField(grid, vals), sidecar
    if raw.size != n * n:
        raise ValueError("dump size does not match sidecar")
    return ScalarField(grid, raw.reshape(n, n)), sidecar


# ---------------------------------------------------------------------------
# resampling and diagnostics


def resample_fourier(field, n_new: int):
    """Trigonometric resampling onto a finer/coarser grid with the same box.

    Treats the samples as one period of a smooth field (valid when the field
    decays to negligible values near the box edge) and evaluates the
    interpolating trigonometric polynomial on the new cell centers.  The new
    cell centers are shifted by ``(h_new - h_old)/2``, which is applied as an
    exact Fourier phase shift.
    """
    vals = field.values
    n_old = field.grid.n
    grid_new = Grid2D(field.grid.half_extent, n_new)
    complex_in = np.iscomplexobj(vals)
    spec = np.fft.fft2(vals)
    shift = 0.5 * (grid_new.spacing - field.grid.spacing)
    k = 2.0 * np.pi * np.fft.fftfreq(n_old, d=field.grid.spacing)
    phase = np.exp(1j * shift * k)
    spec = spec * phase[:, None] * phase[None, :]
    # zero-pad (or truncate) the spectrum to the new size
    spec_new = np.zeros((n_new, n_new), dtype=complex)
    m = min(n_old, n_new)
    half = m // 2
    sl_old = np.r_[0:half, n_old - half : n_old]
    sl_new = np.r_[0:half, n_new - half : n_new]
    spec_new[np.ix_(sl_new, sl_new)] = spec[np.ix_(sl_old, sl_old)]
    out = np.fft.ifft2(spec_new) * (n_new / n_old) ** 2
    if complex_in:
        return ComplexField(grid_new, out)
    return ScalarField(grid_new, out.real)


def check_boundary_tail(field, tol: float = 1e-8, rows: int = 3) -> float:
    """Warn when the outermost rows of a physical field are not negligible.

    Returns the measured sup of ``|values|`` on the boundary band.  Meant for
    decaying order parameters / density profiles, not for cutoff-free lattice
    fields.
    """
    v = np.abs(field.values)
    band = np.concatenate(
        [
            v[:rows, :].ravel(),
            v[-rows:, :].ravel(),
            v[:, :rows].ravel(),
            v[:, -rows:].ravel(),
        ]
    )
    sup = float(band.max())
    if sup >= tol:
        warnings.warn(
            f"box truncation: |field| reaches {sup:.3g} on the outermost "
            f"{rows} rows (threshold {tol:g}); enlarge the box",
            stacklevel=2,
        )
    return sup
