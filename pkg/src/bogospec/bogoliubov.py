"""Closed-form Bogoliubov quantities: dispersion, transformation
coefficients, ground-state energy and its infinite-volume density.

Every formula is kept in a rationalized, cancellation-free form (the
difference A - sqrt(A^2 - B^2) is never evaluated through a subtraction
of nearly equal numbers unless that is the quantity under test), and
lattice sums accumulate with exact fsum over a deterministic shell
ordering so results reproduce bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .model import (
    LatticeSpec,
    Momentum,
    MomentumLike,
    Potential,
    SPHERE_AREA,
    TAU,
    TailBoundError,
    as_radius,
    gaussian_integral_tail,
    gaussian_lattice_tail,
    lattice_points,
    summation_radius,
)


@dataclass(frozen=True)
class BogoCoefficients:
    """Bogoliubov rotation data at one momentum.

    A = |p|^2 + vhat(p) and B = vhat(p) are the diagonal and pairing
    weights of the quadratic Hamiltonian; alpha = tanh(2*beta) in (0, 1),
    c = cosh(2*beta), s = sinh(2*beta) and e is the quasiparticle energy.
    """

    A: float
    B: float
    alpha: float
    beta: float
    c: float
    s: float
    e: float


def _radial_dispersion(r: float, v: float) -> float:
    return r * math.sqrt(r * r + 2.0 * v)


def dispersion(p: MomentumLike, pot: Potential) -> float:
    """Elementary excitation energy |p| * sqrt(|p|^2 + 2 vhat(p))."""
    r = as_radius(p)
    if r == 0.0:
        raise ValueError("dispersion undefined at p = 0; the zero mode is excluded")
    return _radial_dispersion(r, pot.vhat_radial(r))


def coefficients(p: MomentumLike, pot: Potential) -> BogoCoefficients:
    """Diagonalizing coefficients at p, computed without cancellation."""
    r = as_radius(p)
    if r == 0.0:
        raise ValueError("coefficients undefined at p = 0; the zero mode is excluded")
    v = pot.vhat_radial(r)
    r2 = r * r
    e = _radial_dispersion(r, v)
    # alpha = (A - sqrt(A^2 - B^2))/B rationalized; exact 0 when vhat = 0
    alpha = v / (r2 + v + e)
    beta = 0.5 * math.atanh(alpha)
    c = 1.0 / math.sqrt(1.0 - alpha * alpha)
    s = alpha * c
    return BogoCoefficients(A=r2 + v, B=v, alpha=alpha, beta=beta, c=c, s=s, e=e)


def identity_residuals(p: MomentumLike, pot: Potential) -> tuple[float, float, float]:
    """Residuals of the three hyperbolic-coefficient identities at p."""
    co = coefficients(p, pot)
    r = as_radius(p)
    v = co.B
    r2 = r * r
    root = math.sqrt(r2 + 2.0 * v)
    d = co.c - co.s
    res1 = abs(d * d - r / root)
    res2 = abs(co.s * d - v / (r2 + 2.0 * v + r * root))
    res3 = abs(2.0 * co.s * co.c * d * d - v / (r2 + 2.0 * v))
    return (res1, res2, res3)


@dataclass(frozen=True)
class EnergySummary:
    """Ground-state energy sum and the finite-volume energy density.

    e_bog is -1/2 sum_{p != 0} (A_p - e_p) evaluated by direct
    subtraction, e_bog_alt the algebraically equal rationalized sum
    B_p^2 / (A_p + e_p); density_limit is the full-lattice energy density
    vhat(0)/2 - (1/(2 L^d)) sum_{all p} (A_p - e_p), the finite-L value
    that converges to the infinite-volume density integral.
    """

    e_bog: float
    e_bog_alt: float
    n_terms: int
    density_limit: float


def bogoliubov_energy(
    lattice: LatticeSpec, pot: Potential, tail_tol: float | None = None
) -> EnergySummary:
    """Bogoliubov energy -1/2 sum_{p != 0} (A_p - sqrt(A_p^2 - B_p^2)).

    The sum runs over shells of increasing |n|^2 (lexicographic within a
    shell) until the omitted tail, each summand being at most
    vhat(p)^2/|p|^2, is below tail_tol.
    """
    # default honours tail_tol = 1e-10 * max(1, |e_bog|) >= 1e-10
    if tail_tol is None:
        tail_tol = 1e-10
    if not tail_tol > 0.0:
        raise ValueError("tail_tol must be > 0")
    if pot.family == "gaussian" and pot.amplitude > 0.0:
        # summand <= amplitude^2 * exp(-2|p|^2/width) / R^2 beyond radius R
        radius = lattice.spacing
        for _ in range(200):
            bound = 0.5 * gaussian_pair_tail(lattice, pot, radius)
            if bound < tail_tol:
                break
            radius *= 1.5
    else:
        radius = summation_radius(lattice, pot, 1.0, 1.0, tail_tol)
    pts = sorted(
        lattice_points(lattice, radius, include_zero=False),
        key=lambda q: (q.norm2_int, q.n),
    )
    direct: list[float] = []
    rational: list[float] = []
    for q in pts:
        r = q.norm
        v = pot.vhat_extended(r)
        e = _radial_dispersion(r, v)
        a = r * r + v
        direct.append(a - e)
        rational.append(v * v / (a + e))
    e_bog = -0.5 * math.fsum(direct)
    e_bog_alt = -0.5 * math.fsum(rational)
    v0 = pot.vhat_extended(0.0)
    density = 0.5 * v0 * (1.0 - 1.0 / lattice.volume) + e_bog / lattice.volume
    return EnergySummary(
        e_bog=e_bog, e_bog_alt=e_bog_alt, n_terms=len(pts), density_limit=density
    )


def gaussian_pair_tail(lattice: LatticeSpec, pot: Potential, radius: float) -> float:
    """Bound on the Bogoliubov-energy tail sum over |p| > radius."""
    r_eff = max(radius, lattice.spacing)
    a2 = pot.amplitude * pot.amplitude
    return gaussian_lattice_tail(lattice, a2, 2.0 / pot.width, radius) / (r_eff * r_eff)


def bogoliubov_energy_on_modes(modes: list[Momentum], pot: Potential) -> float:
    """Bogoliubov energy restricted to an explicit (truncated) mode set."""
    terms = []
    for q in sorted(modes, key=lambda m: (m.norm2_int, m.n)):
        if q.is_zero:
            continue
        r = q.norm
        v = pot.vhat_extended(r)
        e = _radial_dispersion(r, v)
        terms.append(v * v / (r * r + v + e))
    return -0.5 * math.fsum(terms)


@dataclass(frozen=True)
class QuadratureSpec:
    """Fixed-step radial quadrature: composite Simpson with this step."""

    step: float = 0.005
    r_max: float | None = None

    def __post_init__(self) -> None:
        if not self.step > 0.0:
            raise ValueError("quadrature step must be > 0")


@dataclass(frozen=True)
class DensityLimit:
    value: float
    error_estimate: float
    r_max: float
    step: float


def energy_density_limit(
    pot: Potential, quad: QuadratureSpec | None = None
) -> DensityLimit:
    """Infinite-volume energy density.

    Returns vhat(0)/2 - (1/(2 (2 pi)^d)) * integral of
    |p|^2 + vhat(p) - |p| sqrt(|p|^2 + 2 vhat(p)) over R^d, in mean-field
    units, together with a quadrature + tail error estimate.
    """
    if quad is None:
        quad = QuadratureSpec()
    d = pot.dimension
    if quad.r_max is not None:
        r_max = quad.r_max
        tail = _integrand_tail(pot, r_max)
    elif pot.compactly_supported:
        r_max = max(pot.support_radius, 4.0 * quad.step)
        tail = 0.0
    elif pot.family == "table":
        raise TailBoundError("tabulated potential without decay: integrand tail unboundable")
    else:
        r_max = 1.0
        while _integrand_tail(pot, r_max) > 1e-16 * max(1.0, pot.amplitude):
            r_max *= 1.5
        tail = _integrand_tail(pot, r_max)

    def radial(r: np.ndarray) -> np.ndarray:
        v = np.array([pot.vhat_extended(float(t)) for t in r])
        f = r * r + v - r * np.sqrt(r * r + 2.0 * v)
        return f * r ** (d - 1)

    vals = []
    for step in (quad.step, 0.5 * quad.step):
        n = max(2, int(math.ceil(r_max / step)))
        if n % 2:
            n += 1
        grid = np.linspace(0.0, r_max, n + 1)
        vals.append(float(simpson(radial(grid), x=grid)))
    coarse, fine = vals
    norm = 2.0 * TAU**d
    value = 0.5 * pot.vhat_extended(0.0) - SPHERE_AREA[d] * fine / norm
    err = (SPHERE_AREA[d] * (abs(coarse - fine) + tail)) / norm
    return DensityLimit(value=value, error_estimate=err, r_max=r_max, step=quad.step)


def _integrand_tail(pot: Potential, r_max: float) -> float:
    """Bound on S_{d-1} * int_{r_max}^inf (A - e) r^(d-1) dr.

    Uses A - e <= vhat^2 / r^2 <= amplitude^2 exp(-2 r^2/width) for r >= 1.
    """
    if pot.compactly_supported:
        return 0.0
    if pot.family == "table":
        raise TailBoundError("tabulated potential without decay: tail unboundable")
    a2 = pot.amplitude * pot.amplitude
    r_eff = max(r_max, 1.0)
    return a2 / (r_eff * r_eff) * gaussian_integral_tail(2.0 / pot.width, r_max, pot.dimension)
