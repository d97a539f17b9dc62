"""Pair potentials and the discrete momentum lattice of a cubic torus.

Momenta live on (2*pi/L)*Z^d and are stored through their integer
coordinates, so squared norms and degeneracies are exact at the integer
level.  Potentials enter only through their radial Fourier transform
vhat >= 0; real-space values are recovered by periodized lattice sums
with rigorously bounded Gaussian tails.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence, Union

from scipy.special import erfc

TAU = 2.0 * math.pi

#: surface area of the unit sphere S^{d-1} for d = 1, 2, 3
SPHERE_AREA = {1: 2.0, 2: TAU, 3: 2.0 * TAU}


class PotentialRangeError(ValueError):
    """A tabulated potential was queried outside its sampled range."""


class TailBoundError(ValueError):
    """The tail of a lattice sum cannot be bounded for this potential."""


@dataclass(frozen=True)
class LatticeSpec:
    """Cubic torus of side L >= 1 in dimension d; momentum spacing 2*pi/L."""

    L: float
    d: int

    def __post_init__(self) -> None:
        if not self.L >= 1.0:
            raise ValueError(f"torus side must satisfy L >= 1, got {self.L}")
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")

    @property
    def spacing(self) -> float:
        return TAU / self.L

    @property
    def volume(self) -> float:
        return self.L**self.d

    def momentum(self, *n: int) -> "Momentum":
        if len(n) == 1 and isinstance(n[0], (tuple, list)):
            n = tuple(n[0])
        if len(n) != self.d:
            raise ValueError(f"expected {self.d} integer coordinates, got {n}")
        return Momentum(tuple(int(c) for c in n), self.L)

    @property
    def zero(self) -> "Momentum":
        return Momentum((0,) * self.d, self.L)


@dataclass(frozen=True)
class Momentum:
    """Lattice momentum p = (2*pi/L) * n, stored via integer coordinates n."""

    n: tuple[int, ...]
    L: float

    @property
    def d(self) -> int:
        return len(self.n)

    @property
    def spacing(self) -> float:
        return TAU / self.L

    @property
    def coords(self) -> tuple[float, ...]:
        h = TAU / self.L
        return tuple(h * c for c in self.n)

    @property
    def norm2_int(self) -> int:
        """|n|^2, exact."""
        return sum(c * c for c in self.n)

    @property
    def norm2(self) -> float:
        # one multiplication past the exact integer |n|^2
        return (TAU / self.L) ** 2 * self.norm2_int

    @property
    def norm(self) -> float:
        return (TAU / self.L) * math.sqrt(self.norm2_int)

    @property
    def is_zero(self) -> bool:
        return self.norm2_int == 0

    def __neg__(self) -> "Momentum":
        return Momentum(tuple(-c for c in self.n), self.L)

    def __add__(self, other: "Momentum") -> "Momentum":
        if other.L != self.L or other.d != self.d:
            raise ValueError("momenta live on different lattices")
        return Momentum(tuple(a + b for a, b in zip(self.n, other.n)), self.L)

    def __sub__(self, other: "Momentum") -> "Momentum":
        return self + (-other)


MomentumLike = Union[Momentum, float, int, Sequence[float]]


def as_radius(p: MomentumLike) -> float:
    """Euclidean norm of a momentum given as Momentum, scalar or vector."""
    if isinstance(p, Momentum):
        return p.norm
    if isinstance(p, (int, float)):
        return abs(float(p))
    return math.sqrt(math.fsum(float(c) * float(c) for c in p))


@dataclass(frozen=True)
class Potential:
    """Interaction defined through its radial Fourier transform vhat.

    family "gaussian": vhat(p) = amplitude * exp(-|p|^2 / width).
    family "table": linear interpolation of (|p|, value) samples; the
    first sample must sit at |p| = 0 and queries beyond the last sample
    raise PotentialRangeError.  A table whose last value is zero is
    treated as compactly supported in lattice sums.
    """

    family: str
    dimension: int
    amplitude: float = 0.0
    width: float = 1.0
    samples: tuple[tuple[float, float], ...] = ()
    _grid: tuple[float, ...] = field(default=(), repr=False, compare=False)
    _values: tuple[float, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if self.family == "gaussian":
            if self.amplitude < 0.0:
                raise ValueError("gaussian family requires amplitude >= 0")
            if self.width <= 0.0:
                raise ValueError("gaussian family requires width > 0")
        elif self.family == "table":
            if len(self.samples) < 2:
                raise ValueError("table potential needs at least two samples")
            grid = tuple(float(p) for p, _ in self.samples)
            vals = tuple(float(v) for _, v in self.samples)
            if grid[0] != 0.0:
                raise ValueError("table samples must start at |p| = 0")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError("table sample momenta must be strictly increasing")
            object.__setattr__(self, "_grid", grid)
            object.__setattr__(self, "_values", vals)
        else:
            raise ValueError(f"unknown potential family {self.family!r}")

    @classmethod
    def gaussian(cls, amplitude: float, width: float, dimension: int = 1) -> "Potential":
        return cls("gaussian", dimension, amplitude=float(amplitude), width=float(width))

    @classmethod
    def zero(cls, dimension: int = 1) -> "Potential":
        return cls.gaussian(0.0, 1.0, dimension)

    @classmethod
    def table(cls, samples: Iterable[Sequence[float]], dimension: int = 1) -> "Potential":
        samp = tuple((float(p), float(v)) for p, v in samples)
        return cls("table", dimension, samples=samp)

    @property
    def support_radius(self) -> float:
        """Radius beyond which vhat is known to vanish (inf for gaussian)."""
        if self.family == "gaussian":
            return 0.0 if self.amplitude == 0.0 else math.inf
        return self._grid[-1]

    @property
    def compactly_supported(self) -> bool:
        if self.family == "gaussian":
            return self.amplitude == 0.0
        return self._values[-1] == 0.0

    @property
    def scale(self) -> float:
        """Typical magnitude of vhat, used for default tolerances."""
        if self.family == "gaussian":
            return self.amplitude
        return max(abs(v) for v in self._values)

    def vhat_radial(self, r: float) -> float:
        """vhat at |p| = r; strict range check for tables."""
        if self.family == "gaussian":
            return self.amplitude * math.exp(-(r * r) / self.width)
        if r < self._grid[0] or r > self._grid[-1]:
            raise PotentialRangeError(
                f"|p| = {r} outside table range [{self._grid[0]}, {self._grid[-1]}]"
            )
        i = bisect.bisect_right(self._grid, r)
        if i == len(self._grid):
            return self._values[-1]
        a, b = self._grid[i - 1], self._grid[i]
        va, vb = self._values[i - 1], self._values[i]
        return va + (vb - va) * (r - a) / (b - a)

    def vhat_extended(self, r: float) -> float:
        """vhat with zero extension past a compact table's support.

        Lattice sums use this form; non-compact tables queried beyond
        range raise TailBoundError since no decay is known.
        """
        if self.family == "table" and r > self._grid[-1]:
            if self.compactly_supported:
                return 0.0
            raise TailBoundError(
                "tabulated potential does not decay to zero; cannot bound tail"
            )
        return self.vhat_radial(r)


def fourier_at(pot: Potential, p: MomentumLike) -> float:
    """vhat(p) for a momentum given as Momentum, scalar or real vector."""
    return pot.vhat_radial(as_radius(p))


def lattice_points(
    lattice: LatticeSpec, radius: float, include_zero: bool = False
) -> list[Momentum]:
    """All momenta with |p| <= radius, in lexicographic order of n."""
    if radius < 0.0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    h = lattice.spacing
    m = int(math.floor(radius / h + 1e-9))
    pts: list[Momentum] = []
    for n in product(range(-m, m + 1), repeat=lattice.d):
        nn = sum(c * c for c in n)
        if nn == 0 and not include_zero:
            continue
        if h * math.sqrt(nn) <= radius:
            pts.append(Momentum(n, lattice.L))
    return pts


def gaussian_integral_tail(s: float, r: float, d: int) -> float:
    """Closed form of S_{d-1} * int_r^inf exp(-s t^2) t^(d-1) dt."""
    r = max(r, 0.0)
    if d == 1:
        return math.sqrt(math.pi / s) * erfc(math.sqrt(s) * r)
    if d == 2:
        return (math.pi / s) * math.exp(-s * r * r)
    return 2.0 * TAU * (
        r * math.exp(-s * r * r) / (2.0 * s)
        + math.sqrt(math.pi) * erfc(math.sqrt(s) * r) / (4.0 * s**1.5)
    )


def gaussian_lattice_tail(lattice: LatticeSpec, a: float, s: float, radius: float) -> float:
    """Upper bound on sum over lattice |p| > radius of a * exp(-s|p|^2).

    Each lattice cell of side 2*pi/L holds one point; a point outside the
    ball of the given radius has its whole cell outside the ball shrunk by
    half a cell diagonal, so the sum is dominated by the integral over
    that region divided by the cell volume.
    """
    if a == 0.0:
        return 0.0
    delta = 0.5 * lattice.spacing * math.sqrt(lattice.d)
    shifted = max(radius - delta, 0.0)
    cell = lattice.spacing**lattice.d
    return a * gaussian_integral_tail(s, shifted, lattice.d) / cell


def default_tail_tol(pot: Potential) -> float:
    # 1e-12 in units of the potential amplitude
    s = pot.scale
    return 1e-12 * s if s > 0.0 else 1e-12


def summation_radius(
    lattice: LatticeSpec, pot: Potential, s: float, weight: float, tail_tol: float
) -> float:
    """Smallest doubling radius R with weight * tail(|p| > R) < tail_tol.

    `s` is the Gaussian decay rate of the summand envelope and `weight`
    a constant prefactor; compact tables need no tail at all.
    """
    if pot.compactly_supported:
        return pot.support_radius
    if pot.family == "table":
        raise TailBoundError(
            "tabulated potential does not decay to zero; cannot bound tail"
        )
    r = 4.0 * lattice.spacing
    for _ in range(200):
        if weight * gaussian_lattice_tail(lattice, pot.amplitude, s, r) < tail_tol:
            return r
        r *= 1.5
    raise TailBoundError("tail bound did not converge")  # pragma: no cover


def periodized_value(
    pot: Potential,
    lattice: LatticeSpec,
    x: Union[float, Sequence[float]],
    tail_tol: float | None = None,
) -> float:
    """Torus-periodized potential (1/L^d) * sum_p vhat(p) exp(i p.x).

    The sum runs over lattice points until the omitted tail is below
    tail_tol; the imaginary part must vanish to tail_tol by symmetry.
    """
    if tail_tol is None:
        tail_tol = default_tail_tol(pot)
    if not tail_tol > 0.0:
        raise ValueError("tail_tol must be > 0")
    xv = (float(x),) if isinstance(x, (int, float)) else tuple(float(c) for c in x)
    if len(xv) != lattice.d:
        raise ValueError(f"x must have {lattice.d} coordinates, got {len(xv)}")
    radius = summation_radius(lattice, pot, 1.0 / pot.width if pot.family == "gaussian" else 1.0,
                               1.0 / lattice.volume, tail_tol)
    re_terms: list[float] = []
    im_terms: list[float] = []
    for p in lattice_points(lattice, radius, include_zero=True):
        v = pot.vhat_extended(p.norm)
        if v == 0.0:
            continue
        phase = math.fsum(c * xc for c, xc in zip(p.coords, xv))
        re_terms.append(v * math.cos(phase))
        im_terms.append(v * math.sin(phase))
    re = math.fsum(re_terms) / lattice.volume
    im = math.fsum(im_terms) / lattice.volume
    if abs(im) >= tail_tol:
        raise ArithmeticError(f"periodized sum has imaginary part {im}")
    return re


@dataclass
class ValidationResult:
    """Outcome of a nonnegativity scan of vhat and of v at the origin."""

    ok: bool
    violations: list[tuple[object, float]]
    warnings: list[str]


def validate_potential(
    pot: Potential, lattice: LatticeSpec, radius: float
) -> ValidationResult:
    """Check vhat >= 0 on lattice points within radius and v(0) >= 0."""
    if radius < 0.0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    violations: list[tuple[object, float]] = []
    warnings: list[str] = []
    if radius == 0.0:
        warnings.append("radius 0: no lattice points checked (vacuous pass)")
        return ValidationResult(True, violations, warnings)
    if pot.family == "table" and not pot.compactly_supported:
        warnings.append(
            "tabulated potential does not decay to zero; tail bounds unavailable"
        )
    for p in lattice_points(lattice, radius, include_zero=True):
        try:
            v = pot.vhat_extended(p.norm)
        except (PotentialRangeError, TailBoundError):
            warnings.append(f"table does not cover |p| = {p.norm:.6g}; scan truncated")
            break
        if v < 0.0:
            violations.append((p, v))
    try:
        v0 = periodized_value(pot, lattice, (0.0,) * lattice.d)
        if v0 < 0.0:
            violations.append(("v(0)", v0))
    except TailBoundError:
        warnings.append("real-space check at x = 0 skipped: tail unboundable")
    return ValidationResult(not violations, violations, warnings)
