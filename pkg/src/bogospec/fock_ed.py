"""Truncated-Fock-space exact diagonalization in momentum-conserving blocks.

Basis states are occupation tuples over a finite symmetric mode set
(|p| <= mode_radius, zero mode always kept) with the particle number fixed
and the excited-particle count optionally capped.  Assembled matrices are
exact compressions P H P of the second-quantized operators to that basis,
so every operator inequality between the full operators survives as a
matrix inequality on each sector.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import LatticeSpec, Momentum, Potential, lattice_points, periodized_value

#: occupation vector over the mode list, basis element of a sector
FockState = tuple[int, ...]

DENSE_FALLBACK_DIM = 512
DEFAULT_SEED = 1234


class BasisSizeError(ValueError):
    """A sector basis exceeded the configured hard cap."""

    def __init__(self, sector: tuple[int, ...], size: int, cap: int, suggestion: int):
        self.sector = sector
        self.size = size
        self.suggestion = suggestion
        super().__init__(
            f"sector {sector} basis has {size} states (cap {cap}); "
            f"try max_excited <= {suggestion}"
        )


class EigenConvergenceError(RuntimeError):
    """Iterative eigensolver failed; carries the best residual norms."""

    def __init__(self, message: str, residuals: np.ndarray):
        self.residuals = residuals
        super().__init__(message)


class GroundSectorError(RuntimeError):
    """The lowest eigenvalue was not found in the zero-momentum sector."""


def default_max_excited(n_particles: int) -> int:
    """Default excited-particle cap used by the drivers."""
    return min(n_particles, 8)


@dataclass(frozen=True)
class EDConfig:
    """One diagonalization setup; mean-field coupling L^d/N is implied."""

    n_particles: int
    lattice: LatticeSpec
    pot: Potential
    mode_radius: float
    max_excited: int | None = None
    basis_cap: int = 2_000_000

    def __post_init__(self) -> None:
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.pot.dimension != self.lattice.d:
            raise ValueError("potential and lattice dimensions differ")
        if self.mode_radius < 0.0:
            raise ValueError("mode_radius must be >= 0")

    @property
    def density(self) -> float:
        return self.n_particles / self.lattice.volume

    @property
    def coupling(self) -> float:
        return self.lattice.volume / self.n_particles

    @property
    def effective_max_excited(self) -> int:
        if self.max_excited is None:
            return self.n_particles
        return min(self.max_excited, self.n_particles)

    def modes(self) -> list[Momentum]:
        """Symmetric mode set, zero mode included, lexicographic order."""
        return lattice_points(self.lattice, self.mode_radius, include_zero=True)

    def snapshot(self) -> dict:
        pot = self.pot
        pd: dict = {"family": pot.family, "dimension": pot.dimension}
        if pot.family == "gaussian":
            pd.update(amplitude=pot.amplitude, width=pot.width)
        else:
            pd.update(samples=[list(s) for s in pot.samples])
        return {
            "N": self.n_particles,
            "L": self.lattice.L,
            "dimension": self.lattice.d,
            "mode_radius": self.mode_radius,
            "max_excited": self.max_excited,
            "potential": pd,
        }


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def build_basis(cfg: EDConfig) -> dict[tuple[int, ...], list[FockState]]:
    """All occupation vectors with sum N and excited count <= cap, by sector."""
    modes = cfg.modes()
    zero_idx = next(i for i, m in enumerate(modes) if m.is_zero)
    excited = [i for i in range(len(modes)) if i != zero_idx]
    cap = cfg.effective_max_excited
    sectors: dict[tuple[int, ...], list[FockState]] = {}
    for m_exc in range(cap + 1):
        for comp in _compositions(m_exc, len(excited)):
            occ = [0] * len(modes)
            for idx, c in zip(excited, comp):
                occ[idx] = c
            occ[zero_idx] = cfg.n_particles - m_exc
            total = tuple(
                sum(occ[i] * modes[i].n[k] for i in range(len(modes)))
                for k in range(cfg.lattice.d)
            )
            bucket = sectors.setdefault(total, [])
            bucket.append(tuple(occ))
            if len(bucket) > cfg.basis_cap:
                raise BasisSizeError(total, len(bucket), cfg.basis_cap, max(m_exc - 1, 0))
    for key in sectors:
        sectors[key].sort()
    return sectors


@dataclass
class SectorMatrix:
    """Sparse symmetric operator block on one sector basis."""

    sector: tuple[int, ...] | None
    basis: list[FockState]
    matrix: sp.csr_matrix
    kind: str
    modes: list[Momentum]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def scale(self) -> float:
        return float(abs(self.matrix).max()) if self.matrix.nnz else 0.0

    def asymmetry(self) -> float:
        """Largest |M - M^T| entry; assembly keeps this near machine eps."""
        d = self.matrix - self.matrix.T
        return float(abs(d).max()) if d.nnz else 0.0


def _csr_from_dict(entries: dict[tuple[int, int], float], dim: int) -> sp.csr_matrix:
    if not entries:
        return sp.csr_matrix((dim, dim))
    keys = sorted(entries)
    rows = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
    cols = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
    vals = np.fromiter((entries[k] for k in keys), dtype=np.float64, count=len(keys))
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def _sector_basis(cfg: EDConfig, sector: Sequence[int], basis) -> list[FockState]:
    if basis is not None:
        return list(basis)
    key = tuple(int(c) for c in sector)
    return build_basis(cfg).get(key, [])


def assemble_hamiltonian(
    cfg: EDConfig, sector: Sequence[int], basis: list[FockState] | None = None
) -> SectorMatrix:
    """Full many-body Hamiltonian on one momentum sector.

    Kinetic part sum_p |p|^2 n_p on the diagonal; interaction
    (1/2N) sum vhat(k) a+_{p+k} a+_{q-k} a_q a_p with the transfer k
    evaluated at exact lattice momenta (which may exceed the mode
    radius; only the modes themselves are truncated).
    """
    key = tuple(int(c) for c in sector)
    states = _sector_basis(cfg, key, basis)
    modes = cfg.modes()
    nmode = len(modes)
    index = {s: i for i, s in enumerate(states)}
    norm2 = [m.norm2 for m in modes]
    mode_n = [m.n for m in modes]
    mode_of = {m.n: i for i, m in enumerate(modes)}
    L = cfg.lattice.L
    inv2n = 1.0 / (2.0 * cfg.n_particles)
    vcache: dict[tuple[int, ...], float] = {}

    def vhat_transfer(kvec: tuple[int, ...]) -> float:
        v = vcache.get(kvec)
        if v is None:
            v = cfg.pot.vhat_extended(Momentum(kvec, L).norm)
            vcache[kvec] = v
        return v

    entries: dict[tuple[int, int], float] = {}
    for i, s in enumerate(states):
        kin = math.fsum(norm2[m] * s[m] for m in range(nmode) if s[m])
        entries[(i, i)] = entries.get((i, i), 0.0) + kin
        occupied = [m for m in range(nmode) if s[m]]
        for p_i in occupied:
            amp_p = math.sqrt(s[p_i])
            s1 = list(s)
            s1[p_i] -= 1
            for q_i in range(nmode):
                if not s1[q_i]:
                    continue
                amp_q = amp_p * math.sqrt(s1[q_i])
                for t2_i in range(nmode):
                    t1_n = tuple(
                        mode_n[p_i][k] + mode_n[q_i][k] - mode_n[t2_i][k]
                        for k in range(cfg.lattice.d)
                    )
                    t1_i = mode_of.get(t1_n)
                    if t1_i is None:
                        continue
                    kvec = tuple(
                        mode_n[t2_i][k] - mode_n[p_i][k] for k in range(cfg.lattice.d)
                    )
                    v = vhat_transfer(kvec)
                    if v == 0.0:
                        continue
                    s3 = list(s1)
                    s3[q_i] -= 1
                    amp = amp_q * math.sqrt(s3[t1_i] + 1)
                    s3[t1_i] += 1
                    amp *= math.sqrt(s3[t2_i] + 1)
                    s3[t2_i] += 1
                    j = index.get(tuple(s3))
                    if j is None:
                        continue
                    entries[(j, i)] = entries.get((j, i), 0.0) + inv2n * v * amp
    return SectorMatrix(key, states, _csr_from_dict(entries, len(states)), "H", modes)


def assemble_estimating(
    cfg: EDConfig,
    sector: Sequence[int],
    eps: float,
    sign: int,
    basis: list[FockState] | None = None,
) -> SectorMatrix:
    """Estimating Hamiltonian H_{N,+eps} (sign=+1) or H_{N,-eps} (sign=-1).

    H_{N,-eps} bounds the Hamiltonian from below for 0 < eps <= 1 and
    H_{N,+eps} from above for eps > 0; both inequalities survive the
    compression to the truncated basis.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    if sign < 0 and eps > 1.0:
        raise ValueError("lower estimate requires 0 < eps <= 1")
    key = tuple(int(c) for c in sector)
    states = _sector_basis(cfg, key, basis)
    modes = cfg.modes()
    nmode = len(modes)
    index = {s: i for i, s in enumerate(states)}
    zero_idx = next(i for i, m in enumerate(modes) if m.is_zero)
    norm2 = [m.norm2 for m in modes]
    vhat_m = [cfg.pot.vhat_extended(m.norm) for m in modes]
    neg_of = {i: next(j for j, mm in enumerate(modes) if mm.n == tuple(-c for c in modes[i].n))
              for i in range(nmode)}
    n_part = cfg.n_particles
    v0hat = cfg.pot.vhat_extended(0.0)
    v0real = periodized_value(cfg.pot, cfg.lattice, (0.0,) * cfg.lattice.d)
    # the signed eps flips both the condensate-weighted term and the
    # coefficient (1 + 1/(sign*eps)) of the excited-pair repulsion
    eps_signed = sign * eps
    coef_last = (1.0 + 1.0 / eps_signed) * v0real * cfg.lattice.volume / (2.0 * n_part)
    const = 0.5 * v0hat * (n_part - 1)
    entries: dict[tuple[int, int], float] = {}
    for i, s in enumerate(states):
        n0 = s[zero_idx]
        ngt = n_part - n0
        diag = const
        diag += math.fsum(
            (norm2[m] + vhat_m[m]) * s[m] for m in range(nmode) if m != zero_idx and s[m]
        )
        diag -= (
            math.fsum(
                (vhat_m[m] + 0.5 * v0hat) * s[m]
                for m in range(nmode)
                if m != zero_idx and s[m]
            )
            * ngt
            / n_part
        )
        diag += 0.5 * v0hat * ngt / n_part
        diag += (
            eps_signed
            / n_part
            * n0
            * math.fsum(
                (vhat_m[m] + v0hat) * s[m] for m in range(nmode) if m != zero_idx and s[m]
            )
        )
        diag += coef_last * ngt * (ngt - 1)
        entries[(i, i)] = entries.get((i, i), 0.0) + diag
        # pairing (1/2N) sum_{p != 0} vhat(p) (a0+ a0+ a_p a_{-p} + hc)
        for m in range(nmode):
            if m == zero_idx or vhat_m[m] == 0.0:
                continue
            mm = neg_of[m]
            if s[m] and (s[mm] - (1 if mm == m else 0)) > 0:
                t = list(s)
                amp = math.sqrt(t[m])
                t[m] -= 1
                amp *= math.sqrt(t[mm])
                t[mm] -= 1
                amp *= math.sqrt(t[zero_idx] + 1)
                t[zero_idx] += 1
                amp *= math.sqrt(t[zero_idx] + 1)
                t[zero_idx] += 1
                j = index.get(tuple(t))
                if j is not None:
                    entries[(j, i)] = entries.get((j, i), 0.0) + vhat_m[m] * amp / (
                        2.0 * n_part
                    )
            if s[zero_idx] >= 2:
                t = list(s)
                amp = math.sqrt(t[zero_idx])
                t[zero_idx] -= 1
                amp *= math.sqrt(t[zero_idx])
                t[zero_idx] -= 1
                amp *= math.sqrt(t[mm] + 1)
                t[mm] += 1
                amp *= math.sqrt(t[m] + 1)
                t[m] += 1
                j = index.get(tuple(t))
                if j is not None:
                    entries[(j, i)] = entries.get((j, i), 0.0) + vhat_m[m] * amp / (
                        2.0 * n_part
                    )
    kind = "H+eps" if sign > 0 else "H-eps"
    return SectorMatrix(key, states, _csr_from_dict(entries, len(states)), kind, modes)


def assemble_kinetic(
    cfg: EDConfig, sector: Sequence[int], basis: list[FockState] | None = None
) -> SectorMatrix:
    """Kinetic energy sum_p |p|^2 n_p (diagonal)."""
    key = tuple(int(c) for c in sector)
    states = _sector_basis(cfg, key, basis)
    modes = cfg.modes()
    norm2 = [m.norm2 for m in modes]
    entries = {
        (i, i): math.fsum(norm2[m] * s[m] for m in range(len(modes)) if s[m])
        for i, s in enumerate(states)
    }
    return SectorMatrix(key, states, _csr_from_dict(entries, len(states)), "T", modes)


def assemble_excited_count(
    cfg: EDConfig, sector: Sequence[int], basis: list[FockState] | None = None
) -> SectorMatrix:
    """Excited-particle number N^> (diagonal)."""
    key = tuple(int(c) for c in sector)
    states = _sector_basis(cfg, key, basis)
    modes = cfg.modes()
    zero_idx = next(i for i, m in enumerate(modes) if m.is_zero)
    entries = {
        (i, i): float(cfg.n_particles - s[zero_idx]) for i, s in enumerate(states)
    }
    return SectorMatrix(key, states, _csr_from_dict(entries, len(states)), "Ngt", modes)


def assemble_bogoliubov_quadratic(
    modes: list[Momentum], pot: Potential, max_occupation: int
) -> SectorMatrix:
    """Quadratic Bogoliubov Hamiltonian on a per-mode occupation cutoff.

    sum_{p != 0} (|p|^2 + vhat(p)) a+_p a_p
    + (1/2) sum_{p != 0} vhat(p) (a_p a_{-p} + a+_p a+_{-p})
    on modes given in +/- pairs; particle number is not conserved so the
    truncation caps each mode's occupation instead.
    """
    if max_occupation < 0:
        raise ValueError("max_occupation must be >= 0")
    modes = sorted(modes, key=lambda m: m.n)
    if any(m.is_zero for m in modes):
        raise ValueError("the zero mode does not enter the quadratic Hamiltonian")
    keys = {m.n for m in modes}
    if len(keys) != len(modes) or any(tuple(-c for c in k) not in keys for k in keys):
        raise ValueError("modes must come in distinct +/- pairs")
    dim = (max_occupation + 1) ** len(modes)
    if dim > 400_000:
        raise ValueError(f"occupation basis of size {dim} is too large")
    nmode = len(modes)
    neg_of = {
        i: next(j for j, mm in enumerate(modes) if mm.n == tuple(-c for c in modes[i].n))
        for i in range(nmode)
    }
    diag_w = [m.norm2 + pot.vhat_extended(m.norm) for m in modes]
    vhat_m = [pot.vhat_extended(m.norm) for m in modes]

    from itertools import product as iproduct

    states = [tuple(occ) for occ in iproduct(range(max_occupation + 1), repeat=nmode)]
    index = {s: i for i, s in enumerate(states)}
    entries: dict[tuple[int, int], float] = {}
    for i, s in enumerate(states):
        entries[(i, i)] = math.fsum(diag_w[m] * s[m] for m in range(nmode))
        for m in range(nmode):
            if vhat_m[m] == 0.0:
                continue
            mm = neg_of[m]
            # (1/2) vhat(p) a_p a_{-p}: annihilate -p first, then p
            if s[mm] and (s[m] - (1 if m == mm else 0)) > 0:
                t = list(s)
                amp = math.sqrt(t[mm])
                t[mm] -= 1
                amp *= math.sqrt(t[m])
                t[m] -= 1
                j = index.get(tuple(t))
                if j is not None:
                    entries[(j, i)] = entries.get((j, i), 0.0) + 0.5 * vhat_m[m] * amp
            # (1/2) vhat(p) a+_p a+_{-p}: create -p first, then p
            t = list(s)
            amp = math.sqrt(t[mm] + 1)
            t[mm] += 1
            amp *= math.sqrt(t[m] + 1)
            t[m] += 1
            j = index.get(tuple(t))
            if j is not None:
                entries[(j, i)] = entries.get((j, i), 0.0) + 0.5 * vhat_m[m] * amp
    return SectorMatrix(None, states, _csr_from_dict(entries, dim), "HBog", modes)


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    residuals: np.ndarray
    method: str
    seed: int


def lowest_eigenvalues(
    m: SectorMatrix | sp.spmatrix,
    count: int,
    tol: float = 1e-9,
    seed: int = DEFAULT_SEED,
) -> EigenResult:
    """The `count` smallest eigenvalues with residual norms.

    Dense solve below DENSE_FALLBACK_DIM, else Lanczos with a start
    vector drawn from the fixed seed; residuals are checked against
    tol * ||M||_inf.  A single-vector Lanczos run may under-count
    degenerate multiplicities; use the dense path when exact
    multiplicities matter.
    """
    mat = m.matrix if isinstance(m, SectorMatrix) else sp.csr_matrix(m)
    dim = mat.shape[0]
    if count < 1 or count > dim:
        raise ValueError(f"count must be in [1, {dim}], got {count}")
    norm_est = float(abs(mat).sum(axis=1).max()) if mat.nnz else 0.0
    if dim <= DENSE_FALLBACK_DIM or count >= dim - 1:
        w, v = np.linalg.eigh(mat.toarray())
        order = np.argsort(w)[:count]
        vals = w[order]
        vecs = v[:, order]
        method = "dense"
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(dim)
        try:
            vals, vecs = spla.eigsh(
                mat, k=count, which="SA", tol=tol, v0=v0, maxiter=max(40 * dim, 1000)
            )
        except spla.ArpackNoConvergence as exc:
            got = np.asarray(exc.eigenvalues, dtype=float)
            res = np.full(len(got), np.nan)
            raise EigenConvergenceError(
                f"Lanczos did not converge ({len(got)}/{count} eigenpairs)", res
            ) from exc
        order = np.argsort(vals)
        vals = vals[order]
        vecs = vecs[:, order]
        method = "lanczos"
    residuals = np.array(
        [float(np.linalg.norm(mat @ vecs[:, j] - vals[j] * vecs[:, j])) for j in range(count)]
    )
    if method == "lanczos" and norm_est > 0 and np.any(residuals > tol * norm_est):
        raise EigenConvergenceError("residuals exceed tolerance", residuals)
    return EigenResult(values=vals, residuals=residuals, method=method, seed=seed)


@dataclass
class EDResult:
    """Low spectrum per sector: raw eigenvalues and gaps over the ground state."""

    config: dict
    e_ground: float
    sector_values: dict[tuple[int, ...], np.ndarray]
    sector_gaps: dict[tuple[int, ...], np.ndarray]
    sector_residuals: dict[tuple[int, ...], np.ndarray]
    seed: int
    tol: float

    @property
    def n_particles(self) -> int:
        return int(self.config["N"])


def many_body_excitations(
    cfg: EDConfig,
    sectors: Sequence[Sequence[int]],
    count: int,
    tol: float = 1e-9,
    seed: int = DEFAULT_SEED,
    max_workers: int = 1,
) -> EDResult:
    """Diagonalize the requested sectors and report excitation gaps.

    The zero sector must be included: it hosts the ground state, and a
    ground state found elsewhere signals a truncation artifact.  For the
    zero sector the ground state itself is skipped and subsequent gaps
    are reported.
    """
    keys = [tuple(int(c) for c in s) for s in sectors]
    zero = (0,) * cfg.lattice.d
    if zero not in keys:
        raise ValueError("the zero-momentum sector must be included")
    basis_map = build_basis(cfg)
    missing = [k for k in keys if not basis_map.get(k)]
    if missing:
        raise ValueError(f"no basis states in sectors {missing}")

    def solve(key: tuple[int, ...]) -> tuple[tuple[int, ...], EigenResult]:
        basis = basis_map[key]
        want = count + 1 if key == zero else count
        want = min(want, len(basis))
        mat = assemble_hamiltonian(cfg, key, basis)
        return key, lowest_eigenvalues(mat, want, tol=tol, seed=seed)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            solved = list(pool.map(solve, keys))
    else:
        solved = [solve(k) for k in keys]

    values = {k: r.values for k, r in solved}
    residuals = {k: r.residuals for k, r in solved}
    scale = max(float(np.max(np.abs(v))) for v in values.values())
    guard = tol * max(1.0, scale)
    e_ground = values[zero][0]
    for k, v in values.items():
        if k != zero and v[0] < e_ground - guard:
            raise GroundSectorError(
                f"lowest eigenvalue {v[0]} found in sector {k}, below sector-0 "
                f"value {e_ground}: truncation artifact"
            )
    gaps = {}
    for k, v in values.items():
        g = (v[1:] if k == zero else v) - e_ground
        if np.any(g < -guard):
            raise GroundSectorError(f"negative excitation gap in sector {k}: {g.min()}")
        gaps[k] = g
    return EDResult(
        config=cfg.snapshot(),
        e_ground=float(e_ground),
        sector_values=values,
        sector_gaps=gaps,
        sector_residuals=residuals,
        seed=seed,
        tol=tol,
    )
