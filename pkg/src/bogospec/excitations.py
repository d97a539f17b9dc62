"""Multi-quasiparticle excitation spectrum below an energy cutoff.

An excitation is a finite multiset of nonzero lattice momenta; its energy
and momentum are the sums over constituents.  Enumeration is best-first
over canonically ordered constituent sequences (each extension appends a
momentum that is lexicographically >= the last one), so every multiset is
generated exactly once and records arrive per sector already sorted.

Completeness below the cutoff kappa is certified by dispersion(k) >= |k|^2:
each constituent satisfies dispersion(k) <= kappa, hence |k| <= sqrt(kappa),
and the multiset size is bounded by kappa over the smallest dispersion.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .bogoliubov import dispersion
from .model import LatticeSpec, Momentum, Potential, lattice_points


class OutOfWindowError(ValueError):
    """A sector outside the enumerated momentum window was requested."""


@dataclass(frozen=True)
class ExcitationRecord:
    """One excitation: momentum sector, energy, constituents and rank."""

    total_momentum: Momentum
    energy: float
    constituents: tuple[Momentum, ...]
    rank: int
    n_quasi: int


@dataclass
class SpectrumTable:
    """Complete spectrum below kappa, binned by total momentum.

    Sector keys are integer coordinate tuples; a missing key inside the
    window means no excitation of that momentum exists below kappa.
    """

    lattice: LatticeSpec
    pot: Potential
    kappa: float
    window: float
    sectors: dict[tuple[int, ...], list[ExcitationRecord]]

    def sector(self, p: Momentum | tuple[int, ...]) -> list[ExcitationRecord]:
        key = p.n if isinstance(p, Momentum) else tuple(int(c) for c in p)
        if self.lattice.momentum(key).norm > self.window:
            raise OutOfWindowError(f"sector {key} outside momentum window {self.window}")
        return self.sectors.get(key, [])


def _candidates(
    lattice: LatticeSpec,
    pot: Potential,
    kappa: float,
    modes: list[Momentum] | None,
) -> list[tuple[tuple[int, ...], float]]:
    if modes is None:
        radius = math.sqrt(kappa) if kappa > 0.0 else 0.0
        modes = lattice_points(lattice, radius, include_zero=False)
    out = []
    for m in sorted(modes, key=lambda q: q.n):
        if m.is_zero:
            continue
        e = dispersion(m, pot)
        if e <= kappa:
            out.append((m.n, e))
    return out


def enumerate_below(
    lattice: LatticeSpec,
    pot: Potential,
    kappa: float,
    momentum_window: float,
    modes: list[Momentum] | None = None,
) -> SpectrumTable:
    """Enumerate every excitation with energy <= kappa, exactly once.

    Constituents may lie outside the momentum window; only the total
    momentum is filtered, at emission.  Ties in energy are ranked by
    (number of quasiparticles, lexicographic constituent encoding).
    """
    if kappa < 0.0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    if momentum_window < 0.0:
        raise ValueError(f"momentum window must be >= 0, got {momentum_window}")
    cand = _candidates(lattice, pot, kappa, modes)
    d = lattice.d
    h = lattice.spacing
    win2 = (momentum_window / h) ** 2 * (1.0 + 1e-12)
    sectors: dict[tuple[int, ...], list[ExcitationRecord]] = {}
    # heap entries: (energy, n_quasi, encoding, total n, next candidate index)
    heap: list[tuple[float, int, tuple, tuple[int, ...], int]] = [
        (0.0, 0, (), (0,) * d, 0)
    ]
    while heap:
        energy, cnt, enc, total, start = heapq.heappop(heap)
        if cnt and sum(c * c for c in total) <= win2:
            rec = ExcitationRecord(
                total_momentum=Momentum(total, lattice.L),
                energy=energy,
                constituents=tuple(Momentum(nv, lattice.L) for nv in enc),
                rank=0,
                n_quasi=cnt,
            )
            sectors.setdefault(total, []).append(rec)
        for i in range(start, len(cand)):
            nv, e = cand[i]
            ne = energy + e
            if ne <= kappa:
                new_total = tuple(a + b for a, b in zip(total, nv))
                heapq.heappush(heap, (ne, cnt + 1, enc + (nv,), new_total, i))
    for key, recs in sectors.items():
        sectors[key] = [
            ExcitationRecord(r.total_momentum, r.energy, r.constituents, j + 1, r.n_quasi)
            for j, r in enumerate(recs)
        ]
    return SpectrumTable(lattice, pot, kappa, momentum_window, sectors)


def kth_excitation(
    table: SpectrumTable, p: Momentum | tuple[int, ...], j: int
) -> float | None:
    """The j-th smallest energy in sector p, or None if unresolved.

    None means "not resolved below kappa", never "does not exist".
    """
    if j < 1:
        raise ValueError(f"rank j must be >= 1, got {j}")
    recs = table.sector(p)
    return recs[j - 1].energy if j <= len(recs) else None


@dataclass(frozen=True)
class FigureRow:
    sector: tuple[int, ...]
    energy: float
    n_quasi: int
    cls: str


def classify_for_figure(table: SpectrumTable) -> list[FigureRow]:
    """One row per record with the quasiparticle-count class clamped at 3.

    Classes "1qp", "2qp", "3qp+" correspond to the dot / triangle /
    square markers of the spectrum figures.
    """
    rows: list[FigureRow] = []
    for key in sorted(table.sectors, key=lambda k: (sum(c * c for c in k), k)):
        for rec in table.sectors[key]:
            cls = "1qp" if rec.n_quasi == 1 else "2qp" if rec.n_quasi == 2 else "3qp+"
            rows.append(FigureRow(key, rec.energy, rec.n_quasi, cls))
    return rows


@dataclass(frozen=True)
class DampingRow:
    sector: tuple[int, ...]
    e_p: float
    min_multi_energy: float | None
    unstable: bool | None


def damping_scan(table: SpectrumTable) -> list[DampingRow]:
    """Per-sector stability of the single quasiparticle.

    unstable is True when some multi-quasiparticle state of the same
    momentum lies strictly below the dispersion, False when completeness
    below kappa certifies there is none, and None (undetermined) when
    kappa is too small to decide.
    """
    rows: list[DampingRow] = []
    pts = lattice_points(table.lattice, table.window, include_zero=False)
    for p in sorted(pts, key=lambda q: (q.norm2_int, q.n)):
        e_p = dispersion(p, table.pot)
        multi = [r.energy for r in table.sectors.get(p.n, []) if r.n_quasi >= 2]
        m = min(multi) if multi else None
        if m is not None and m < e_p:
            unstable: bool | None = True
        elif e_p <= table.kappa:
            unstable = False
        else:
            unstable = None
        rows.append(DampingRow(p.n, e_p, m, unstable))
    return rows


def oracle_enumerate(
    lattice: LatticeSpec,
    pot: Potential,
    kappa: float,
    p: Momentum | tuple[int, ...],
    modes: list[Momentum] | None = None,
) -> list[tuple[float, tuple[tuple[int, ...], ...]]]:
    """Brute-force reference enumeration of one sector (tests only).

    Recursively generates every canonical multiset without a priority
    queue and returns (energy, constituents) sorted exactly like the main
    search.  Guarded to small instances: constituent shells |n| <= 5 and
    multiset size <= 8.
    """
    if kappa < 0.0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    cand = _candidates(lattice, pot, kappa, modes)
    if any(max(abs(c) for c in nv) > 5 for nv, _ in cand):
        raise ValueError("oracle guard: constituent shells beyond |n| = 5")
    if cand:
        min_e = min(e for _, e in cand)
        if kappa / min_e > 8.0:
            raise ValueError("oracle guard: multiset size bound exceeds 8")
    target = p.n if isinstance(p, Momentum) else tuple(int(c) for c in p)
    d = lattice.d
    found: list[tuple[float, int, tuple]] = []

    def extend(start: int, seq: tuple, energy: float, total: tuple[int, ...]) -> None:
        if seq and total == target:
            found.append((energy, len(seq), seq))
        for i in range(start, len(cand)):
            nv, e = cand[i]
            if energy + e <= kappa:
                extend(
                    i,
                    seq + (nv,),
                    energy + e,
                    tuple(a + b for a, b in zip(total, nv)),
                )

    extend(0, (), 0.0, (0,) * d)
    found.sort()
    return [(e, seq) for e, _, seq in found]
