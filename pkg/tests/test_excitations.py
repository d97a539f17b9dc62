"""Spectrum enumeration: oracle equivalence, completeness, damping, figures."""

import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bogospec.excitations import (
    OutOfWindowError,
    classify_for_figure,
    damping_scan,
    enumerate_below,
    kth_excitation,
    oracle_enumerate,
)
from bogospec.bogoliubov import dispersion
from bogospec.model import LatticeSpec, Potential

LAT = LatticeSpec(2 * math.pi, 1)
ZERO = Potential.zero(1)
V1 = Potential.gaussian(0.1, 5.0, 1)
LAT_015 = LatticeSpec(40 * math.pi / 3, 1)


def _multisets(table, key):
    return [tuple(m.n for m in r.constituents) for r in table.sectors.get(key, [])]


def test_free_case_sector_one():
    table = enumerate_below(LAT, ZERO, 5.5, momentum_window=3.0)
    recs = table.sectors[(1,)]
    assert [r.energy for r in recs] == [1.0, 3.0, 5.0, 5.0]
    assert _multisets(table, (1,)) == [
        ((1,),),
        ((-1,), (1,), (1,)),
        ((-1,), (2,)),
        ((-1,), (-1,), (1,), (1,), (1,)),
    ]
    assert [r.rank for r in recs] == [1, 2, 3, 4]


def test_free_case_sector_zero():
    # oracle-derived list; the {-2, 1, 1} multiset also lands at energy 6
    table = enumerate_below(LAT, ZERO, 6.5, momentum_window=3.0)
    assert [r.energy for r in table.sectors[(0,)]] == [2.0, 4.0, 6.0, 6.0, 6.0]


def test_free_energies_are_exact_integers():
    table = enumerate_below(LAT, ZERO, 7.5, momentum_window=3.0)
    for recs in table.sectors.values():
        for r in recs:
            assert r.energy == float(sum(m.norm2_int for m in r.constituents))


def test_kappa_zero_empty():
    table = enumerate_below(LAT, V1, 0.0, momentum_window=2.0)
    assert table.sectors == {}
    assert kth_excitation(table, (1,), 1) is None


def test_negative_kappa_rejected():
    with pytest.raises(ValueError):
        enumerate_below(LAT, V1, -1.0, momentum_window=1.0)


def test_kth_excitation_semantics():
    table = enumerate_below(LAT, ZERO, 7.5, momentum_window=3.0)
    assert kth_excitation(table, (1,), 3) == 5.0
    assert kth_excitation(table, (1,), 1) == 1.0
    assert kth_excitation(table, (1,), 99) is None
    with pytest.raises(OutOfWindowError):
        kth_excitation(table, (17,), 1)
    with pytest.raises(ValueError):
        kth_excitation(table, (1,), 0)


def test_record_invariants():
    table = enumerate_below(LAT, V1, 3.0, momentum_window=2.0)
    for key, recs in table.sectors.items():
        energies = [r.energy for r in recs]
        assert energies == sorted(energies)
        for r in recs:
            total = tuple(sum(c) for c in zip(*(m.n for m in r.constituents)))
            assert total == key
            assert r.n_quasi == len(r.constituents)
            assert all(not m.is_zero for m in r.constituents)
            s = math.fsum(dispersion(m, V1) for m in r.constituents)
            assert r.energy == pytest.approx(s, abs=1e-12)


def test_canonicality_no_duplicate_multisets():
    table = enumerate_below(LAT, ZERO, 7.5, momentum_window=3.0)
    for key in table.sectors:
        ms = _multisets(table, key)
        assert len(ms) == len(set(ms))


def test_downward_closure():
    table = enumerate_below(LAT, ZERO, 7.5, momentum_window=10.0)
    all_sets = {key: set(_multisets(table, key)) for key in table.sectors}
    for key, recs in table.sectors.items():
        for r in recs:
            cons = tuple(m.n for m in r.constituents)
            if len(cons) == 1:
                continue
            for i in range(len(cons)):
                sub = cons[:i] + cons[i + 1 :]
                sub_total = tuple(sum(c) for c in zip(*sub))
                assert sub in all_sets[sub_total]


def test_monotone_cutoff_prefix():
    small = enumerate_below(LAT, ZERO, 5.5, momentum_window=3.0)
    large = enumerate_below(LAT, ZERO, 7.5, momentum_window=3.0)
    for key, recs in small.sectors.items():
        big = large.sectors[key]
        for j, r in enumerate(recs):
            assert big[j].energy == r.energy
            assert [m.n for m in big[j].constituents] == [m.n for m in r.constituents]
            assert big[j].rank == r.rank


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.0, 6.0))
def test_monotone_cutoff_property(k1, k2):
    lo, hi = sorted((k1, k2))
    small = enumerate_below(LAT, ZERO, lo, momentum_window=2.0)
    large = enumerate_below(LAT, ZERO, hi, momentum_window=2.0)
    for key, recs in small.sectors.items():
        assert [r.energy for r in recs] == [
            r.energy for r in large.sectors[key][: len(recs)]
        ]


def test_oracle_matches_main_free():
    table = enumerate_below(LAT, ZERO, 7.5, momentum_window=3.0)
    for key in ((0,), (1,), (2,), (-3,)):
        main = [
            (r.energy, tuple(m.n for m in r.constituents))
            for r in table.sectors.get(key, [])
        ]
        assert oracle_enumerate(LAT, ZERO, 7.5, key) == main


def test_oracle_matches_main_interacting():
    table = enumerate_below(LAT, V1, 3.0, momentum_window=2.0)
    for key in ((0,), (1,)):
        main = [
            (r.energy, tuple(m.n for m in r.constituents))
            for r in table.sectors.get(key, [])
        ]
        oracle = oracle_enumerate(LAT, V1, 3.0, key)
        assert [o[1] for o in oracle] == [m[1] for m in main]
        for (eo, _), (em, _) in zip(oracle, main):
            assert em == pytest.approx(eo, abs=1e-12)


def test_oracle_matches_main_2d():
    lat2 = LatticeSpec(2 * math.pi, 2)
    z2 = Potential.zero(2)
    table = enumerate_below(lat2, z2, 4.5, momentum_window=2.0)
    for key in ((0, 0), (1, 0), (1, 1)):
        main = [
            (r.energy, tuple(m.n for m in r.constituents))
            for r in table.sectors.get(key, [])
        ]
        assert oracle_enumerate(lat2, z2, 4.5, key) == main


def test_oracle_guards():
    with pytest.raises(ValueError):
        oracle_enumerate(LAT, ZERO, 9.0, (1,))  # size bound 9 > 8
    with pytest.raises(ValueError):
        oracle_enumerate(LAT, ZERO, 40.0, (1,))  # shells beyond |n|=5


def test_oracle_empty_at_zero_cutoff():
    assert oracle_enumerate(LAT, ZERO, 0.0, (1,)) == []


def test_constituents_may_leave_window():
    # {2, -1} lands in sector 1 although |2| exceeds the window
    table = enumerate_below(LAT, ZERO, 5.5, momentum_window=1.0)
    assert ((-1,), (2,)) in _multisets(table, (1,))
    assert (2,) not in table.sectors


def test_classify_rows():
    table = enumerate_below(LAT, ZERO, 5.5, momentum_window=2.0)
    rows = classify_for_figure(table)
    by_class = Counter(r.cls for r in rows)
    assert set(by_class) <= {"1qp", "2qp", "3qp+"}
    one_qp = [r for r in rows if r.sector == (1,) and r.cls == "1qp"]
    assert len(one_qp) == 1 and one_qp[0].energy == 1.0
    for r in rows:
        if r.n_quasi >= 3:
            assert r.cls == "3qp+"


def test_damping_free_case():
    table = enumerate_below(LAT, ZERO, 6.5, momentum_window=2.0)
    rows = {r.sector: r for r in damping_scan(table)}
    assert rows[(2,)].unstable is True
    assert rows[(2,)].min_multi_energy == 2.0
    assert rows[(1,)].unstable is False
    assert rows[(1,)].min_multi_energy == 3.0


def test_damping_undetermined_when_kappa_small():
    # kappa below dispersion(2) = 4 and below any 2qp in that sector
    table = enumerate_below(LAT, ZERO, 1.5, momentum_window=2.0)
    rows = {r.sector: r for r in damping_scan(table)}
    assert rows[(2,)].unstable is None
    assert rows[(1,)].unstable is False


def test_damping_weak_gaussian_low_momentum_unstable():
    table = enumerate_below(LAT_015, V1, 0.5, momentum_window=0.5)
    rows = {r.sector: r for r in damping_scan(table)}
    unstable = [k for k, r in rows.items() if r.unstable]
    assert (2,) in unstable
    assert rows[(1,)].unstable is False


def _first_max_then_min(values):
    """Index pair (i, j), i < j, of a strict local max followed by a min."""
    imax = None
    for i in range(1, len(values) - 1):
        if imax is None and values[i] > values[i - 1] and values[i] > values[i + 1]:
            imax = i
        elif imax is not None and values[i] < values[i - 1] and values[i] < values[i + 1]:
            return imax, i
    return None


def test_strong_coupling_maxon_roton():
    # ten times the weak figure amplitude: the dispersion develops a
    # maxon/roton pair, resolvable on the 0.15-spaced lattice
    strong = Potential.gaussian(75.0, 2.0, 1)
    curve = [dispersion(LAT_015.momentum(n), strong) for n in range(1, 41)]
    hit = _first_max_then_min(curve)
    assert hit is not None
    imax, imin = hit
    assert curve[imax] > curve[imin]


def test_weak_figure_potential_sectors_sorted():
    table = enumerate_below(LAT_015, V1, 0.4, momentum_window=0.4)
    rows = classify_for_figure(table)
    keys = [r.sector for r in rows]
    assert keys == sorted(keys, key=lambda k: (sum(c * c for c in k), k))
