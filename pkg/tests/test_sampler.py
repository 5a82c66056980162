"""Sampling: determinism, count law, thinning coupling, padding, coverage."""

import math

import numpy as np
import pytest

import boolperc as bp
from boolperc.serialize import load_configuration, save_configuration


WIN10 = bp.Rect(0.0, 0.0, 10.0, 10.0)


def test_padding_examples():
    assert bp.padding_radius(bp.Dirac(1.0), 1.0, WIN10, 1e-3) == 1.0
    assert bp.missed_disc_bound(bp.Dirac(1.0), 1.0, WIN10, 1.0) == 0.0
    assert bp.padding_radius(bp.Uniform(1.0, 2.0), 1.0, WIN10, 1e-3) == 2.0
    assert bp.missed_disc_bound(bp.Uniform(1.0, 2.0), 1.0, WIN10, 2.0) == 0.0


def test_missed_bound_decreases_in_pad():
    law = bp.ParetoTail(3.0, 1.0)
    pads = [2.0, 4.0, 8.0, 16.0, 64.0]
    vals = [bp.missed_disc_bound(law, 0.4, WIN10, p) for p in pads]
    assert all(a > b > 0 for a, b in zip(vals, vals[1:]))
    # returned pad really certifies the eps it was asked for
    pad = bp.padding_radius(law, 0.4, WIN10, 0.05)
    assert bp.missed_disc_bound(law, 0.4, WIN10, pad) <= 0.05


def test_missed_bound_closed_form():
    # lambda * int_pad^inf (w+2z)(h+2z) mu(dz), expanded in partial moments
    law, lam, pad = bp.ParetoTail(3.0, 1.0), 0.4, 5.0
    w = h = 10.0
    want = lam * (
        w * h * bp.tail_mass(law, pad)
        + 2.0 * (w + h) * bp.partial_moment(law, pad, 1)
        + 4.0 * bp.partial_moment(law, pad, 2)
    )
    assert bp.missed_disc_bound(law, lam, WIN10, pad) == pytest.approx(want)


def test_determinism_and_digest():
    a = bp.sample_configuration(bp.Uniform(1.0, 2.0), 0.3, WIN10, seed=42)
    b = bp.sample_configuration(bp.Uniform(1.0, 2.0), 0.3, WIN10, seed=42)
    assert a.digest() == b.digest()
    np.testing.assert_array_equal(a.x, b.x)
    c = bp.sample_configuration(bp.Uniform(1.0, 2.0), 0.3, WIN10, seed=43)
    assert a.digest() != c.digest()


def test_centers_in_padded_window():
    cfg = bp.sample_configuration(bp.Uniform(1.0, 2.0), 0.5, WIN10, seed=3)
    assert cfg.pad == 2.0
    padded = WIN10.pad(2.0)
    assert np.all((cfg.x >= padded.x0) & (cfg.x <= padded.x1))
    assert np.all((cfg.y >= padded.y0) & (cfg.y <= padded.y1))


def test_count_law_poisson():
    # Dirac(1), lam=1, 10x10 window pads to 12x12: Poisson(144)
    counts = np.array(
        [
            bp.sample_configuration(bp.Dirac(1.0), 1.0, WIN10, seed=s).n
            for s in range(10_000)
        ],
        dtype=float,
    )
    mean, var = counts.mean(), counts.var(ddof=1)
    sigma_mean = math.sqrt(144.0 / len(counts))
    assert abs(mean - 144.0) < 4 * sigma_mean
    # var of sample variance for Poisson(m): (m + 2 m^2/(n-1))... use a loose
    # normal approximation: sd(S^2) ~ m * sqrt(2/(n-1) + 1/(m n))
    sigma_var = 144.0 * math.sqrt(2.0 / (len(counts) - 1) + 1.0 / (144.0 * len(counts)))
    assert abs(var - 144.0) < 4 * sigma_var


def test_thinning_is_nested_and_well_distributed():
    law = bp.Uniform(1.0, 2.0)
    cfg = bp.sample_configuration(law, 0.8, WIN10, seed=11)
    mid = bp.thin(cfg, 0.5)
    low = bp.thin(cfg, 0.2)
    low_direct = bp.thin(mid, 0.2)
    assert set(low.ids.tolist()) <= set(mid.ids.tolist()) <= set(cfg.ids.tolist())
    np.testing.assert_array_equal(low.ids, low_direct.ids)  # chain = direct
    # retention frequency over many configurations
    kept = total = 0
    for s in range(300):
        c = bp.sample_configuration(law, 0.8, WIN10, seed=s)
        kept += bp.thin(c, 0.5).n
        total += c.n
    p = kept / total
    assert abs(p - 0.625) < 4 * math.sqrt(0.625 * 0.375 / total)


def test_thin_truncate_commute():
    cfg = bp.sample_configuration(bp.ParetoTail(3.0, 1.0), 0.4, WIN10, seed=7, pad=8.0)
    a = bp.truncate(bp.thin(cfg, 0.1), 1.5)
    b = bp.thin(bp.truncate(cfg, 1.5), 0.1)
    np.testing.assert_array_equal(a.ids, b.ids)
    np.testing.assert_array_equal(a.r, b.r)
    assert np.all(a.r <= 1.5)


def test_thin_rejects_upward():
    cfg = bp.sample_configuration(bp.Dirac(1.0), 0.5, WIN10, seed=0)
    with pytest.raises(ValueError):
        bp.thin(cfg, 0.7)


def test_replicate_rng_streams_differ():
    r0 = bp.replicate_rng(5, 0).random(4)
    r1 = bp.replicate_rng(5, 1).random(4)
    r0b = bp.replicate_rng(5, 0).random(4)
    np.testing.assert_array_equal(r0, r0b)
    assert not np.array_equal(r0, r1)


def test_vacant_fraction_dirac():
    # P(point vacant) = exp(-lam*pi) for Dirac(1)
    law, lam = bp.Dirac(1.0), 0.3
    target = math.exp(-lam * math.pi)
    vals = []
    for s in range(30):
        cfg = bp.sample_configuration(law, lam, WIN10, seed=s)
        est = bp.vacant_fraction(cfg, WIN10, 3000, bp.replicate_rng(1000 + s))
        vals.append(est.p_hat)
    vals = np.asarray(vals)
    # probes within a configuration are spatially correlated; the honest
    # sigma is the replicate spread, not the pooled binomial one
    sem = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - target) < 4 * sem


def test_coverage_dichotomy():
    """Heavy tails (no second moment) cover everything as the cutoff grows."""
    win = bp.Rect(0.0, 0.0, 4.0, 4.0)
    heavy = bp.ParetoTail(2.0, 1.0)
    fractions = []
    for pad in (10.0, 100.0, 1000.0):
        vals = []
        for s in range(30):
            cfg = bp.sample_configuration(heavy, 0.05, win, seed=s, pad=pad)
            vals.append(bp.vacant_fraction(cfg, win, 2000, bp.replicate_rng(s)).p_hat)
        fractions.append(np.mean(vals))
    assert fractions[0] > fractions[1] > fractions[2]
    # with a finite second moment the fraction stabilizes near the void limit
    ok = bp.ParetoTail(3.0, 1.0)
    target = math.exp(-0.3 * math.pi * 3.0)
    for pad in (100.0, 1000.0):
        vals = []
        for s in range(30):
            cfg = bp.sample_configuration(ok, 0.3, win, seed=s, pad=pad)
            vals.append(bp.vacant_fraction(cfg, win, 2000, bp.replicate_rng(s)).p_hat)
        vals = np.asarray(vals)
        sem = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - target) < 4 * sem


def test_explicit_pad_tags_missed_bound():
    heavy = bp.ParetoTail(2.0, 1.0)
    cfg = bp.sample_configuration(heavy, 0.3, WIN10, seed=1, pad=10.0)
    assert math.isinf(cfg.missed_bound)
    light = bp.sample_configuration(bp.ParetoTail(3.0, 1.0), 0.3, WIN10, seed=1, pad=10.0)
    assert 0.0 < light.missed_bound < math.inf


def test_scaled_configuration():
    cfg = bp.sample_configuration(bp.Uniform(1.0, 2.0), 0.5, WIN10, seed=9)
    big = cfg.scaled(3.0)
    np.testing.assert_allclose(big.r, 3.0 * cfg.r)
    assert big.window.width == pytest.approx(30.0)
    # intensity scales by 1/s^2 so expected disc counts match
    assert big.lam == pytest.approx(cfg.lam / 9.0)


def test_serialization_round_trip(tmp_path):
    cfg = bp.sample_configuration(bp.ParetoTail(3.0, 1.0), 0.4, WIN10, seed=17, pad=6.0)
    csv_path, json_path = tmp_path / "c.csv", tmp_path / "c.json"
    save_configuration(cfg, csv_path, json_path)
    back = load_configuration(csv_path, json_path)
    np.testing.assert_array_equal(cfg.x, back.x)
    np.testing.assert_array_equal(cfg.y, back.y)
    np.testing.assert_array_equal(cfg.r, back.r)
    np.testing.assert_array_equal(cfg.ids, back.ids)
    assert back.law == cfg.law and back.seed == cfg.seed
    assert back.digest() == cfg.digest()
    # thinning still works on the reloaded configuration (stateless coupling)
    np.testing.assert_array_equal(bp.thin(cfg, 0.2).ids, bp.thin(back, 0.2).ids)
