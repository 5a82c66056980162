"""Surrounding components, necklace extraction/minimality, big-disc counts."""

import math

import numpy as np
import pytest

import boolperc as bp
from boolperc.topology import Necklace

from conftest import make_config


def ring(n=8, rho=3.0, radius=1.2, extra=()):
    ang = np.arange(n) * 2.0 * math.pi / n
    x = list(rho * np.cos(ang)) + [e[0] for e in extra]
    y = list(rho * np.sin(ang)) + [e[1] for e in extra]
    r = list(np.full(n, radius)) + [e[2] for e in extra]
    return make_config(x, y, r, bp.Rect(-10, -10, 10, 10))


def test_ring_surrounds():
    cfg = ring()
    res = bp.surrounding_component(cfg, 1.0)
    assert res is not None
    assert len(res.component) == 8
    assert len(res.loop) >= 3


def test_broken_ring_does_not_surround():
    # remove one pearl: the chain wraps most of the way but cannot close
    cfg = ring()
    keep = np.arange(8) != 3
    broken = make_config(cfg.x[keep], cfg.y[keep], cfg.r[keep], cfg.window)
    assert bp.surrounding_component(broken, 1.0) is None


def test_disc_touching_ball_is_excluded():
    # one disc overlaps the protected ball; it cannot join the circuit
    cfg = ring(extra=[(0.0, 1.2, 0.8)])
    res = bp.surrounding_component(cfg, 1.0)
    assert res is not None
    assert 8 not in res.component.tolist()


def test_rotation_invariance():
    cfg = ring()
    for phi in (0.3, 1.1, 2.8):
        c, s = math.cos(phi), math.sin(phi)
        rot = make_config(
            c * cfg.x - s * cfg.y, s * cfg.x + c * cfg.y, cfg.r, cfg.window
        )
        res = bp.surrounding_component(rot, 1.0)
        assert res is not None and len(res.component) == 8


def test_uncertifiable_negative_raises():
    # an arc that leaves the window while wrapping more than a half turn
    ang = np.linspace(-0.75 * math.pi, 0.75 * math.pi, 22)
    x, y = 7.5 * np.cos(ang), 7.5 * np.sin(ang)
    cfg = make_config(x, y, np.full(22, 1.3), bp.Rect(-8, -8, 8, 8))
    with pytest.raises(bp.WindowInsufficientError):
        bp.surrounding_component(cfg, 1.0)


def test_necklace_extraction_minimal():
    # redundant double ring: extraction must prune one of the two rings
    inner = ring()
    ang = np.arange(10) * 2.0 * math.pi / 10
    cfg = make_config(
        np.concatenate([inner.x, 5.0 * np.cos(ang)]),
        np.concatenate([inner.y, 5.0 * np.sin(ang)]),
        np.concatenate([inner.r, np.full(10, 1.7)]),
        bp.Rect(-10, -10, 10, 10),
    )
    neck = bp.extract_necklace(cfg, 1.0)
    assert neck is not None
    assert neck.k == 8  # the eight small pearls survive largest-first pruning
    report = bp.validate_necklace(neck, cfg, 0.05)
    assert report.all_pass
    # keeping big pearls instead: the outer ring, with a larger second radius
    neck_big = bp.extract_necklace(cfg, 1.0, order="smallest_first")
    assert bp.second_radius(neck_big) >= bp.second_radius(neck)


def test_necklace_radii_sorted_and_validated(ring_config):
    neck = bp.extract_necklace(ring_config, 1.0)
    assert neck is not None and neck.k == 8
    assert np.all(np.diff(neck.r) <= 0)
    assert bp.second_radius(neck) == pytest.approx(1.2)
    report = bp.validate_necklace(neck, ring_config, 0.05)
    assert report.two_components and report.n_pockets == 0
    assert report.avoids_and_surrounds and report.minimal


def test_validate_rejects_redundant_necklace(ring_config):
    # hand-build a "necklace" with a junk pearl: minimality must fail
    cfg = ring(extra=[(6.0, 0.0, 1.0)])
    order = np.argsort(-cfg.r)
    fake = Necklace(
        x=cfg.x[order], y=cfg.y[order], r=cfg.r[order], L=1.0,
        indices=np.arange(9),
    )
    report = bp.validate_necklace(fake, cfg, 0.05)
    assert not report.minimal
    assert not report.all_pass


def test_pocket_detection():
    # a necklace of 4 big discs plus a small ring stuck on the outside that
    # traps a vacant pocket between itself and the necklace would violate
    # the two-component check; emulate with an extra closed ring of discs
    ang4 = np.arange(4) * math.pi / 2.0
    main = [(3.0 * math.cos(a), 3.0 * math.sin(a), 2.3) for a in ang4]
    cfg = make_config(
        [m[0] for m in main], [m[1] for m in main], [m[2] for m in main],
        bp.Rect(-10, -10, 10, 10),
    )
    neck = bp.extract_necklace(cfg, 0.5)
    assert neck is not None
    assert bp.validate_necklace(neck, cfg, 0.05).two_components


def test_grid_escape_oracle(ring_config):
    assert bp.grid_ball_blocked(ring_config, 1.0, 0.05)
    empty = make_config([], [], [], bp.Rect(-8, -8, 8, 8))
    assert not bp.grid_ball_blocked(empty, 1.0, 0.05)
    keep = np.arange(8) != 2
    broken = make_config(
        ring_config.x[keep], ring_config.y[keep], ring_config.r[keep],
        ring_config.window,
    )
    assert not bp.grid_ball_blocked(broken, 1.0, 0.05)


def test_surround_xor_escape_random():
    law = bp.ParetoTail(3.0, 1.0)
    win = bp.Rect(-16, -16, 16, 16)
    for s in range(40):
        cfg = bp.sample_configuration(law, 0.35, win, seed=s, pad=16.0)
        try:
            surround = bp.surrounding_component(cfg, 2.0) is not None
        except bp.WindowInsufficientError:
            continue
        blocked = bp.grid_ball_blocked(cfg, 2.0, 0.05)
        assert surround == blocked


def test_big_disc_count_arithmetic():
    # the count is over discs with radius >= r whose ring distance to the
    # origin (center norm minus radius) lies in (0, s]
    cfg = make_config(
        [3.0, 0.0, -4.0, 2.0, 10.0],
        [0.0, 7.0, -3.0, 0.0, 0.0],
        [1.0, 3.0, 1.5, 0.5, 2.0],
        bp.Rect(-16, -16, 16, 16),
    )
    # ring distances: 2, 4, 3.5, 1.5, 8
    assert bp.big_disc_count(cfg, 1.0, 4.0) == 3
    assert bp.two_big_discs_event(cfg, 1.0, 4.0)
    assert bp.big_disc_count(cfg, 2.6, 4.0) == 1
    assert not bp.two_big_discs_event(cfg, 2.6, 4.0)
    assert bp.big_disc_count(cfg, 1.0, 10.0) == 4


def test_big_disc_count_window_check():
    cfg = make_config([0.0], [0.0], [1.0], bp.Rect(-2, -2, 2, 2))
    with pytest.raises(bp.WindowInsufficientError):
        bp.big_disc_count(cfg, 0.5, 10.0)


def test_necklace_band_event(ring_config):
    # second radius is 1.2: the event holds exactly for bands containing it
    assert bp.necklace_band_event(ring_config, 1.0, 1.0, 2.0)
    assert not bp.necklace_band_event(ring_config, 1.0, 2.0, 4.0)
    assert not bp.necklace_band_event(ring_config, 1.0, 0.3, 0.9)
    empty = make_config([], [], [], bp.Rect(-8, -8, 8, 8))
    assert not bp.necklace_band_event(empty, 1.0, 0.5, 2.0)
