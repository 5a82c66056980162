import numpy as np
import pytest

from boolperc import Configuration, Dirac, Rect


def make_config(x, y, r, window, law=None, lam=1.0, lam0=None, seed=0, pad=0.0):
    """Configuration from explicit disc arrays, for fixture geometries."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    return Configuration(
        x=x,
        y=y,
        r=r,
        ids=np.arange(len(r), dtype=np.uint64),
        window=window,
        lam=lam,
        lam0=lam if lam0 is None else lam0,
        law=law if law is not None else Dirac(float(r.max()) if len(r) else 1.0),
        seed=seed,
        pad=pad,
        missed_bound=0.0,
    )


@pytest.fixture
def ring_config():
    """Eight overlapping unit-ish discs on a circle: a clean annulus around 0."""
    ang = np.arange(8) * 2.0 * np.pi / 8.0
    return make_config(
        3.0 * np.cos(ang), 3.0 * np.sin(ang), np.full(8, 1.2), Rect(-8, -8, 8, 8)
    )
