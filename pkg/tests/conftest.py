import numpy as np
import pytest

from spectral_billiards.geometry import CircularAnnulus, ConfocalAnnulus, Disk, Ellipse, Polygon, RadialLayers


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ALL_DOMAINS = [
    Disk(1.0),
    Ellipse(2.0, 1.0),
    CircularAnnulus(1.0, 0.3),
    ConfocalAnnulus(),
    Polygon(),
    Polygon(((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2))),
    RadialLayers((1.0, 0.6, 0.3), (1.0, 0.7, 1.3)),
]


def interior_points(domain, rng, n):
    x0, x1, y0, y1 = domain.bounding_box()
    pts = []
    while len(pts) < n:
        p = (x0 + (x1 - x0) * rng.random(), y0 + (y1 - y0) * rng.random())
        if domain.signed_distance(np.array(p)) > 1e-3:
            pts.append(p)
    return pts
