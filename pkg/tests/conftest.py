import os
import sys
import time

import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

sys.path.insert(0, os.path.dirname(__file__))

from nprkit import shapes  # noqa: E402
from nprkit.mesh import build_mesh  # noqa: E402

_SESSION_START = time.perf_counter()
ACCEPTANCE_LINES: list[str] = []
SUITE_BUDGET_S = 60.0
GOLDEN = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")


def hull_mesh(points):
    """Closed, outward-oriented triangle mesh of the convex hull of ``points``."""
    pts = np.asarray(points, dtype=float)
    hull = ConvexHull(pts)
    used = np.unique(hull.simplices)
    remap = -np.ones(len(pts), dtype=int)
    remap[used] = np.arange(len(used))
    tris = remap[hull.simplices]
    p = pts[used]
    c = p.mean(0)
    for i, (a, b, d) in enumerate(tris):
        if np.cross(p[b] - p[a], p[d] - p[a]) @ (p[a] - c) < 0:
            tris[i] = (a, d, b)
    return build_mesh(p, tris)


@st.composite
def hull_points(draw, min_n=5, max_n=40):
    seed = draw(st.integers(0, 2**31 - 1))
    n = draw(st.integers(min_n, max_n))
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True) * rng.uniform(0.5, 2.0)


@pytest.fixture(scope="session")
def ico4():
    return shapes.icosphere(4)


@pytest.fixture(scope="session")
def ico3():
    return shapes.icosphere(3)


@pytest.fixture(scope="session")
def torus():
    return shapes.torus()


def pytest_terminal_summary(terminalreporter):
    elapsed = time.perf_counter() - _SESSION_START
    if not ACCEPTANCE_LINES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        tr.write_line(line)
    ok = elapsed < SUITE_BUDGET_S
    tr.write_line(
        f"{'PASS' if ok else 'FAIL'}  end-to-end determinism (suite runtime): {elapsed:.1f} s < {SUITE_BUDGET_S:.0f} s"
    )
