import itertools

import numpy as np
import pytest

from removal_lab.fpn import GroupParams
from removal_lab.triangles import TripleSystem


def random_system(p, n, seed, density=None):
    """Independent Bernoulli subsets X, Y, Z of F_p^n."""
    rng = np.random.default_rng(seed)
    params = GroupParams(p, n)
    if density is None:
        density = rng.uniform(0.05, 0.95)
    masks = rng.random((3, params.N)) < density
    return TripleSystem.from_indices(params, *(np.flatnonzero(m) for m in masks))


def vec(params, u):
    """Coordinates of u as a tuple, computed with plain integer division."""
    out = []
    for _ in range(params.n):
        out.append(u % params.p)
        u //= params.p
    return tuple(out)


def unvec(params, coords):
    return sum(c * params.p**i for i, c in enumerate(coords))


def brute_triangles(sys):
    """Triangles by direct coordinate arithmetic, independent of the library kernels."""
    params = sys.params
    p = params.p
    zs = set(int(z) for z in sys.Z.members)
    out = []
    for x in sys.X.members:
        vx = vec(params, int(x))
        for y in sys.Y.members:
            vy = vec(params, int(y))
            z = unvec(params, tuple((-a - b) % p for a, b in zip(vx, vy)))
            if z in zs:
                out.append((int(x), int(y), z))
    return out


def brute_min_deletion(sys):
    """Smallest hitting set of the triangle hypergraph by enumerating subsets by size."""
    tris = brute_triangles(sys)
    if not tris:
        return 0
    verts = sorted({(r, t[i]) for t in tris for i, r in enumerate("XYZ")})
    for k in range(1, len(verts) + 1):
        for combo in itertools.combinations(verts, k):
            s = set(combo)
            if all(("X", x) in s or ("Y", y) in s or ("Z", z) in s for x, y, z in tris):
                return k
    raise AssertionError("unreachable")


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.delenv("REMOVAL_LAB_OUT", raising=False)
    return tmp_path


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
