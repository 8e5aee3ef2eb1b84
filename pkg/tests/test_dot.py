from __future__ import annotations

import re

from cxapprox.approx import Projectives
from cxapprox.chaincx import chain_map_space, disk, lift_chain_map, stalk
from cxapprox.construct import bounded_precover
from cxapprox.dot import ladder, precover_ladder, preenvelope_ladder


def test_ladder_has_one_row_per_complex_and_dashed_lifts(ring):
    c = bounded_precover(disk(ring["k"], 1), Projectives(), 3)
    a = disk(ring["A2"], 1)
    beta = chain_map_space(a, c.phi.target).maps()[0]
    theta = lift_chain_map(beta, c.phi)
    src = precover_ladder(c.phi, beta, theta, title="precover")
    assert src.startswith("digraph ladder {") and src.rstrip().endswith("}")
    rows = re.findall(r"subgraph row(\d+)", src)
    assert rows == ["0", "1", "2"]
    dashed = [line for line in src.splitlines() if "style=dashed" in line]
    assert dashed and all("theta_" in line for line in dashed)
    # three degrees, three rows
    assert len(re.findall(r"^\s+r\d_-?\d+ \[label", src, flags=re.M)) == 9


def test_preenvelope_ladder_labels(ring):
    x = stalk(ring["k"], 0)
    f = chain_map_space(x, stalk(ring["A2"], 0)).maps()[0]
    src = preenvelope_ladder(f)
    assert 'label="phi_0"' in src
    assert "dashed" not in src


def test_zero_differentials_are_dotted(ring):
    x = stalk(ring["k"], 0)
    y = stalk(ring["k"], 1)
    src = ladder([("X", x), ("Y", y)], [])
    assert "style=dotted" in src
    assert 'label="X_0 (1)"' in src and 'label="Y_1 (1)"' in src
