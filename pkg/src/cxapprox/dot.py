"""Graphviz ladder diagrams: one row per complex, one column per degree."""

from __future__ import annotations

from .chaincx import ChainMap, Complex


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def ladder(rows: list[tuple[str, Complex]], arrows: list[tuple[str, int, int, ChainMap, bool]], title: str = "") -> str:
    """DOT source for a ladder diagram.

    Args:
        rows: ``(symbol, complex)`` pairs, drawn top to bottom.
        arrows: ``(symbol, from_row, to_row, chain_map, dashed)``; dashed marks constructed lifts.
    """
    degrees = sorted({n for _, x in rows for n in x.degrees})
    lines = ["digraph ladder {", "  rankdir=LR;", "  node [shape=plaintext];"]
    if title:
        lines.append(f"  label={_quote(title)};")
    for r, (sym, x) in enumerate(rows):
        lines.append(f"  subgraph row{r} {{ rank=same;")
        for n in degrees:
            lines.append(f"    r{r}_{n} [label={_quote(f'{sym}_{n} ({x.module(n).dim})')}];")
        lines.append("  }")
    for r, (sym, x) in enumerate(rows):
        for n in degrees[1:]:
            style = "" if not x.d(n).is_zero() else ", style=dotted"
            lines.append(f"  r{r}_{n} -> r{r}_{n - 1} [label={_quote(f'd_{n}')}{style}];")
    for sym, i, j, f, dashed in arrows:
        for n in degrees:
            if f.source.module(n).dim == 0 or f.target.module(n).dim == 0:
                continue
            style = ", style=dashed" if dashed else ""
            lines.append(f"  r{i}_{n} -> r{j}_{n} [label={_quote(f'{sym}_{n}')}, constraint=false{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def precover_ladder(phi: ChainMap, beta: ChainMap | None = None, theta: ChainMap | None = None, title: str = "") -> str:
    """``D -> X`` with an optional test map ``beta: A -> X`` and its lift ``theta: A -> D``."""
    rows = [("D", phi.source), ("X", phi.target)]
    arrows = [("phi", 0, 1, phi, False)]
    if beta is not None:
        rows.append(("A", beta.source))
        arrows.append(("beta", 2, 1, beta, False))
        if theta is not None:
            arrows.append(("theta", 2, 0, theta, True))
    return ladder(rows, arrows, title)


def preenvelope_ladder(psi: ChainMap, beta: ChainMap | None = None, g: ChainMap | None = None, title: str = "") -> str:
    """``X -> D`` with an optional test map ``beta: X -> A`` and its extension ``g: D -> A``."""
    rows = [("X", psi.source), ("D", psi.target)]
    arrows = [("phi", 0, 1, psi, False)]
    if beta is not None:
        rows.append(("A", beta.target))
        arrows.append(("beta", 0, 2, beta, False))
        if g is not None:
            arrows.append(("theta", 1, 2, g, True))
    return ladder(rows, arrows, title)
