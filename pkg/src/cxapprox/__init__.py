"""Approximations of chain complexes over finite-dimensional algebras.

Precovers, preenvelopes, cover and envelope candidates of complexes, built from
module-level approximations and certified by exact linear algebra over F_p.
"""

from __future__ import annotations

__version__ = "0.1.0"
