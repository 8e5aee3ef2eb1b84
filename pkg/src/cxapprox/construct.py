"""Precovers and preenvelopes of complexes built from module-level approximations.

Four constructions live here:

* ``componentwise_lift``: monic precovers (epic preenvelopes) assembled degree by
  degree, the differential induced through the monic components.
* ``bounded_precover`` / ``bounded_preenvelope``: induction on the support,
  each step splicing a resolvent of the next module on by a mapping cone.
* ``bounded_above_precover``: the tower of truncations ``X(0) -> X(1) -> ...``.
* ``tower_cover_candidate`` / ``tower_envelope_candidate``: the inverse tower of
  upper truncations ``Y^n`` with kernels ``T^n``.

Resolvents are infinite in general, so every construction works below a fixed
top degree (above a fixed bottom degree for the envelope side).  The degrees in
which the output is faithful form its ``window``; factorization tests must be
supported there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import ffla
from .algmod import (
    Module,
    ModuleMorphism,
    dualize,
    factor_through_epi,
    factor_through_mono,
    identity,
    lift_through,
    zero_morphism,
)
from .approx import (
    ApproximationError,
    ClassDescriptor,
    NotMonic,
    coresolvent,
    epic_preenvelope,
    member,
    monic_precover,
    resolvent,
    warn_if_not_extension_closed,
)
from .chaincx import (
    ChainMap,
    Complex,
    chain_map_space,
    compose_flat,
    cone,
    disk,
    dualize_chain_map,
    dualize_complex,
    extend_chain_map,
    hom_exactness,
    is_x_star,
    kernel_complex,
    cokernel_complex,
    lift_chain_map,
    shift,
    stalk,
    truncate_window,
    zero_complex,
    zero_map,
)


class NoLift(ApproximationError):
    """A lifting problem that should be solvable has no solution."""

    def __init__(self, symbol: str, degree: int | None = None, detail: str = ""):
        self.symbol = symbol
        self.degree = degree
        where = "" if degree is None else f" at degree {degree}"
        super().__init__(f"no lift for {symbol}{where}{': ' + detail if detail else ''}")


class WindowOverflow(ValueError):
    """The truncation depth cannot support the requested degrees."""


class NonStabilized(ValueError):
    """A tower was cut off before it could stabilize."""


class ConstructionError(RuntimeError):
    """A square recorded as commutative does not commute."""


def _mat(m) -> list:
    return np.asarray(m, dtype=np.int64).tolist()


# -- trace --------------------------------------------------------------------------


class ConstructionTrace:
    """Ordered log of the intermediate objects of one construction.

    Squares registered with :meth:`square` are re-verified by :meth:`finalize`.
    """

    def __init__(self, name: str):
        self.name = name
        self.steps: list[dict] = []
        self._squares: list[tuple[str, list, list]] = []
        self.finalized = False

    def record(self, symbol: str, kind: str, degree: int | None = None, **data) -> None:
        step = {"symbol": symbol, "kind": kind}
        if degree is not None:
            step["degree"] = int(degree)
        step.update(data)
        self.steps.append(step)

    def morphism(self, symbol: str, f: ModuleMorphism, degree: int | None = None) -> None:
        self.record(symbol, "morphism", degree, shape=list(f.mat.shape), matrix=_mat(f.mat))

    def complex(self, symbol: str, x: Complex) -> None:
        self.record(symbol, "complex", dims={str(n): d for n, d in x.dims().items()},
                    differentials={str(n): _mat(x.d(n).mat) for n in range(x.lo + 1, x.hi + 1)})

    def chain_map(self, symbol: str, f: ChainMap) -> None:
        self.record(symbol, "chain_map", components={str(n): _mat(f[n].mat) for n in f.degrees})
        for n in range(f.degrees.start, f.degrees.stop + 1):
            self.square(f"{symbol}:square[{n}]", [f[n - 1], f.source.d(n)], [f.target.d(n), f[n]], degree=n)

    def square(self, symbol: str, lhs: list[ModuleMorphism], rhs: list[ModuleMorphism], degree=None) -> None:
        """Register ``lhs[0] o lhs[1] o ... == rhs[0] o rhs[1] o ...``."""
        self._squares.append((symbol, lhs, rhs))
        self.record(symbol, "square", degree)

    def check(self, symbol: str, passed: bool, degree: int | None = None, **data) -> bool:
        self.record(symbol, "check", degree, passed=bool(passed), **data)
        return bool(passed)

    @staticmethod
    def _compose(path: list[ModuleMorphism]) -> np.ndarray:
        out = path[-1].mat
        p = path[-1].p
        for f in reversed(path[:-1]):
            out = ffla.matmul(f.mat, out, p)
        return out

    def failed_squares(self) -> list[str]:
        return [sym for sym, lhs, rhs in self._squares if not np.array_equal(self._compose(lhs), self._compose(rhs))]

    def finalize(self) -> "ConstructionTrace":
        bad = self.failed_squares()
        if bad:
            raise ConstructionError(f"{self.name}: squares do not commute: {', '.join(bad)}")
        self.finalized = True
        return self

    def checks(self) -> dict[str, bool]:
        out = {}
        for s in self.steps:
            if s["kind"] == "check":
                key = s["symbol"] if "degree" not in s else f"{s['symbol']}@{s['degree']}"
                out[key] = out.get(key, True) and s["passed"]
        return out

    def to_dict(self) -> dict:
        return {"name": self.name, "finalized": self.finalized, "squares": len(self._squares), "steps": self.steps}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass
class Construction:
    """Output of a construction: ``phi: d -> x`` (or ``x -> d`` on the envelope side)."""

    d: Complex
    phi: ChainMap
    kernels: list[Complex]
    trace: ConstructionTrace
    window: tuple[int, int]
    stage: object = None
    stages: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.d, self.phi, self.kernels, self.trace))

    def lift(self, beta: ChainMap, log: list | None = None) -> ChainMap:
        """Factor ``beta`` through ``phi`` by the construction's own recipe."""
        if self.stage is None:
            lifted = lift_chain_map(beta, self.phi)
            if lifted is None:
                raise NoLift("theta")
            return lifted
        return self.stage.lift(beta, log)


# -- module-level lifting ------------------------------------------------------------


def _lift(beta: ModuleMorphism, phi: ModuleMorphism, symbol: str, degree: int | None = None, log=None):
    theta = lift_through(beta, phi)
    if theta is None:
        raise NoLift(symbol, degree)
    if log is not None:
        log.append({"symbol": symbol, "degree": degree, "matrix": _mat(theta.mat)})
    return theta


def lift_through_precover(beta: ModuleMorphism, phi: ModuleMorphism, cls: ClassDescriptor) -> ModuleMorphism:
    """Canonical ``theta`` with ``phi o theta == beta``.

    Raises:
        ValueError: ``beta.source`` is not in the class.
        NoLift: no such ``theta``; ``phi`` is not a precover against this source.
    """
    if not member(cls, beta.source):
        raise ValueError("the source of beta is not in the class")
    return _lift(beta, phi, "theta")


def _stack(source: Module, target: Module, top: ModuleMorphism, bottom: ModuleMorphism) -> ModuleMorphism:
    return ModuleMorphism(source, target, np.vstack([top.mat, bottom.mat]), check=False)


def _check_window(a: Complex, top: int | None) -> None:
    if top is not None and not a.is_zero() and a.hi > top:
        raise WindowOverflow(f"test complex reaches degree {a.hi}, above the faithful top degree {top}")


def _resolvent_complex(res, degree: int, top: int, name: str) -> Complex:
    """Terms ``E_i`` of a resolvent placed in degrees ``degree + i``."""
    mods = {degree + i: e for i, e in enumerate(res.terms)}
    diffs = {degree + i: res.maps[i].mat for i in range(1, len(res.terms))}
    return Complex(res.target.algebra, mods, diffs, name=name, known_above=top, check=False)


class _BaseStage:
    """Resolvent of a single module sitting over its stalk."""

    def __init__(self, x: Complex, degree: int, res, top: int):
        self.x = x
        self.degree = degree
        self.res = res
        self.top = top
        self.d = _resolvent_complex(res, degree, top, name=f"E({x.name})")
        comps = {degree: res.maps[0]} if res.terms else {}
        self.phi = ChainMap(self.d, x, comps, check=True)

    def lift(self, beta: ChainMap, log=None) -> ChainMap:
        a = beta.source
        _check_window(a, self.top)
        j = self.degree
        theta: dict[int, ModuleMorphism] = {}

        def th(m):
            return theta.get(m) or zero_morphism(a.module(m), self.d.module(m))

        for m in a.degrees:
            if m < j:
                continue
            if m == j:
                theta[m] = _lift(beta[m], self.phi[j], "lambda", m, log)
            else:
                theta[m] = _lift(th(m - 1) @ a.d(m), self.d.d(m), "lambda", m, log)
        return ChainMap(a, self.d, theta, check=True)


class _TopStage:
    """One induction step: ``D(k+1) = cone(nu: E -> D(k))`` with ``E`` a resolvent of ``X_{k+1}``."""

    def __init__(self, prev, k: int, res, s: Complex, nu: ChainMap, d: Complex, phi: ChainMap, x: Complex, top: int):
        self.prev, self.k, self.res, self.s, self.nu = prev, k, res, s, nu
        self.d, self.phi, self.x, self.top = d, phi, x, top

    def lift(self, beta: ChainMap, log=None) -> ChainMap:
        a = beta.source
        _check_window(a, self.top)
        k, prev, D, C = self.k, self.prev, self.prev.d, self.d
        theta: dict[int, ModuleMorphism] = {}
        if not a.is_zero() and a.lo <= k:
            low = truncate_window(a, a.lo, k)
            beta_low = ChainMap(low, prev.x, {m: beta[m] for m in low.degrees}, check=False)
            t_low = prev.lift(beta_low, log)
            for m in low.degrees:
                theta[m] = ModuleMorphism(a.module(m), C.module(m), t_low[m].mat, check=False)

        def th(m):
            return theta.get(m) or zero_morphism(a.module(m), C.module(m))

        def low_th(m):
            # theta_m for m <= k viewed as a map into D(k)
            return ModuleMorphism(a.module(m), D.module(m), th(m).mat, check=False)

        e0 = self.s.module(k)
        t0_e = ModuleMorphism(e0, self.x.module(k + 1), self.res.maps[0].mat, check=False) if self.res.terms else None
        r = s = None
        for m in range(a.lo, a.hi + 1) if not a.is_zero() else []:
            if m <= k:
                continue
            am = a.d(m)
            if m == k + 1:
                r = _lift(beta[m], t0_e, "r", m, log) if t0_e is not None else _lift(beta[m], zero_morphism(e0, self.x.module(m)), "r", m, log)
                rhs = low_th(k) @ am - self.nu[k] @ r
                s = _lift(rhs, D.d(k + 1), "s", m, log)
                theta[m] = _stack(a.module(m), C.module(m), s, r)
            elif m == k + 2 and r is not None:
                t1 = self.s.d(k + 1)
                r1 = _lift(r @ am, t1, "r1", m, log)
                s1 = _lift(s @ am + self.nu[k + 1] @ r1, D.d(k + 2), "s1", m, log)
                theta[m] = _stack(a.module(m), C.module(m), s1, r1.scale(-1))
            else:
                theta[m] = _lift(th(m - 1) @ am, C.d(m), "theta", m, log)
        return ChainMap(a, C, theta, check=True)


class _BottomStage:
    """Tower step ``D^{n+1} = cone(nu: D^n[1] -> E)`` with ``E`` a resolvent of the new bottom module."""

    def __init__(self, prev, b: int, base: _BaseStage, nu: ChainMap, d: Complex, phi: ChainMap, x: Complex, top: int):
        self.prev, self.b, self.base, self.nu = prev, b, base, nu
        self.d, self.phi, self.x, self.top = d, phi, x, top

    def lift(self, beta: ChainMap, log=None) -> ChainMap:
        a = beta.source
        _check_window(a, self.top)
        b, E, C = self.b, self.base.d, self.d
        up = ChainMap(a, self.prev.x, {m: beta[m] for m in a.degrees if m > b}, check=False)
        alpha = self.prev.lift(up, log)
        e: dict[int, ModuleMorphism] = {}

        def ee(m):
            return e.get(m) or zero_morphism(a.module(m), E.module(m))

        theta = {}
        for m in a.degrees:
            if m < b:
                continue
            if m == b:
                e[m] = _lift(beta[m], self.base.phi[b], "r", m, log)
            else:
                rhs = ee(m - 1) @ a.d(m) - self.nu[m - 1] @ alpha[m]
                e[m] = _lift(rhs, E.d(m), "s", m, log)
            theta[m] = _stack(a.module(m), C.module(m), e[m], alpha[m])
        return ChainMap(a, C, theta, check=True)


class _ComponentwiseStage:
    def __init__(self, d: Complex, phi: ChainMap):
        self.d, self.phi = d, phi

    def lift(self, beta: ChainMap, log=None) -> ChainMap:
        a = beta.source
        theta = {}
        for m in a.degrees:
            th = factor_through_mono(beta[m], self.phi[m])
            if th is None:
                raise NoLift("theta", m)
            theta[m] = th
        return ChainMap(a, self.d, theta, check=True)


# -- componentwise lift -----------------------------------------------------------------


def componentwise_lift(x: Complex, cls: ClassDescriptor, mode: str = "monic-precover") -> Construction:
    """Monic precover (or epic preenvelope) of ``x`` built degreewise.

    Raises:
        NotMonic: some component has no monic precover (epic preenvelope) in the class.
        NoLift: the differential cannot be induced.
    """
    A = x.algebra
    trace = ConstructionTrace(f"componentwise_lift[{mode}]")
    comps, mods = {}, {}
    for n in x.degrees:
        try:
            f = monic_precover(cls, x.module(n)) if mode == "monic-precover" else epic_preenvelope(cls, x.module(n))
        except NotMonic as exc:
            raise NotMonic(f"degree {n}: {exc}") from None
        comps[n] = f
        mods[n] = f.source if mode == "monic-precover" else f.target
        trace.morphism("f", f, n)
    if mode not in ("monic-precover", "epic-preenvelope"):
        raise ValueError(f"unknown mode {mode!r}")
    lam = {}
    for n in x.degrees:
        if n - 1 not in comps:
            continue
        if mode == "monic-precover":
            h = factor_through_mono(x.d(n) @ comps[n], comps[n - 1])
        else:
            h = factor_through_epi(comps[n - 1] @ x.d(n), comps[n])
        if h is None:
            raise NoLift("lambda", n)
        lam[n] = h.mat
        trace.morphism("lambda", h, n)
    p = A.p
    lam_sq = all(not np.any(ffla.matmul(lam[n - 1], lam[n], p)) for n in lam if n - 1 in lam)
    trace.check("lambda^2=0", lam_sq)
    d = Complex(A, mods, lam, name="P" if mode == "monic-precover" else "E")
    if mode == "monic-precover":
        phi = ChainMap(d, x, comps)
        trace.check("monic", phi.is_monic())
    else:
        phi = ChainMap(x, d, comps)
        trace.check("epic", phi.is_epic())
    trace.chain_map("f", phi)
    trace.check("x_star", is_x_star(d, cls))
    trace.finalize()
    stage = _ComponentwiseStage(d, phi) if mode == "monic-precover" else None
    lo, hi = (x.lo, x.hi) if not x.is_zero() else (0, 0)
    return Construction(d, phi, [], trace, (lo - 1, hi + 1), stage=stage)


# -- bounded precover ----------------------------------------------------------------


def _exactness_checks(trace: ConstructionTrace, gens, l: Complex, degrees, symbol: str, into: bool = True) -> bool:
    ok = True
    for i, g in enumerate(gens):
        if into:
            flags = hom_exactness(g, l, degrees)
        else:
            dl = dualize_complex(l)
            flags = {-n: v for n, v in hom_exactness(dualize(g), dl, [-n for n in degrees]).items()}
        good = all(flags.values())
        trace.check(f"Hom-exact({symbol})", good, generator=i, degrees={str(n): v for n, v in sorted(flags.items())})
        ok &= good
    return ok


def bounded_precover(x: Complex, cls: ClassDescriptor, depth: int, cross_check: bool = True) -> Construction:
    """Precover of a bounded complex by induction on its support.

    ``depth`` counts the resolvent terms under the lowest module, so the output
    is faithful in degrees ``[x.lo, x.lo + depth - 1]``.

    Raises:
        WindowOverflow: ``depth`` does not reach the top of the support.
        NoLift: some induction step failed to factor.
    """
    A = x.algebra
    trace = ConstructionTrace("bounded_precover")
    if x.is_zero():
        z = zero_complex(A)
        trace.finalize()
        return Construction(z, zero_map(z, x), [], trace, (0, max(depth - 1, 0)))
    lo, hi = x.lo, x.hi
    top = lo + depth - 1
    if top < hi:
        raise WindowOverflow(f"depth {depth} reaches degree {top}, below the top of the support {hi}")
    gens = cls.generators(A)
    trace.record("window", "window", lo=lo, top=top)

    x0 = truncate_window(x, lo, lo)
    res0 = resolvent(cls, x.module(lo), top - lo)
    stage = _BaseStage(x0, lo, res0, top)
    trace.complex("D(0)", stage.d)
    trace.morphism("phi", stage.phi[lo], lo)
    if not res0.minimal:
        trace.record("E'", "note", lo, text="precover resolvent is not minimal")
    stages = [stage]
    kernels = []
    l0, _ = kernel_complex(stage.phi)
    kernels.append(l0)
    _exactness_checks(trace, gens, l0, range(lo, top), "L^0")

    for k in range(lo, hi):
        xk1 = x.module(k + 1)
        res = resolvent(cls, xk1, top - k - 1)
        s = _resolvent_complex(res, k, top, name=f"E({k + 1})")
        t0 = res.maps[0]
        ell = x.d(k + 1)
        bnu = ChainMap(s, stage.x, {k: ell @ t0}, check=True)
        log = []
        nu = stage.lift(bnu, log)
        for entry in log:
            trace.record(f"nu.{entry['symbol']}", "lift", entry["degree"], matrix=entry["matrix"])
        trace.chain_map("nu", nu)
        trace.square("(*)", [stage.phi[k], nu[k]], [ell, t0], degree=k)
        if cross_check:
            trace.check("nu:global-solve", lift_chain_map(bnu, stage.phi) is not None, k)
        c, _, ctrace = cone(nu, "chain")
        c = c.with_markers(known_above=top)
        for row in ctrace:
            trace.record("lambda", "cone", row["degree"], formula=row["formula"])
        xk = truncate_window(x, lo, k + 1)
        comps = {}
        for m in c.degrees:
            if m <= k:
                comps[m] = stage.phi[m].mat
            elif m == k + 1:
                dk1 = stage.d.module(k + 1).dim
                comps[m] = np.hstack([np.zeros((xk1.dim, dk1), dtype=np.int64), t0.mat])
        phi = ChainMap(c, xk, comps, check=True)
        trace.chain_map(f"phi({k + 1 - lo})", phi)
        stage = _TopStage(stage, k, res, s, nu, c, phi, xk, top)
        stages.append(stage)
        lk, _ = kernel_complex(phi)
        kernels.append(lk)
        # L^{k+1} in the splice degree is D_{k+1} + Ker t_0
        expect = stage.prev.d.module(k + 1).dim + (t0.source.dim - t0.rank())
        trace.check("L-shape", lk.module(k + 1).dim == expect, k + 1)
        _exactness_checks(trace, gens, lk, range(lo, top), f"L^{k + 1 - lo}")

    trace.check("x_star", is_x_star(stage.d, cls))
    trace.finalize()
    return Construction(stage.d, stage.phi, kernels, trace, (lo, top), stage=stage, stages=stages)


# -- bounded preenvelope ---------------------------------------------------------------


def _coresolvent_complex(res, degree: int, bottom: int, name: str) -> Complex:
    """Terms ``E^j`` of a coresolvent placed in degrees ``degree - j``."""
    mods = {degree - j: e for j, e in enumerate(res.terms)}
    diffs = {degree - j: res.maps[j + 1].mat for j in range(len(res.terms) - 1)}
    return Complex(res.target.algebra, mods, diffs, name=name, known_below=bottom, check=False)


def mutually_factor(f: ChainMap, g: ChainMap, side: str = "source") -> bool:
    """Whether ``f`` and ``g`` factor through each other.

    ``side="source"``: common target, maps ``f.source <-> g.source`` over it.
    ``side="target"``: common source, maps ``f.target <-> g.target`` under it.
    """
    if side == "source":
        return lift_chain_map(f, g) is not None and lift_chain_map(g, f) is not None
    return extend_chain_map(f, g) is not None and extend_chain_map(g, f) is not None


def bounded_preenvelope(x: Complex, cls: ClassDescriptor, depth: int, check_duality: bool = True) -> Construction:
    """Preenvelope of a bounded complex, inducting downward from its top degree.

    Faithful in degrees ``[x.hi - depth + 1, x.hi]``.  With ``check_duality`` the
    result is compared against the precover of the dual complex over the
    opposite algebra.
    """
    A = x.algebra
    trace = ConstructionTrace("bounded_preenvelope")
    if x.is_zero():
        z = zero_complex(A)
        trace.finalize()
        return Construction(z, zero_map(x, z), [], trace, (-max(depth - 1, 0), 0))
    lo, hi = x.lo, x.hi
    bottom = hi - depth + 1
    if bottom > lo:
        raise WindowOverflow(f"depth {depth} reaches degree {bottom}, above the bottom of the support {lo}")
    gens = cls.generators(A)
    trace.record("window", "window", bottom=bottom, hi=hi)

    res0 = coresolvent(cls, x.module(hi), hi - bottom)
    d = _coresolvent_complex(res0, hi, bottom, name="D(0)")
    xs = truncate_window(x, hi, hi)
    psi = ChainMap(xs, d, {hi: res0.maps[0]}, check=True)
    trace.complex("D(0)", d)
    cokernels = []
    l0, _ = cokernel_complex(psi)
    cokernels.append(l0)
    _exactness_checks(trace, gens, l0, range(bottom + 1, hi + 1), "L^0", into=False)

    for k in range(hi, lo, -1):
        xk1 = x.module(k - 1)
        res = coresolvent(cls, xk1, k - 1 - bottom)
        t = _coresolvent_complex(res, k, bottom, name=f"E({k - 1})")
        t0 = res.maps[0]
        ell = x.d(k)
        bnu = ChainMap(xs, t, {k: t0 @ ell}, check=True)
        nu = extend_chain_map(bnu, psi)
        if nu is None:
            raise NoLift("nu", k)
        trace.chain_map("nu", nu)
        trace.square("(*)", [nu[k], psi[k]], [t0, ell], degree=k)
        c, _, ctrace = cone(nu, "cochain")
        c = c.with_markers(known_below=bottom)
        for row in ctrace:
            trace.record("lambda", "cone", row["degree"], formula=row["formula"])
        xs = truncate_window(x, k - 1, hi)
        comps = {}
        for m in xs.degrees:
            if m >= k:
                comps[m] = psi[m].mat
            else:
                comps[m] = np.vstack([np.zeros((d.module(m).dim, xk1.dim), dtype=np.int64), t0.mat])
        psi = ChainMap(xs, c, comps, check=True)
        d = c
        trace.chain_map(f"phi({hi - k + 1})", psi)
        lk, _ = cokernel_complex(psi)
        cokernels.append(lk)
        _exactness_checks(trace, gens, lk, range(bottom + 1, hi + 1), f"L^{hi - k + 1}", into=False)

    trace.check("x_star", is_x_star(d, cls))
    out = Construction(d, psi, cokernels, trace, (bottom, hi))
    if check_duality:
        dx = dualize_complex(x)
        pre = bounded_precover(dx, cls.dual(), depth)
        dd = dualize_complex(d)
        dpsi = dualize_chain_map(psi, source=dd, target=dx)
        same_dims = pre.d.dims() == dd.dims()
        trace.check("duality:dims", same_dims, dims={str(n): v for n, v in dd.dims().items()})
        trace.check("duality:factor", mutually_factor(dpsi, pre.phi, "source"))
        out.extra["dual_precover"] = pre
    trace.finalize()
    return out


# -- towers ---------------------------------------------------------------------------------


def _inclusion_into_cone(d: Complex, c: Complex) -> ChainMap:
    comps = {}
    for m in d.degrees:
        n_extra = c.module(m).dim - d.module(m).dim
        comps[m] = np.vstack([ffla.identity(d.module(m).dim), np.zeros((n_extra, d.module(m).dim), dtype=np.int64)])
    return ChainMap(d, c, comps, check=True)


def bounded_above_precover(x: Complex, cls: ClassDescriptor, depth: int, tower_len: int) -> Construction:
    """Precover as the colimit of the tower of precovers of ``X(0) -> X(1) -> ...``.

    With finite support the tower is constant from stage ``x.hi - x.lo`` on.

    Raises:
        NonStabilized: ``tower_len`` is shorter than the support.
    """
    trace = ConstructionTrace("bounded_above_precover")
    if x.is_zero():
        out = bounded_precover(x, cls, depth)
        trace.record("stabilized", "tower", stage=0)
        out.trace = trace.finalize()
        return out
    lo, hi = x.lo, x.hi
    support = hi - lo + 1
    if tower_len < support:
        raise NonStabilized(f"tower of length {tower_len} cannot reach the support length {support}")
    full = bounded_precover(x, cls, depth)
    prev = None
    for n in range(tower_len):
        xn = truncate_window(x, lo, min(lo + n, hi))
        step = bounded_precover(xn, cls, depth, cross_check=False)
        ref = full.stages[min(n, support - 1)]
        trace.check("stage-agrees", step.d.to_dict() == ref.d.to_dict() and step.phi.to_dict() == ref.phi.to_dict(), n)
        if prev is not None:
            if n < support:
                iota = _inclusion_into_cone(prev.d, step.d)
                j = ChainMap(prev.phi.target, step.phi.target, {m: identity(prev.phi.target.module(m)) for m in prev.phi.target.degrees}, check=True)
                lhs, rhs = step.phi @ iota, j @ prev.phi
                trace.check("tower-commutes", lhs.to_dict() == rhs.to_dict(), n)
                # reconcile: re-lift j o phi(n-1) through stage n with the correction-term recipe
                log = []
                alpha = step.lift(j @ prev.phi, log)
                diff = alpha - iota
                trace.check("reconcile", (step.phi @ diff).is_zero(), n,
                            corrections=[e["symbol"] for e in log if e["symbol"] in ("r", "s", "r1", "s1")])
            else:
                trace.check("stable", step.d.to_dict() == prev.d.to_dict(), n)
        prev = step
    trace.record("stabilized", "tower", stage=support - 1)
    trace.check("x_star", is_x_star(full.d, cls))
    trace.finalize()
    return Construction(full.d, full.phi, full.kernels, trace, full.window, stage=full.stage, stages=full.stages,
                        extra={"stabilized_at": support - 1})


def generator_tests(cls: ClassDescriptor, algebra, lo: int, hi: int) -> list[Complex]:
    """Stalks and disks of the class generators supported in ``[lo, hi]``."""
    out = []
    for g in cls.generators(algebra):
        for n in range(lo, hi + 1):
            out.append(stalk(g, n))
        for n in range(lo + 1, hi + 1):
            out.append(disk(g, n))
    return out


def _surjective_on(space_src, f: ChainMap, tgt: Complex) -> tuple[bool, int, int]:
    """Whether postcomposition with ``f`` maps ``space_src`` onto all chain maps into ``tgt``."""
    want = chain_map_space(space_src.source, tgt).dim
    if space_src.dim == 0:
        return want == 0, 0, want
    _, rows = compose_flat(f, space_src)
    got = ffla.rank(rows, f.p) if rows.size else 0
    return got == want, got, want


def tower_cover_candidate(x: Complex, cls: ClassDescriptor, depth: int, tower_len: int | None = None) -> Construction:
    """Precover candidate from the inverse tower ``... -> Y^{n+1} -> Y^n``.

    ``Y^n`` keeps the degrees ``>= hi - n``; ``D^{n+1}`` extends ``D^n`` at the
    bottom by a cone on a resolvent of the new module, so that
    ``D_m = E^{m-b}_b + D^n_m``.  ``extra["wakamatsu"]`` records, per stage and
    generator test, whether ``Hom(S, T^{n+1}) -> Hom(S, T^n)`` is onto.
    """
    A = x.algebra
    warn_if_not_extension_closed(cls)
    trace = ConstructionTrace("tower_cover_candidate")
    if x.is_zero():
        z = zero_complex(A)
        trace.finalize()
        return Construction(z, zero_map(z, x), [], trace, (0, max(depth - 1, 0)), extra={"wakamatsu": [], "stabilized_at": 0})
    lo, hi = x.lo, x.hi
    top = lo + depth - 1
    if top < hi:
        raise WindowOverflow(f"depth {depth} reaches degree {top}, below the top of the support {hi}")
    support = hi - lo + 1
    tower_len = support if tower_len is None else tower_len
    if tower_len < support:
        raise NonStabilized(f"tower of length {tower_len} cannot reach the support length {support}")
    tests = generator_tests(cls, A, lo, top)

    y = truncate_window(x, hi, hi)
    stage = _BaseStage(y, hi, resolvent(cls, x.module(hi), top - hi), top)
    trace.complex("D^0", stage.d)
    t_prev, inc_prev = kernel_complex(stage.phi)
    kernels = [t_prev]
    report = []
    stages = [stage]
    for b in range(hi - 1, lo - 1, -1):
        n = hi - b
        res = resolvent(cls, x.module(b), top - b)
        base = _BaseStage(stalk(x.module(b), b), b, res, top)
        pshift = shift(stage.d, 1)
        ell = x.d(b + 1)
        u = ChainMap(pshift, base.x, {b: ell @ stage.phi[b + 1]}, check=True)
        log = []
        nu = base.lift(u, log)
        trace.chain_map(f"nu^{n}", nu)
        trace.check("nu:global-solve", lift_chain_map(u, base.phi) is not None, b)
        c, _, _ = cone(nu, "chain")
        c = c.with_markers(known_above=top)
        y_next = truncate_window(x, b, hi)
        comps, proj = {}, {}
        for m in c.degrees:
            em, dm = base.d.module(m).dim, stage.d.module(m).dim
            eps = res.maps[0].mat if m == b else np.zeros((x.module(m).dim, em), dtype=np.int64)
            comps[m] = np.hstack([eps, stage.phi[m].mat if dm else np.zeros((x.module(m).dim, 0), dtype=np.int64)])
            if dm:
                proj[m] = np.hstack([np.zeros((dm, em), dtype=np.int64), ffla.identity(dm)])
        phi = ChainMap(c, y_next, comps, check=True)
        q = ChainMap(c, stage.d, proj, check=True)
        trace.chain_map(f"phi^{n}", phi)
        trace.complex(f"D^{n}", c)
        t_next, inc_next = kernel_complex(phi)
        tmap = {}
        for m in t_next.degrees:
            h = factor_through_mono(q[m] @ inc_next[m], inc_prev[m])
            if h is None:
                raise NoLift("T-map", m)
            tmap[m] = h
        tq = ChainMap(t_next, t_prev, tmap, check=True)
        for i, s in enumerate(tests):
            ok, got, want = _surjective_on(chain_map_space(s, t_next), tq, t_prev)
            entry = {"stage": n, "test": i, "test_name": s.name, "epic": ok, "rank": got, "target_dim": want}
            report.append(entry)
            trace.check("wakamatsu", ok, n, test=i)
        stage = _BottomStage(stage, b, base, nu, c, phi, y_next, top)
        stages.append(stage)
        kernels.append(t_next)
        t_prev, inc_prev = t_next, inc_next
    for extra_stage in range(support, tower_len):
        trace.check("stable", True, extra_stage)
    trace.record("stabilized", "tower", stage=support - 1)
    trace.check("x_star", is_x_star(stage.d, cls))
    trace.finalize()
    return Construction(stage.d, stage.phi, kernels, trace, (lo, top), stage=stage, stages=stages,
                        extra={"wakamatsu": report, "stabilized_at": support - 1})


def tower_envelope_candidate(x: Complex, cls: ClassDescriptor, depth: int, tower_len: int | None = None,
                             check_agreement: bool = True) -> Construction:
    """Preenvelope candidate: the dual of :func:`tower_cover_candidate` over the opposite algebra."""
    dx = dualize_complex(x)
    dual = tower_cover_candidate(dx, cls.dual(), depth, tower_len)
    trace = ConstructionTrace("tower_envelope_candidate")
    d = dualize_complex(dual.d)
    psi = ChainMap(x, d, {-n: dual.phi[n].mat.T for n in dual.phi.degrees}, check=True)
    trace.chain_map("phi", psi)
    kernels = [dualize_complex(t) for t in dual.kernels]
    lo_w, top_w = dual.window
    out = Construction(d, psi, kernels, trace, (-top_w, -lo_w),
                       extra={"wakamatsu": dual.extra["wakamatsu"], "stabilized_at": dual.extra["stabilized_at"], "dual": dual})
    trace.check("x_star", is_x_star(d, cls))
    if check_agreement and not x.is_zero():
        env = bounded_preenvelope(x, cls, depth, check_duality=False)
        trace.check("agree:dims", env.d.dims() == d.dims())
        trace.check("agree:factor", mutually_factor(env.phi, psi, "target"))
    trace.finalize()
    return out
