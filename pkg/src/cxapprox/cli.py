"""Command-line front end: read a JSON problem document, construct, verify, report.

Exit status: 0 when the construction succeeded and every requested check
passed, 1 when a verification produced a counterexample, 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from . import fixtures
from .algmod import (
    Algebra,
    AlgebraError,
    Module,
    ModuleError,
    MorphismError,
    direct_sum,
    injective_module,
    projective_module,
    regular_module,
    simple_module,
)
from .approx import AddClosure, ClassDescriptor, Injectives, Projectives, resolvent
from .chaincx import (
    ChainMap,
    Complex,
    ComplexError,
    chain_map_space,
    cone,
    extend_chain_map,
    lift_chain_map,
)
from .construct import (
    Construction,
    NoLift,
    NonStabilized,
    WindowOverflow,
    bounded_preenvelope,
    bounded_precover,
    tower_cover_candidate,
    tower_envelope_candidate,
)
from .dot import precover_ladder, preenvelope_ladder
from .verify import generate_tests, is_cover, is_envelope, is_precover, is_preenvelope

COMMANDS = (
    "resolve",
    "precover",
    "preenvelope",
    "cover-candidate",
    "envelope-candidate",
    "verify-precover",
    "verify-cover",
    "verify-preenvelope",
    "verify-envelope",
    "cone",
    "diagram",
)

DEFAULT_PARAMS = {"depth": 3, "tower_len": None, "seed": 0, "budget": 2**16, "tests": 20}


class InputError(Exception):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message, self.line, self.column = message, line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


def load_schema() -> dict:
    return json.loads(resources.files("cxapprox").joinpath("schema/problem.schema.json").read_text())


def locate(text: str, path) -> tuple[int, int]:
    """Line and column of the value at ``path`` (string keys are matched in order)."""
    pos = 0
    for key in path:
        if isinstance(key, str):
            i = text.find(json.dumps(key), pos)
            if i < 0:
                break
            pos = i
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _error_at(text: str, path, message: str) -> InputError:
    line, col = locate(text, path) if text else (None, None)
    return InputError(message, line, col)


def load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, exc.lineno, exc.colno) from None
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(load_schema()).iter_errors(doc))
    if err is not None:
        path = list(err.absolute_path)
        raise _error_at(text, path, f"{'/'.join(map(str, path)) or '<root>'}: {err.message}")
    return doc


# -- normal form ---------------------------------------------------------------------------


def _field(doc: dict) -> int:
    return int(doc["algebra"]["p"])


def _reduce(m, p: int):
    return (np.asarray(m, dtype=np.int64) % p).tolist() if np.asarray(m).size else m


def _degree_map(d: dict, fn=lambda v: v) -> dict:
    return {str(int(k)): fn(v) for k, v in sorted(d.items(), key=lambda kv: int(kv[0]))}


def normalize(doc: dict) -> dict:
    """Canonical form: defaults filled, entries reduced mod p, degree keys canonical."""
    p = _field(doc)
    alg = dict(doc["algebra"])
    if "builtin" not in alg:
        for key in ("mult", "radical", "idempotents", "unit"):
            alg[key] = _reduce(alg[key], p)
        alg.setdefault("name", "")
    mods = {}
    for name, spec in doc.get("modules", {}).items():
        spec = dict(spec)
        if "action" in spec:
            spec["action"] = _reduce(spec["action"], p)
        mods[name] = spec
    cxs = {}
    for name, spec in doc.get("complexes", {}).items():
        cxs[name] = {
            "modules": _degree_map(spec["modules"]),
            "differentials": _degree_map(spec.get("differentials", {}), lambda m: _reduce(m, p)),
        }
    maps = {}
    for name, spec in doc.get("maps", {}).items():
        maps[name] = {"source": spec["source"], "target": spec["target"],
                      "components": _degree_map(spec["components"], lambda m: _reduce(m, p))}
    params = dict(DEFAULT_PARAMS)
    params.update(doc.get("params", {}))
    cls = dict(doc["class"])
    return {"algebra": alg, "modules": mods, "class": cls, "complexes": cxs, "maps": maps, "params": params}


# -- parsing ---------------------------------------------------------------------------------


@dataclass
class Problem:
    doc: dict
    algebra: Algebra
    modules: dict
    cls: ClassDescriptor
    complexes: dict
    maps: dict
    params: dict


def _build_algebra(spec: dict) -> Algebra:
    kind = spec.get("builtin")
    if kind == "truncated_polynomial":
        return fixtures.truncated_polynomial(spec["p"], spec["n"])
    if kind == "path_algebra":
        return fixtures.path_algebra(spec["p"], spec["vertices"], [tuple(a) for a in spec["arrows"]])
    if kind == "semisimple":
        return fixtures.semisimple(spec["p"], spec["r"])
    return Algebra(spec["p"], spec["mult"], spec["unit"], spec["radical"], spec["idempotents"], name=spec.get("name", ""))


def _build_module(A: Algebra, name: str, spec: dict, built: dict) -> Module:
    kind = spec.get("builtin")
    if kind == "regular":
        m = regular_module(A)
    elif kind in ("simple", "projective", "injective"):
        if spec["vertex"] >= len(A.idempotents):
            raise ModuleError(f"vertex {spec['vertex']} out of range")
        m = {"simple": simple_module, "projective": projective_module, "injective": injective_module}[kind](A, spec["vertex"])
    elif "sum" in spec:
        m = direct_sum([built[n] for n in spec["sum"]], A)[0]
    else:
        m = Module(A, np.asarray(spec["action"], dtype=np.int64))
    return Module(A, m.action, name=name, check=False)


def parse(doc: dict, text: str = "") -> Problem:
    """Build every object of a schema-valid document; semantic failures become :class:`InputError`."""
    norm = normalize(doc)
    try:
        A = _build_algebra(norm["algebra"])
    except (AlgebraError, ValueError) as exc:
        raise _error_at(text, ["algebra"], f"algebra: {exc}") from None
    mods: dict[str, Module] = {}
    pending = dict(norm["modules"])
    while pending:
        progressed = False
        for name, spec in list(pending.items()):
            if "sum" in spec and any(n not in mods for n in spec["sum"]):
                missing = [n for n in spec["sum"] if n not in mods and n not in pending]
                if missing:
                    raise _error_at(text, ["modules", name], f"modules/{name}: unknown module {missing[0]!r}")
                continue
            try:
                mods[name] = _build_module(A, name, spec, mods)
            except (ModuleError, MorphismError, ValueError) as exc:
                raise _error_at(text, ["modules", name], f"modules/{name}: {exc}") from None
            del pending[name]
            progressed = True
        if not progressed:
            raise _error_at(text, ["modules"], "modules: cyclic sum definitions")
    cspec = norm["class"]
    if cspec["kind"] == "projectives":
        cls = Projectives()
    elif cspec["kind"] == "injectives":
        cls = Injectives()
    else:
        gens = cspec.get("generators", [])
        for g in gens:
            if g not in mods:
                raise _error_at(text, ["class", "generators"], f"class: unknown module {g!r}")
        if not gens:
            raise _error_at(text, ["class"], "class: add needs generators")
        cls = AddClosure([mods[g] for g in gens])
    cxs = {}
    for name, spec in norm["complexes"].items():
        try:
            ms = {}
            for n, mname in spec["modules"].items():
                if mname not in mods:
                    raise ModuleError(f"unknown module {mname!r}")
                ms[int(n)] = mods[mname]
            diffs = {}
            for n, mat in spec["differentials"].items():
                src, tgt = ms.get(int(n)), ms.get(int(n) - 1)
                if src is None or tgt is None:
                    raise ComplexError(f"differential {n} needs modules in degrees {n} and {int(n) - 1}")
                diffs[int(n)] = np.asarray(mat, dtype=np.int64).reshape(tgt.dim, src.dim)
            cxs[name] = Complex(A, ms, diffs, name=name)
        except (ModuleError, MorphismError, ComplexError, ValueError) as exc:
            raise _error_at(text, ["complexes", name], f"complexes/{name}: {exc}") from None
    maps = {}
    for name, spec in norm["maps"].items():
        try:
            for end in ("source", "target"):
                if spec[end] not in cxs:
                    raise ComplexError(f"unknown complex {spec[end]!r}")
            src, tgt = cxs[spec["source"]], cxs[spec["target"]]
            comps = {int(n): np.asarray(m, dtype=np.int64).reshape(tgt.module(int(n)).dim, src.module(int(n)).dim)
                     for n, m in spec["components"].items()}
            maps[name] = ChainMap(src, tgt, comps)
        except (MorphismError, ComplexError, ValueError) as exc:
            raise _error_at(text, ["maps", name], f"maps/{name}: {exc}") from None
    params = norm["params"]
    for key, table in (("complex", cxs), ("map", maps), ("module", mods)):
        if key in params and params[key] not in table:
            raise _error_at(text, ["params", key], f"params/{key}: unknown name {params[key]!r}")
    return Problem(norm, A, mods, cls, cxs, maps, params)


def serialize(problem: Problem) -> dict:
    """Document regenerated from the parsed objects."""
    norm = problem.doc
    alg = dict(norm["algebra"])
    if "builtin" not in alg:
        alg = {**problem.algebra.to_dict(), "name": alg.get("name", "")}
    mods = {}
    for name, spec in norm["modules"].items():
        mods[name] = {"action": problem.modules[name].action.tolist()} if "action" in spec else dict(spec)
    cxs = {}
    for name, spec in norm["complexes"].items():
        x = problem.complexes[name]
        cxs[name] = {"modules": dict(spec["modules"]),
                     "differentials": {n: x.d(int(n)).mat.tolist() for n in spec["differentials"]}}
    maps = {}
    for name, spec in norm["maps"].items():
        f = problem.maps[name]
        maps[name] = {"source": spec["source"], "target": spec["target"],
                      "components": {n: f[int(n)].mat.tolist() for n in spec["components"]}}
    return {"algebra": alg, "modules": mods, "class": dict(norm["class"]), "complexes": cxs, "maps": maps,
            "params": dict(norm["params"])}


# -- commands ----------------------------------------------------------------------------


def _need(problem: Problem, key: str, table: dict):
    name = problem.params.get(key)
    if name is None:
        raise InputError(f"params/{key} is required for this command")
    return table[name]


def _summary(c: Construction) -> dict:
    return {
        "dims": {str(n): v for n, v in c.d.dims().items()},
        "differentials": {str(n): c.d.d(n).mat.tolist() for n in range(c.d.lo + 1, c.d.hi + 1)},
        "phi": c.phi.to_dict(),
        "window": list(c.window),
        "checks": c.trace.checks(),
    }


def _window_of(*xs: Complex) -> tuple[int, int]:
    live = [x for x in xs if not x.is_zero()]
    if not live:
        return (0, 0)
    return (min(x.lo for x in live), max(x.hi for x in live))


def _first_lift(c: Construction, tests, side: str):
    """A nonzero test map and its lift, for diagrams."""
    for t in tests:
        if side == "precover":
            space = chain_map_space(t, c.phi.target)
            if space.dim:
                beta = space.maps()[0]
                return beta, lift_chain_map(beta, c.phi)
        else:
            space = chain_map_space(c.phi.source, t)
            if space.dim:
                beta = space.maps()[0]
                return beta, extend_chain_map(beta, c.phi)
    return None, None


def run(command: str, problem: Problem) -> tuple[int, dict, str | None]:
    """Execute one command; returns ``(exit status, report, dot source or None)``."""
    P = problem.params
    A, cls = problem.algebra, problem.cls
    report: dict = {"command": command, "class": cls.describe(), "params": P}
    dot = None
    ok = True
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if command == "resolve":
            m = _need(problem, "module", problem.modules)
            res = resolvent(cls, m, P["depth"])
            flags = {f"G{i}": res.hom_exact(g) for i, g in enumerate(cls.generators(A))}
            report["resolvent"] = {"terms": [e.dim for e in res.terms], "kernels": [k.dim for k, _ in res.kernels],
                                   "minimal": res.minimal, "hom_exact": flags}
            ok = all(all(v) for v in flags.values())
        elif command in ("precover", "cover-candidate", "diagram"):
            x = _need(problem, "complex", problem.complexes)
            if command == "cover-candidate":
                c = tower_cover_candidate(x, cls, P["depth"], P["tower_len"])
                report["wakamatsu"] = c.extra["wakamatsu"]
            else:
                c = bounded_precover(x, cls, P["depth"])
            tests = generate_tests(cls, c.window, P["tests"], P["seed"], A)
            rep = is_precover(c.phi, tests, cls, family=f"generate_tests(window={list(c.window)}, count={P['tests']}, seed={P['seed']})")
            report["construction"] = _summary(c)
            report["verification"] = [rep.to_dict()]
            ok = rep.passed and all(c.trace.checks().values())
            if command == "cover-candidate":
                cov = is_cover(c.phi, P["budget"], P["seed"])
                report["verification"].append(cov.to_dict())
                ok = ok and cov.passed
            report["trace"] = c.trace.to_dict()
            beta, theta = _first_lift(c, tests, "precover")
            dot = precover_ladder(c.phi, beta, theta, title=f"{command} of {x.name}")
        elif command in ("preenvelope", "envelope-candidate"):
            x = _need(problem, "complex", problem.complexes)
            if command == "envelope-candidate":
                c = tower_envelope_candidate(x, cls, P["depth"], P["tower_len"])
                report["wakamatsu"] = c.extra["wakamatsu"]
            else:
                c = bounded_preenvelope(x, cls, P["depth"])
            tests = generate_tests(cls, c.window, P["tests"], P["seed"], A)
            rep = is_preenvelope(c.phi, tests, cls, family=f"generate_tests(window={list(c.window)}, count={P['tests']}, seed={P['seed']})")
            report["construction"] = _summary(c)
            report["verification"] = [rep.to_dict()]
            ok = rep.passed and all(c.trace.checks().values())
            if command == "envelope-candidate":
                env = is_envelope(c.phi, P["budget"], P["seed"])
                report["verification"].append(env.to_dict())
                ok = ok and env.passed
            report["trace"] = c.trace.to_dict()
            beta, g = _first_lift(c, tests, "preenvelope")
            dot = preenvelope_ladder(c.phi, beta, g, title=f"{command} of {x.name}")
        elif command in ("verify-precover", "verify-preenvelope"):
            f = _need(problem, "map", problem.maps)
            window = tuple(P["window"]) if "window" in P else _window_of(f.source, f.target)
            tests = generate_tests(cls, window, P["tests"], P["seed"], A)
            family = f"generate_tests(window={list(window)}, count={P['tests']}, seed={P['seed']})"
            if command == "verify-precover":
                rep = is_precover(f, tests, cls, family=family, subject=P["map"])
                dot = precover_ladder(f)
            else:
                rep = is_preenvelope(f, tests, cls, family=family, subject=P["map"])
                dot = preenvelope_ladder(f)
            report["verification"] = [rep.to_dict()]
            ok = rep.passed
        elif command in ("verify-cover", "verify-envelope"):
            f = _need(problem, "map", problem.maps)
            check = is_cover if command == "verify-cover" else is_envelope
            rep = check(f, P["budget"], P["seed"], subject=P["map"])
            report["verification"] = [rep.to_dict()]
            ok = rep.passed
            dot = precover_ladder(f) if command == "verify-cover" else preenvelope_ladder(f)
        elif command == "cone":
            f = _need(problem, "map", problem.maps)
            c, _, ctrace = cone(f, "chain")
            report["cone"] = c.to_dict()
            report["trace"] = ctrace
        else:
            raise InputError(f"unknown command {command!r}")
    report["warnings"] = sorted({str(w.message) for w in caught})
    report["status"] = "ok" if ok else "counterexample"
    return (0 if ok else 1), report, dot


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cxapprox", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("document", help="problem document (JSON); '-' reads stdin")
    ap.add_argument("--depth", type=int)
    ap.add_argument("--tower-len", type=int, dest="tower_len")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--budget", type=int)
    ap.add_argument("--tests", type=int)
    ap.add_argument("--complex", help="name of the complex to use")
    ap.add_argument("--map", help="name of the chain map to use")
    ap.add_argument("--module", help="name of the module to use")
    ap.add_argument("--dot", metavar="PATH", help="write a ladder diagram in DOT format")
    ap.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = sys.stdin.read() if args.document == "-" else open(args.document, encoding="utf-8").read()
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    try:
        doc = load_document(text)
        for key in ("depth", "tower_len", "seed", "budget", "tests", "complex", "map", "module"):
            val = getattr(args, key)
            if val is not None:
                doc.setdefault("params", {})[key] = val
        problem = parse(doc, text)
        status, report, dot = run(args.command, problem)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (WindowOverflow, NonStabilized, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except NoLift as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return 1
    out = dumps(report)
    # `diagram` without --dot prints the DOT source; the report then only goes to --out
    dot_to_stdout = args.command == "diagram" and not args.dot
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    elif not dot_to_stdout:
        sys.stdout.write(out)
    if dot_to_stdout:
        sys.stdout.write(dot or "")
    elif args.dot and dot is not None:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
    return status


if __name__ == "__main__":
    sys.exit(main())
