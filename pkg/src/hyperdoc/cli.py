"""``hyperdoc`` command line driver.

Exit codes: 0 when every check passes, 1 on a semantic failure, 2 on usage,
parse or unknown-id errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import constructions as C
from . import fixtures
from .doctrine import (MissingWitness, check_morphism, check_rich, check_structure, consistency_status,
                       describe, is_fiber_iso, is_isomorphism)
from .fincat import StructuralError
from .io import DocumentError, dump, parse_doctrine, serialize_doctrine
from .model import (ModelError, NotRichError, henkin_model_pipeline, model_preservation, preserved_laws,
                    quotient_by_filter)
from .order import FilterError, OrderError, classify_filter, extend_to_ultrafilter, generated_filter

FIXTURES = {
    "subsets": fixtures.gen_subset_doctrine,
    "subsets-empty": lambda: fixtures.gen_subset_doctrine(carriers=((), ("*",), (0, 1)), allow_empty=True),
    "chain": fixtures.gen_chain_fixture,
    "thin": fixtures.gen_thin_fixture,
    "cube": fixtures.gen_bool_point,
    "antichain": fixtures.gen_antichain_fixture,
    "trivial": fixtures.gen_trivial_doctrine,
}


class UsageError(Exception):
    pass


class Report:
    def __init__(self, argv):
        self.doc = {"command": list(argv), "inputs": {}, "checks": [], "result": {}}
        self.t0 = time.perf_counter()

    def input(self, path, data: bytes):
        self.doc["inputs"][path] = hashlib.sha256(data).hexdigest()

    def check(self, name, ok: bool, **details):
        self.doc["checks"].append({"name": name, "status": "pass" if ok else "fail", **details})

    @property
    def ok(self) -> bool:
        return all(c["status"] == "pass" for c in self.doc["checks"])

    def render(self, fmt: str) -> str:
        self.doc["status"] = "pass" if self.ok else "fail"
        if fmt == "structured":
            return json.dumps(self.doc, sort_keys=True, indent=1, default=_plain) + "\n"
        lines = [f"{self.doc['status'].upper()}  {' '.join(self.doc['command'])}"]
        for p, h in sorted(self.doc["inputs"].items()):
            lines.append(f"  input {p} sha256:{h[:16]}")
        for c in self.doc["checks"]:
            extra = {k: v for k, v in c.items() if k not in ("name", "status")}
            tail = "  " + json.dumps(extra, sort_keys=True, default=_plain) if extra else ""
            lines.append(f"  [{c['status']}] {c['name']}{tail}")
        for k, v in sorted(self.doc["result"].items()):
            lines.append(f"  {k}: {json.dumps(v, sort_keys=True, default=_plain)}")
        lines.append(f"  time {time.perf_counter() - self.t0:.2f}s")
        return "\n".join(lines) + "\n"


def _plain(x):
    if hasattr(x, "tolist"):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    return str(x)


def _load(rep: Report, path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    rep.input(path, data)
    return parse_doctrine(data.decode("utf-8"))


def _write(P, path, rep: Report):
    if path:
        dump(P, path)
        rep.doc["result"]["written"] = path


def _struct_check(rep, P, layers=None, label="structure"):
    r = check_structure(P, layers)
    cx = r.counterexamples()
    rep.check(label, r.ok, layers=r.summary(), counterexamples=[describe(P, c) for c in cx[:20]])
    return r


def _morph_check(rep, m, layers, label="morphism"):
    r = check_morphism(m, sorted(layers))
    rep.check(label, r.ok, layers=r.summary())
    return r


# -- commands ------------------------------------------------------------------------------

def cmd_check(a, rep):
    P = _load(rep, a.file)
    _struct_check(rep, P, a.layers or None)
    if a.rich:
        rr = check_rich(P)
        rep.check("rich", rr.rich, failures=[[P.base.objects[o], P.fibers[o].elements[s]] for o, s in rr.failures])
    rep.doc["result"]["consistency"] = consistency_status(P, cross_check=False)


def _construct(P, op, args):
    if op == "add-constant":
        (X,) = args
        Q, m = C.add_constant(P, X)
        return Q, m, {"sort": X}
    if op == "add-axiom":
        (phi,) = args
        Q, m = C.add_axiom(P, phi)
        return Q, m, {"axiom": phi}
    if op == "henkin":
        B, phi = args
        Q, m, step = C.henkin_step(P, B, phi)
        b0 = P.base.obj(B)
        holds, eq = C.henkin_postcondition(Q, m, m.src.base.obj(P.base.objects[b0]),
                                           P.fibers[b0].el(phi), Q.meta["constant"])
        return Q, m, {"psi": step.psi, "constant": step.constant, "label": list(step.label),
                      "witness_inequality": holds, "witness_equality": eq}
    if op == "notnot":
        Q, m = C.double_negation_fragment(P)
        return Q, m, {}
    raise UsageError(f"unknown construction {op}")


_ARITY = {"add-constant": 1, "add-axiom": 1, "henkin": 2, "notnot": 0}


def cmd_construct(a, rep):
    P = _load(rep, a.file)
    if len(a.args) != _ARITY[a.op]:
        raise UsageError(f"{a.op} takes {_ARITY[a.op]} argument(s)")
    Q, m, info = _construct(P, a.op, a.args)
    _struct_check(rep, Q)
    _morph_check(rep, m, m.preserved_layers)
    info["isomorphism"] = is_isomorphism(m) if m.src is P else False
    info["fiber_isomorphism"] = is_fiber_iso(m)
    info["consistency"] = consistency_status(Q, cross_check=False)
    if a.op == "henkin":
        rep.check("witness_inequality", info["witness_inequality"])
    rep.doc["result"].update(info)
    rep.doc["result"]["fiber_sizes"] = {Q.base.objects[i]: len(f) for i, f in enumerate(Q.fibers)}
    _write(Q, a.out, rep)


def cmd_saturate(a, rep):
    P = _load(rep, a.file)
    targets = "all" if not a.target else [tuple(t) for t in a.target]
    S, m, tr = C.henkin_saturate(P, targets, a.budget)
    cov = C.saturation_coverage(P, S, m, tr)
    covered = [k for k, v in cov.items() if v is not None and (targets == "all" or k in targets)]
    wanted = [k for k in cov if targets == "all" or k in targets]
    rep.doc["result"].update({
        "steps": [{"sort": s.sort, "phi": s.phi, "label": list(s.label), "psi": s.psi} for s in tr.steps],
        "truncated": tr.truncated, "dropped": [list(d) for d in tr.dropped],
        "statuses": tr.statuses, "covered": len(covered), "targets": len(wanted),
    })
    _struct_check(rep, S)
    _morph_check(rep, m, m.preserved_layers)
    _write(S, a.out, rep)


def cmd_ultrafilter(a, rep):
    P = _load(rep, a.file)
    t = P.base.terminal
    L = P.ops[t]
    F = generated_filter(L, [P.fibers[t].el(x) for x in a.generators])
    cls = classify_filter(L, F)
    rep.doc["result"]["filter"] = F.names()
    rep.doc["result"]["classification"] = cls
    if not cls["proper"]:
        rep.check("proper", False)
        return
    U = extend_to_ultrafilter(L, F)
    cu = classify_filter(L, U)
    rep.doc["result"]["ultrafilter"] = U.names()
    rep.check("ultra", bool(cu["ultra"]) and cu["proper"])
    rep.check("ultra_iff_maximal", bool(cu["ultra_iff_maximal"]))


def cmd_quotient(a, rep):
    P = _load(rep, a.file)
    t = P.base.terminal
    F = generated_filter(P.ops[t], [P.fibers[t].el(x) for x in a.filter])
    qp = quotient_by_filter(P, F)
    _struct_check(rep, qp.result)
    _morph_check(rep, qp.q, P.layers)
    rep.doc["result"].update({
        "filter": qp.filter.names(),
        "isomorphism": is_isomorphism(qp.q),
        "consistency": consistency_status(qp.result, cross_check=False),
        "fiber_sizes": {P.base.objects[i]: len(f) for i, f in enumerate(qp.result.fibers)},
    })
    _write(qp.result, a.out, rep)


def cmd_model(a, rep):
    P = _load(rep, a.file)
    filt = None if a.filter in (None, ["greedy"]) else a.filter
    try:
        M, tr = henkin_model_pipeline(P, budget=a.budget, elementary=True if a.elementary else None, filter=filt)
    except ModelError as exc:
        extra = {"uncovered": [list(u) for u in exc.uncovered]} if isinstance(exc, NotRichError) else {}
        rep.check("pipeline", False, error=f"{type(exc).__name__}: {exc}", **extra)
        return
    rep.check("pipeline", True)
    pres = model_preservation(M)
    for law in preserved_laws(M):
        rep.check(f"preserves_{law}", not pres[law], failures=len(pres[law]))
    if M.mode == "elementary":
        rep.doc["result"]["diagonal"] = "interp(delta) = diagonal" if not pres["delta"] else "FAILED"
    ok = all(v == 0 for k, v in tr.report["morphism"].items())
    rep.check("model_morphism", ok, layers=tr.report["morphism"])
    cat = M.doctrine.base
    rep.doc["result"]["model"] = {
        "mode": M.mode,
        "carriers": {k: list(v) for k, v in M.carrier.items()},
        "actions": {k: list(v) for k, v in M.action.items()} if len(M.action) <= 64 else "omitted",
        "interp": {cat.objects[o]: {M.doctrine.fibers[o].elements[x]: sorted(s)
                                    for x, s in enumerate(M.interp[cat.objects[o]])}
                   for o in range(len(cat.objects))},
    }
    rep.doc["result"]["filter"] = tr.filter
    rep.doc["result"]["steps"] = len(tr.saturation.steps) if tr.saturation else 0


def _parse_step(s):
    parts = s.split(":")
    op, args = parts[0], parts[1:]
    if op not in _ARITY or len(args) != _ARITY[op]:
        raise UsageError(f"bad step {s!r}; use add-constant:X, add-axiom:PHI, henkin:B:PHI or notnot")
    return op, args


def cmd_colimit(a, rep):
    P = _load(rep, a.file)
    ms, cur = [], P
    for s in a.steps:
        op, args = _parse_step(s)
        Q, m, _ = _construct(cur, op, args)
        if m.src is not cur:
            rep.check("chain", False, error=f"step {s} drops objects; the chain does not compose")
            return
        ms.append(m)
        cur = Q
    if not ms:
        ms = []
        d = C.FiniteDirectedDiagram([P], [[True]], {(0, 0): C.identity_morphism(P)}, "one")
    else:
        d = C.chain_diagram(ms)
    col = C.directed_colimit(d)
    mx = d.maximum()
    rep.check("leg_at_maximum_is_iso", is_isomorphism(col.cocone[mx]))
    _struct_check(rep, col.doctrine, label="colimit_structure")
    rep.doc["result"].update({
        "nodes": len(d.nodes), "maximum": mx,
        "object_classes": [len(g) for g in col.object_classes],
        "fiber_sizes": [len(f) for f in col.doctrine.fibers],
    })
    _write(col.doctrine, a.out, rep)


def cmd_gen(a, rep):
    P = FIXTURES[a.name]()
    rep.doc["result"]["fixture"] = a.name
    if a.out:
        _write(P, a.out, rep)
    else:
        sys.stdout.write(serialize_doctrine(P))


COMMANDS = {"check": cmd_check, "construct": cmd_construct, "saturate": cmd_saturate, "ultrafilter": cmd_ultrafilter,
            "quotient": cmd_quotient, "model": cmd_model, "colimit": cmd_colimit, "gen": cmd_gen}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperdoc", description="Check and build finite doctrines.")
    ap.add_argument("--format", choices=("text", "structured"), default="text")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="verify structure laws")
    p.add_argument("file")
    p.add_argument("--layers", nargs="+")
    p.add_argument("--rich", action="store_true", help="also check richness")

    p = sub.add_parser("construct", help="add-constant X | add-axiom PHI | henkin B PHI | notnot")
    p.add_argument("file")
    p.add_argument("op", choices=sorted(_ARITY))
    p.add_argument("args", nargs="*")
    p.add_argument("--out")

    p = sub.add_parser("saturate", help="fold Henkin steps")
    p.add_argument("file")
    p.add_argument("--budget", type=int)
    p.add_argument("--target", nargs=2, action="append", metavar=("OBJ", "ELEM"))
    p.add_argument("--out")

    p = sub.add_parser("ultrafilter", help="classify a generated filter and extend it")
    p.add_argument("file")
    p.add_argument("generators", nargs="*")

    p = sub.add_parser("quotient", help="quotient by the filter generated by elements of the terminal fiber")
    p.add_argument("file")
    p.add_argument("--filter", nargs="+", required=True)
    p.add_argument("--out")

    p = sub.add_parser("model", help="run the Henkin model pipeline")
    p.add_argument("file")
    p.add_argument("--budget", type=int)
    p.add_argument("--elementary", action="store_true")
    p.add_argument("--filter", nargs="+", help="'greedy' or element names generating the ultrafilter")

    p = sub.add_parser("colimit", help="colimit of a chain of constructions")
    p.add_argument("file")
    p.add_argument("steps", nargs="*", help="add-constant:X add-axiom:PHI henkin:B:PHI notnot")
    p.add_argument("--out")

    p = sub.add_parser("gen", help="write a canned fixture document")
    p.add_argument("name", choices=sorted(FIXTURES))
    p.add_argument("--out")
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rep = Report(["hyperdoc"] + argv)
    try:
        COMMANDS[a.command](a, rep)
    except (MissingWitness, FilterError, C.ConstructionError, ModelError) as exc:
        rep.check("run", False, error=f"{type(exc).__name__}: {exc}")
    except (UsageError, DocumentError, StructuralError, OrderError) as exc:
        print(f"hyperdoc: error: {exc}", file=sys.stderr)
        return 2
    if a.command == "gen" and not a.out:
        return 0
    sys.stdout.write(rep.render(a.format))
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
