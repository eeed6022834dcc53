"""Filter quotients, model extraction into finite subsets, and the Henkin pipeline."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constructions import HenkinTrace, henkin_saturate, saturation_coverage
from .doctrine import (Doctrine, DoctrineMorphism, check_morphism, check_rich,
                       closure, compose_morphisms, consistency_status)
from .fixtures import subsets_doctrine
from .order import Filter, LatticeOps, as_filter, extend_to_ultrafilter, generated_filter, poset_reflection
from .sets import function_category


class ModelError(ValueError):
    pass


class PreconditionError(ModelError):
    """A structure layer the construction needs is not declared."""


class InconsistentError(ModelError):
    pass


class NotRichError(ModelError):
    def __init__(self, msg, uncovered=()):
        super().__init__(msg)
        self.uncovered = list(uncovered)


class NotUltraError(ModelError):
    pass


class EqualityError(ModelError):
    def __init__(self, msg, data=None):
        super().__init__(msg)
        self.data = data


# -- quotients ---------------------------------------------------------------------------

@dataclass
class QuotientPresentation:
    src: Doctrine
    filter: Filter
    result: Doctrine
    q: DoctrineMorphism
    reflections: tuple


def _terminal_filter(P: Doctrine, nabla) -> Filter:
    t = P.base.terminal
    L = P.ops[t]
    if isinstance(nabla, Filter):
        members = nabla.members
    else:
        members = [P.fibers[t].el(x) for x in nabla]
    return as_filter(L, members)


def quotient_by_filter(P: Doctrine, nabla) -> QuotientPresentation:
    """Fiberwise poset reflection of ``a <= b iff P(!)theta ^ a <= b`` for some ``theta`` in ``nabla``."""
    cat = P.base
    for a, o in enumerate(P.ops):
        if o.top is None or o.meet is None:
            raise PreconditionError(f"quotients need top and meets (fiber {cat.objects[a]})")
    F = _terminal_filter(P, nabla)
    thetas = sorted(F.members)
    refl = []
    for a in range(len(cat.objects)):
        L, M = P.fibers[a].leq, P.ops[a].meet
        bang = P.R(int(cat.bang[a]))
        rel = np.zeros_like(L)
        for th in thetas:
            rel |= L[M[int(bang[th])]]      # rel[x, y] = (u ^ x <= y)
        refl.append(poset_reflection(P.fibers[a].elements, rel))
    fibers = tuple(r.poset for r in refl)
    ops = []
    for a, (r, o) in enumerate(zip(refl, P.ops)):
        rep, q = r.representatives, r.quotient
        ix = np.ix_(rep, rep)

        def bin_(T):
            return None if T is None else q[T[ix]]
        ops.append(LatticeOps(r.poset, int(q[o.top]), bin_(o.meet),
                              None if o.bottom is None else int(q[o.bottom]),
                              bin_(o.join), bin_(o.imp)))
    reind = tuple(refl[int(cat.dom[f])].quotient[P.R(f)[refl[int(cat.cod[f])].representatives]]
                  for f in range(len(cat.morphisms)))
    delta = {a: int(refl[cat.product(a, a)[0]].quotient[d]) for a, d in P.delta.items()}
    ex = {(c, b): refl[c].quotient[E[refl[cat.product(c, b)[0]].representatives]] for (c, b), E in P.exists_.items()}
    fa = {(c, b): refl[c].quotient[A[refl[cat.product(c, b)[0]].representatives]] for (c, b), A in P.forall_.items()}
    Q = Doctrine(cat, fibers, reind, tuple(ops), delta, ex, fa, P.layers, f"{P.name}/F",
                 {"parent": P, "filter": F.names()})
    q = DoctrineMorphism(P, Q, np.arange(len(cat.objects)), np.arange(len(cat.morphisms)),
                         tuple(r.quotient for r in refl), P.layers, "q")
    return QuotientPresentation(P, F, Q, q, tuple(refl))


def quotient_mediator(qp: QuotientPresentation, G: DoctrineMorphism) -> DoctrineMorphism:
    """Factor ``G`` through the quotient; ``G`` must send the filter to top."""
    P = qp.src
    if G.src is not P:
        raise ModelError("G must start from the quotiented doctrine")
    t = P.base.terminal
    Gt = int(G.F_obj[t])
    top = G.dst.ops[Gt].top
    for th in qp.filter.members:
        if top is None or not G.dst.fibers[Gt].leq[top, int(G.comp[t][th])]:
            raise ModelError(f"G does not send {P.fibers[t].elements[th]} to top")
    comp = []
    for a, r in enumerate(qp.reflections):
        c = G.comp[a][r.representatives]
        if not np.array_equal(c[r.quotient], G.comp[a]):
            raise ModelError(f"G does not respect the quotient at {P.base.objects[a]}")
        comp.append(c)
    return DoctrineMorphism(qp.result, G.dst, G.F_obj, G.F_mor, tuple(comp), G.preserved_layers, "q-med")


# -- models --------------------------------------------------------------------------------

@dataclass
class SubsetModel:
    carrier: dict            # object name -> tuple of element labels
    action: dict             # morphism name -> tuple of carrier indices
    interp: dict             # object name -> list (per fiber element) of frozenset of carrier indices
    mode: str = "plain"
    doctrine: Doctrine | None = None      # the doctrine the interpretation is defined on
    filter: Filter | None = None
    classes: dict = field(default_factory=dict)   # elementary mode: object -> list of constant tuples

    def holds(self, obj, element) -> frozenset:
        P = self.doctrine
        a = P.base.obj(obj)
        return self.interp[P.base.objects[a]][P.fibers[a].el(element)]

    def fragment(self):
        """``(S, m)``: a finite subsets doctrine over exactly the model's carriers
        and the morphism ``doctrine -> S`` the interpretation defines."""
        P = self.doctrine
        cat = P.base
        names = cat.objects
        prods = {}
        for (a, b), (p, p1, p2) in cat.products.items():
            prods[(names[a], names[b])] = (names[p], self.action[cat.morphisms[p1]], self.action[cat.morphisms[p2]])
        S = function_category({n: self.carrier[n] for n in names}, names[cat.terminal], prods, name="model")
        D = subsets_doctrine(S, name="model")
        sc = S.cat
        index = {}
        for f in range(len(sc.morphisms)):
            index[(int(sc.dom[f]), int(sc.cod[f]), tuple(S.fn[f].tolist()))] = f
        F_mor = [index[(int(cat.dom[f]), int(cat.cod[f]), tuple(self.action[cat.morphisms[f]]))]
                 for f in range(len(cat.morphisms))]
        comp = tuple(np.array([sum(1 << i for i in s) for s in self.interp[n]], dtype=np.int64) for n in names)
        m = DoctrineMorphism(P, D, np.arange(len(names)), F_mor, comp, frozenset(), "interp")
        return D, m


def _require(P: Doctrine, layers):
    have = set(closure(P.layers))
    missing = [l for l in layers if l not in have]
    if missing:
        raise PreconditionError(f"{P.name or 'doctrine'} does not declare: {', '.join(missing)}")


def _check_ultra(P: Doctrine, U) -> Filter:
    U = _terminal_filter(P, U)
    from .order import classify_filter
    c = classify_filter(U.lattice, U)
    if not c["proper"]:
        raise InconsistentError("the filter is improper")
    if not c["ultra"]:
        raise NotUltraError("filter is not an ultrafilter: implication preservation unavailable")
    return U


def _gate(P: Doctrine, U):
    _require(P, ("bounded", "implicational", "existential"))
    if consistency_status(P) == "inconsistent":
        raise InconsistentError(f"{P.name or 'doctrine'} is inconsistent")
    rr = check_rich(P)
    if not rr.rich:
        unc = [(P.base.objects[a], P.fibers[a].elements[s]) for a, s in rr.failures]
        raise NotRichError("model undefined: empty carrier possible (not rich)", unc)
    return _check_ultra(P, U)


def _constants(P: Doctrine):
    cat = P.base
    t = cat.terminal
    homs = [cat.hom(t, a) for a in range(len(cat.objects))]
    for a, h in enumerate(homs):
        if not len(h):
            raise NotRichError(f"no constant of sort {cat.objects[a]}", [(cat.objects[a], None)])
    pos = [{int(c): i for i, c in enumerate(h.tolist())} for h in homs]
    return homs, pos


def extract_model(P: Doctrine, U, check: bool = True) -> SubsetModel:
    """Constants ``t -> X`` as carriers; ``phi`` holds at ``c`` when ``P(c)phi`` is in ``U``."""
    U = _gate(P, U) if check else _terminal_filter(P, U)
    cat = P.base
    homs, pos = _constants(P)
    inU = np.zeros(len(P.fibers[cat.terminal]), dtype=bool)
    inU[list(U.members)] = True
    carrier = {cat.objects[a]: tuple(cat.morphisms[c] for c in homs[a].tolist()) for a in range(len(cat.objects))}
    action = {}
    for f in range(len(cat.morphisms)):
        a, b = int(cat.dom[f]), int(cat.cod[f])
        action[cat.morphisms[f]] = tuple(pos[b][cat.compose(f, int(c))] for c in homs[a].tolist())
    interp = {}
    for a in range(len(cat.objects)):
        # rows: constants; columns: fiber elements
        T = np.array([P.R(int(c)) for c in homs[a].tolist()], dtype=np.int64).reshape(len(homs[a]), len(P.fibers[a]))
        hit = inU[T]
        interp[cat.objects[a]] = [frozenset(np.flatnonzero(hit[:, x]).tolist()) for x in range(len(P.fibers[a]))]
    return SubsetModel(carrier, action, interp, "plain", P, U)


def _sim(P: Doctrine, U: Filter, homs):
    """Per object, the relation ``c ~ d`` on constants.

    With a diagonal: ``P(<c, d>) delta in U``.  Without one: componentwise
    through the chosen projections when the object is a chosen product,
    otherwise equality.
    """
    cat = P.base
    inU = np.zeros(len(P.fibers[cat.terminal]), dtype=bool)
    inU[list(U.members)] = True
    rel = {}
    as_product = {p: (a, b, p1, p2) for (a, b), (p, p1, p2) in cat.products.items() if p not in (a, b)}
    order = sorted(range(len(cat.objects)), key=lambda a: (a not in P.delta, a))
    for a in order:
        h = homs[a].tolist()
        n = len(h)
        R = np.zeros((n, n), dtype=bool)
        if a in P.delta:
            for i, c in enumerate(h):
                for j, d in enumerate(h):
                    R[i, j] = inU[int(P.R(cat.tuple(c, d))[P.delta[a]])]
        elif a in as_product and as_product[a][0] in rel and as_product[a][1] in rel:
            x, y, p1, p2 = as_product[a]
            px = {int(c): i for i, c in enumerate(homs[x].tolist())}
            py = {int(c): i for i, c in enumerate(homs[y].tolist())}
            for i, c in enumerate(h):
                for j, d in enumerate(h):
                    R[i, j] = rel[x][px[cat.compose(p1, c)], px[cat.compose(p1, d)]] and \
                        rel[y][py[cat.compose(p2, c)], py[cat.compose(p2, d)]]
        else:
            R = np.eye(n, dtype=bool)
        rel[a] = R
    return [rel[a] for a in range(len(cat.objects))]


def extract_model_elementary(P: Doctrine, U, check: bool = True) -> SubsetModel:
    """Like :func:`extract_model` with carriers the classes of ``~``."""
    if check:
        _require(P, ("elementary",))
    plain = extract_model(P, U, check=check)
    U = plain.filter
    cat = P.base
    homs, pos = _constants(P)
    rel = _sim(P, U, homs)
    names = cat.objects
    classes, cls_of = {}, {}
    for a, R in enumerate(rel):
        n = len(R)
        if not (R.diagonal().all() and (R == R.T).all() and not ((R.astype(int) @ R.astype(int) > 0) & ~R).any()):
            raise EqualityError(f"~ is not an equivalence on constants of {names[a]}", R)
        q = np.full(n, -1, dtype=np.int64)
        reps = []
        for i in range(n):
            if q[i] < 0:
                q[R[i]] = len(reps)
                reps.append(i)
        classes[names[a]] = [tuple(np.flatnonzero(q == k).tolist()) for k in range(len(reps))]
        cls_of[a] = q
    action = {}
    for f in range(len(cat.morphisms)):
        a, b = int(cat.dom[f]), int(cat.cod[f])
        act = np.asarray(plain.action[cat.morphisms[f]], dtype=np.int64)
        img = cls_of[b][act]
        out = []
        for members in classes[names[a]]:
            vals = set(img[list(members)].tolist())
            if len(vals) != 1:
                raise EqualityError(f"{cat.morphisms[f]} does not respect ~", (members, vals))
            out.append(vals.pop())
        action[cat.morphisms[f]] = tuple(out)
    interp = {}
    for a in range(len(cat.objects)):
        rows = []
        for x, s in enumerate(plain.interp[names[a]]):
            cl = set()
            for k, members in enumerate(classes[names[a]]):
                inside = {m in s for m in members}
                if len(inside) != 1:
                    raise EqualityError(f"interpretation of {P.fibers[a].elements[x]} is not ~-saturated",
                                        (names[a], x, members))
                if inside.pop():
                    cl.add(k)
            rows.append(frozenset(cl))
        interp[names[a]] = rows
    carrier = {names[a]: tuple("[" + "|".join(cat.morphisms[int(homs[a][i])] for i in m) + "]"
                               for m in classes[names[a]]) for a in range(len(cat.objects))}
    # products must still be products after collapsing
    for (a, b), (p, p1, p2) in cat.products.items():
        t1, t2 = action[cat.morphisms[p1]], action[cat.morphisms[p2]]
        pairs = set(zip(t1, t2))
        if len(pairs) != len(t1) or len(pairs) != len(classes[names[a]]) * len(classes[names[b]]):
            raise EqualityError(f"product {names[p]} does not descend to the classes", (a, b))
    return SubsetModel(carrier, action, interp, "elementary", P, U, classes)


# -- preservation checks ----------------------------------------------------------------------

def model_preservation(M: SubsetModel) -> dict:
    """Law -> list of failing ``(object, args)`` over every fiber element."""
    P = M.doctrine
    cat = P.base
    out = {k: [] for k in ("top", "bottom", "meet", "imp", "exists", "forall", "delta", "natural", "product")}
    for a, name in enumerate(cat.objects):
        I, o = M.interp[name], P.ops[a]
        full = frozenset(range(len(M.carrier[name])))
        if o.top is not None and I[o.top] != full:
            out["top"].append((name,))
        if o.bottom is not None and I[o.bottom] != frozenset():
            out["bottom"].append((name,))
        n = len(I)
        for x in range(n):
            for y in range(n):
                if o.meet is not None and I[int(o.meet[x, y])] != I[x] & I[y]:
                    out["meet"].append((name, x, y))
                if o.imp is not None and I[int(o.imp[x, y])] != (full - I[x]) | I[y]:
                    out["imp"].append((name, x, y))
    for f in range(len(cat.morphisms)):
        a, b = int(cat.dom[f]), int(cat.cod[f])
        act = M.action[cat.morphisms[f]]
        Ia, Ib = M.interp[cat.objects[a]], M.interp[cat.objects[b]]
        R = P.R(f)
        for y in range(len(Ib)):
            if Ia[int(R[y])] != frozenset(i for i, v in enumerate(act) if v in Ib[y]):
                out["natural"].append((cat.morphisms[f], y))
    for (c, b), (p, p1, p2) in cat.products.items():
        t1, t2 = M.action[cat.morphisms[p1]], M.action[cat.morphisms[p2]]
        nc, nb = len(M.carrier[cat.objects[c]]), len(M.carrier[cat.objects[b]])
        if len(set(zip(t1, t2))) != len(t1) or len(t1) != nc * nb:
            out["product"].append((cat.objects[c], cat.objects[b]))
            continue
        Ip, Ic = M.interp[cat.objects[p]], M.interp[cat.objects[c]]
        fullc = frozenset(range(nc))
        if (c, b) in P.exists_:
            E = P.exists_[(c, b)]
            for x in range(len(Ip)):
                if Ic[int(E[x])] != frozenset(t1[i] for i in Ip[x]):
                    out["exists"].append((cat.objects[c], cat.objects[b], x))
        if (c, b) in P.forall_:
            A = P.forall_[(c, b)]
            for x in range(len(Ip)):
                outside = frozenset(t1[i] for i in range(len(t1)) if i not in Ip[x])
                if Ic[int(A[x])] != fullc - outside:
                    out["forall"].append((cat.objects[c], cat.objects[b], x))
        if c == b and c in P.delta:
            diag = frozenset(i for i in range(len(t1)) if t1[i] == t2[i])
            if Ip[P.delta[c]] != diag:
                out["delta"].append((cat.objects[c],))
    return out


def preserved_laws(M: SubsetModel, boolean: bool | None = None) -> list:
    """Laws the model is expected to preserve."""
    P = M.doctrine
    laws = ["top", "bottom", "meet", "imp", "exists", "natural", "product"]
    if M.mode == "elementary":
        laws.append("delta")
    if boolean is None:
        boolean = "boolean" in closure(P.layers)
    if boolean:
        laws.append("forall")
    return laws


# -- pipeline -----------------------------------------------------------------------------------

@dataclass
class PipelineTrace:
    saturation: HenkinTrace | None = None
    saturated: Doctrine | None = None
    to_saturated: DoctrineMorphism | None = None
    coverage: dict = field(default_factory=dict)
    filter: list = field(default_factory=list)
    quotient: QuotientPresentation | None = None
    classes: dict = field(default_factory=dict)
    morphism: DoctrineMorphism | None = None       # source (restricted) -> model fragment
    report: dict = field(default_factory=dict)


def henkin_model_pipeline(P: Doctrine, budget: int | None = None, elementary: bool | None = None,
                          filter=None, targets="all") -> tuple:
    """Saturate, pick an ultrafilter, quotient, extract.

    ``budget=0`` skips saturation.  ``filter`` is ``None`` (greedy extension of
    ``{top}``) or a list of element names of the saturated terminal fiber.
    Returns ``(model, trace)``.
    """
    _require(P, ("bounded", "implicational", "existential"))
    if consistency_status(P) == "inconsistent":
        raise InconsistentError(f"{P.name or 'doctrine'} is inconsistent; refusing to build a model")
    tr = PipelineTrace()
    if budget == 0:
        from .doctrine import identity_morphism
        S, m, ht = P, identity_morphism(P), HenkinTrace()
    else:
        S, m, ht = henkin_saturate(P, targets, budget)
    tr.saturation, tr.saturated, tr.to_saturated = ht, S, m
    for k, st in enumerate(ht.statuses):
        if st == "inconsistent":
            raise InconsistentError(f"saturation became inconsistent at step {k} ({ht.steps[k]})")
    tr.coverage = saturation_coverage(P, S, m, ht)
    rr = check_rich(S)
    if not rr.rich:
        unc = [(S.base.objects[a], S.fibers[a].elements[s]) for a, s in rr.failures]
        msg = "saturated doctrine is not rich" + (" (budget truncated)" if ht.truncated else "")
        raise NotRichError(msg, unc)
    t = S.base.terminal
    L = S.ops[t]
    if filter is None:
        U = extend_to_ultrafilter(L, generated_filter(L, []))
    else:
        U = generated_filter(L, [S.fibers[t].el(x) for x in filter])
    U = _check_ultra(S, U)
    tr.filter = U.names()
    qp = quotient_by_filter(S, U)
    tr.quotient = qp
    Q = qp.result
    Uq = generated_filter(Q.ops[t], [int(qp.q.comp[t][x]) for x in U.members])
    if elementary is None:
        elementary = bool(S.delta) and "elementary" in closure(S.layers)
    M = extract_model_elementary(Q, Uq) if elementary else extract_model(Q, Uq)
    tr.classes = M.classes
    D, mq = M.fragment()
    layers = ["bounded", "implicational", "existential"] + (["elementary"] if elementary else [])
    if "boolean" in closure(Q.layers):
        layers.append("universal")
    full = compose_morphisms(mq, compose_morphisms(qp.q, m))
    tr.morphism = full
    tr.report = {
        "layers": layers,
        "morphism": check_morphism(full, layers).summary(),
        "preservation": {k: len(v) for k, v in model_preservation(M).items()},
    }
    return M, tr
