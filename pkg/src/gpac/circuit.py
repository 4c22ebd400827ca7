"""GPAC circuits: constant, adder, multiplier and integrator units as data.

An integrator computes ``w = sum_k integral u_k dv_k``; its differential
ports ``v_k`` are driven by external inputs, its integrand ports ``u_k`` by
any signal. Adders and multipliers have ports ``u`` and ``v``.

Compilation introduces one state variable per integrator output and one per
designated non-integrator output, eliminating the remaining units by
substitution.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .bounds import BoundExpr  # noqa: F401  (re-exported for circuit users)
from .pivp import PIVP, DomainDecl
from .polynomial import Coefficient, PolyMatrix, Polynomial

UNIT_KINDS = ("constant", "adder", "multiplier", "integrator")
SCHEMA_VERSION = 1


class CircuitError(ValueError):
    """Invalid circuit or malformed circuit document."""


@dataclass(frozen=True)
class Unit:
    """One GPAC unit.

    ``value`` is used by constants; ``initial`` (the output value at the base
    point) and ``pairs`` (number of ``(u_k, v_k)`` port pairs) by integrators.
    """

    id: str
    kind: str
    value: Coefficient | None = None
    initial: Coefficient | None = None
    pairs: int = 1

    def ports(self) -> list[str]:
        if self.kind in ("adder", "multiplier"):
            return ["u", "v"]
        if self.kind == "integrator":
            return [f"{p}{k}" for k in range(1, self.pairs + 1) for p in ("u", "v")]
        return []


@dataclass(frozen=True)
class Wire:
    source: str
    unit: str
    port: str


@dataclass(frozen=True)
class Circuit:
    """Units, wires from signals to unit ports, inputs, base point and outputs."""

    units: tuple[Unit, ...]
    wires: tuple[Wire, ...]
    inputs: tuple[str, ...] = ("t",)
    outputs: tuple[str, ...] = ()
    base: tuple[Coefficient, ...] = ()
    domain: DomainDecl = field(default_factory=DomainDecl)

    def __post_init__(self):
        base = self.base or (0,) * len(self.inputs)
        object.__setattr__(self, "base", tuple(Coefficient.coerce(v) for v in base))

    def unit(self, uid: str) -> Unit:
        for u in self.units:
            if u.id == uid:
                return u
        raise KeyError(uid)

    def counts(self) -> dict[str, int]:
        out = {k: 0 for k in UNIT_KINDS}
        for u in self.units:
            out[u.kind] = out.get(u.kind, 0) + 1
        return out


# ---------------------------------------------------------------------------
# construction helpers

def constant(uid: str, value) -> Unit:
    return Unit(uid, "constant", value=Coefficient.coerce(value))


def adder(uid: str) -> Unit:
    return Unit(uid, "adder")


def multiplier(uid: str) -> Unit:
    return Unit(uid, "multiplier")


def integrator(uid: str, initial, pairs: int = 1) -> Unit:
    return Unit(uid, "integrator", initial=Coefficient.coerce(initial), pairs=pairs)


def wire(source: str, target: str) -> Wire:
    """``wire("a", "b.u")`` connects signal ``a`` to port ``u`` of unit ``b``."""
    unit, _, port = target.rpartition(".")
    if not unit:
        raise CircuitError(f"wire target {target!r} must look like 'unit.port'")
    return Wire(source, unit, port)


def sine_cosine_circuit() -> Circuit:
    """Two integrators in a loop through a ``-1`` multiplier: outputs ``sin t``."""
    units = (constant("minus1", -1), multiplier("neg"),
             integrator("cos", 1), integrator("sin", 0))
    wires = (wire("minus1", "neg.u"), wire("sin", "neg.v"),
             wire("neg", "cos.u1"), wire("t", "cos.v1"),
             wire("cos", "sin.u1"), wire("t", "sin.v1"))
    return Circuit(units, wires, ("t",), ("sin",))


def inverse_square_norm_circuit() -> Circuit:
    """Two-input circuit whose first output is ``1 / (x1^2 + x2^2)``.

    Based at ``(1, 0)``; outputs ``(h1, h2, h3) = (1/(x1^2+x2^2), x1, x2)``.
    The origin is excluded, so evaluation needs explicit paths.
    """
    units = (constant("one", 1), constant("minus2", -2),
             integrator("h2", 1), integrator("h3", 0),
             integrator("i1", 1), integrator("i2", 0), adder("h1"),
             multiplier("sq"), multiplier("m2sq"), multiplier("p1"), multiplier("p2"))
    wires = (wire("one", "h2.u1"), wire("x1", "h2.v1"),
             wire("one", "h3.u1"), wire("x2", "h3.v1"),
             wire("i1", "h1.u"), wire("i2", "h1.v"),
             wire("h1", "sq.u"), wire("h1", "sq.v"),
             wire("minus2", "m2sq.u"), wire("sq", "m2sq.v"),
             wire("m2sq", "p1.u"), wire("h2", "p1.v"),
             wire("m2sq", "p2.u"), wire("h3", "p2.v"),
             wire("p1", "i1.u1"), wire("x1", "i1.v1"),
             wire("p2", "i2.u1"), wire("x2", "i2.v1"))
    return Circuit(units, wires, ("x1", "x2"), ("h1", "h2", "h3"), (1, 0),
                   DomainDecl("path_required", description="plane without the origin"))


# ---------------------------------------------------------------------------
# validation

def _port_map(c: Circuit) -> tuple[dict[tuple[str, str], list[str]], list[str]]:
    problems = []
    units = {u.id: u for u in c.units}
    feeds: dict[tuple[str, str], list[str]] = {}
    for w in c.wires:
        if w.unit not in units:
            problems.append(f"wire from {w.source!r} targets unknown unit {w.unit!r}")
            continue
        if w.port not in units[w.unit].ports():
            problems.append(f"unit {w.unit!r} ({units[w.unit].kind}) has no port {w.port!r}")
            continue
        if w.source not in units and w.source not in c.inputs:
            problems.append(f"wire into {w.unit}.{w.port} comes from unknown signal {w.source!r}")
            continue
        feeds.setdefault((w.unit, w.port), []).append(w.source)
    return feeds, problems


def _algebraic_cycles(c: Circuit, feeds) -> list[list[str]]:
    """Cycles among constant/adder/multiplier units (integrators break loops)."""
    kinds = {u.id: u.kind for u in c.units}
    graph: dict[str, list[str]] = {u.id: [] for u in c.units if u.kind != "integrator"}
    for (uid, _), sources in feeds.items():
        if uid in graph:
            graph[uid].extend(s for s in sources if kinds.get(s) in ("adder", "multiplier",
                                                                      "constant"))
    cycles, color, stack = [], {}, []

    def visit(v):
        color[v] = 1
        stack.append(v)
        for w in graph[v]:
            if color.get(w) == 1:
                cycles.append(stack[stack.index(w):] + [w])
            elif w not in color:
                visit(w)
        stack.pop()
        color[v] = 2

    for v in sorted(graph):
        if v not in color:
            visit(v)
    return cycles


def circuit_validate(c: Circuit) -> list[str]:
    """Structural checks; returns human-readable violations (empty if valid)."""
    problems = []
    ids = [u.id for u in c.units]
    dup = sorted({i for i in ids if ids.count(i) > 1})
    if dup:
        problems.append(f"duplicate unit ids: {', '.join(dup)}")
    clash = sorted(set(ids) & set(c.inputs))
    if clash:
        problems.append(f"unit ids clash with input names: {', '.join(clash)}")
    if len(c.base) != len(c.inputs):
        problems.append(f"base point has {len(c.base)} coordinates for {len(c.inputs)} inputs")
    for u in c.units:
        if u.kind not in UNIT_KINDS:
            problems.append(f"unit {u.id!r} has unknown kind {u.kind!r}")
        if u.kind == "constant" and u.value is None:
            problems.append(f"constant {u.id!r} has no value")
        if u.kind == "integrator":
            if u.initial is None:
                problems.append(f"integrator {u.id!r} has no initial value")
            if u.pairs < 1:
                problems.append(f"integrator {u.id!r} needs at least one (u, v) port pair")
    feeds, wiring = _port_map(c)
    problems += wiring
    units = {u.id: u for u in c.units}
    for u in c.units:
        for port in u.ports():
            n = len(feeds.get((u.id, port), []))
            if n == 0:
                problems.append(f"port {u.id}.{port} is not wired")
            elif n > 1:
                problems.append(f"port {u.id}.{port} is wired {n} times")
    for (uid, port), sources in feeds.items():
        if units[uid].kind == "integrator" and port.startswith("v"):
            for s in sources:
                if s not in c.inputs:
                    problems.append(f"differential port {uid}.{port} must be driven by an "
                                    f"external input, not {s!r}")
    for cyc in _algebraic_cycles(c, feeds):
        problems.append("algebraic cycle (no integrator on the loop): " + " -> ".join(cyc))
    if not c.outputs:
        problems.append("circuit has no designated outputs")
    for o in c.outputs:
        if o not in units:
            problems.append(f"output {o!r} is not a unit")
    return problems


# ---------------------------------------------------------------------------
# compilation

def circuit_to_pivp(c: Circuit, name: str = "circuit") -> PIVP:
    """Compile a valid circuit into a PIVP.

    State layout: designated outputs first (in order), then the remaining
    integrators sorted by id, then coordinate variables for external inputs
    used outside differential ports. Integrators whose output is only
    consumed through a designated non-integrator output are eliminated.
    """
    problems = circuit_validate(c)
    if problems:
        raise CircuitError("invalid circuit: " + "; ".join(problems))
    units = {u.id: u for u in c.units}
    feeds = {k: v[0] for k, v in _port_map(c)[0].items()}
    d = len(c.inputs)
    input_index = {x: j for j, x in enumerate(c.inputs)}

    coord_inputs = sorted({s for (uid, port), s in feeds.items()
                           if s in input_index and not (units[uid].kind == "integrator"
                                                        and port.startswith("v"))},
                          key=input_index.get)
    integrators = sorted(u.id for u in c.units if u.kind == "integrator")
    derived = [o for o in c.outputs if units[o].kind != "integrator"]
    order = list(dict.fromkeys(list(c.outputs) + integrators + coord_inputs))
    n_all = len(order)
    pos = {s: i for i, s in enumerate(order)}

    memo: dict[str, Polynomial] = {}

    def signal(s: str) -> Polynomial:
        if s in pos:
            return Polynomial.variable(pos[s], n_all)
        return definition(s)

    def definition(s: str) -> Polynomial:
        if s in memo:
            return memo[s]
        u = units[s]
        if u.kind == "constant":
            p = Polynomial.constant(u.value, n_all)
        elif u.kind == "adder":
            p = signal(feeds[(s, "u")]) + signal(feeds[(s, "v")])
        elif u.kind == "multiplier":
            p = signal(feeds[(s, "u")]) * signal(feeds[(s, "v")])
        else:
            raise CircuitError(f"integrator {s!r} has no algebraic definition")
        memo[s] = p
        return p

    rows: dict[str, list[Polynomial]] = {}
    for s in integrators:
        row = [Polynomial.zero(n_all) for _ in range(d)]
        for k in range(1, units[s].pairs + 1):
            j = input_index[feeds[(s, f"v{k}")]]
            row[j] = row[j] + signal(feeds[(s, f"u{k}")])
        rows[s] = row
    for x in coord_inputs:
        rows[x] = [Polynomial.constant(1 if j == input_index[x] else 0, n_all) for j in range(d)]

    defs = {s: definition(s) for s in derived}

    def derived_row(s: str, seen=()) -> list[Polynomial]:
        if s in rows:
            return rows[s]
        if s in seen:
            raise CircuitError(f"derived outputs depend on each other cyclically at {s!r}")
        P = defs[s]
        row = [Polynomial.zero(n_all) for _ in range(d)]
        for v in P.variables():
            grad = P.partial(v)
            vrow = derived_row(order[v], seen + (s,))
            for j in range(d):
                row[j] = row[j] + grad * vrow[j]
        rows[s] = row
        return row

    for s in derived:
        derived_row(s)

    init: dict[str, Coefficient] = {s: units[s].initial for s in integrators}
    for x in coord_inputs:
        init[x] = c.base[input_index[x]]

    def initial(s):
        if s not in init:
            vals = [initial(order[i]) if i in defs[s].variables() else Coefficient(0)
                    for i in range(n_all)]
            init[s] = defs[s].evaluate_exact(vals)
        return init[s]

    for s in derived:
        initial(s)

    # drop integrators absorbed into derived outputs
    used = set()
    for s in order:
        for p in rows[s]:
            used |= p.variables()
    consumed = set()
    for s in derived:
        consumed |= defs[s].variables()
    keep = [s for s in order
            if s in c.outputs or pos[s] in used or pos[s] not in consumed]
    kpos = {s: i for i, s in enumerate(keep)}
    mapping = [kpos.get(s, -1) for s in order]
    n = len(keep)

    def project(p: Polynomial) -> Polynomial:
        if any(mapping[v] < 0 for v in p.variables()):
            raise CircuitError("eliminated integrator still referenced")
        return p.embed([max(m, 0) for m in mapping], n)

    rhs = PolyMatrix([[project(p) for p in rows[s]] for s in keep], n)
    return PIVP(rhs, c.base, tuple(initial(s) for s in keep), len(c.outputs), None, c.domain,
                tuple(keep), None, name)


def pivp_to_circuit(f: PIVP) -> Circuit:
    """Expand a PIVP into a circuit: one integrator per state variable.

    Integrators are named ``s000, s001, ...`` in state order; monomials are
    built from shared multiplier chains and sums from adder chains. The first
    ``output_dim`` integrators are the outputs.
    """
    n, d = f.state_dim, f.input_dim
    inputs = ("t",) if d == 1 else tuple(f"x{j + 1}" for j in range(d))
    width = max(3, len(str(n - 1)))
    svar = [f"s{i:0{width}d}" for i in range(n)]
    units: list[Unit] = []
    wires: list[Wire] = []
    const_ids: dict[Coefficient, str] = {}
    mono_ids: dict[tuple[int, ...], str] = {}
    counter = {"c": 0, "m": 0, "a": 0}

    def fresh(prefix):
        counter[prefix] += 1
        return f"{prefix}{counter[prefix]}"

    def const_unit(v: Coefficient) -> str:
        if v not in const_ids:
            uid = fresh("c")
            units.append(constant(uid, v))
            const_ids[v] = uid
        return const_ids[v]

    def mono_unit(e: tuple[int, ...]) -> str:
        if sum(e) == 1:
            return svar[e.index(1)]
        if e not in mono_ids:
            i = next(k for k, v in enumerate(e) if v)
            parent = list(e)
            parent[i] -= 1
            src = mono_unit(tuple(parent))
            uid = fresh("m")
            units.append(multiplier(uid))
            wires.extend([wire(src, f"{uid}.u"), wire(svar[i], f"{uid}.v")])
            mono_ids[e] = uid
        return mono_ids[e]

    def term_unit(e, coeff: Coefficient) -> str:
        if not any(e):
            return const_unit(coeff)
        m = mono_unit(e)
        if coeff == 1:
            return m
        uid = fresh("m")
        units.append(multiplier(uid))
        wires.extend([wire(const_unit(coeff), f"{uid}.u"), wire(m, f"{uid}.v")])
        return uid

    def poly_unit(p: Polynomial) -> str:
        terms = [term_unit(e, c) for e, c in p.sorted_terms()]
        acc = terms[0]
        for t in terms[1:]:
            uid = fresh("a")
            units.append(adder(uid))
            wires.extend([wire(acc, f"{uid}.u"), wire(t, f"{uid}.v")])
            acc = uid
        return acc

    integ_units = []
    for i in range(n):
        cols = [j for j in range(d) if not f.rhs[i, j].is_zero()]
        pairs = max(1, len(cols))
        integ_units.append(integrator(svar[i], f.y0[i], pairs))
        if not cols:
            wires.extend([wire(const_unit(Coefficient(0)), f"{svar[i]}.u1"),
                          wire(inputs[0], f"{svar[i]}.v1")])
        for k, j in enumerate(cols, start=1):
            wires.extend([wire(poly_unit(f.rhs[i, j]), f"{svar[i]}.u{k}"),
                          wire(inputs[j], f"{svar[i]}.v{k}")])
    return Circuit(tuple(integ_units + units), tuple(wires), inputs, tuple(svar[: f.output_dim]),
                   f.x0, f.domain)


# ---------------------------------------------------------------------------
# serialization

def circuit_to_json(c: Circuit) -> dict:
    units = []
    for u in c.units:
        node = {"id": u.id, "kind": u.kind}
        if u.kind == "constant":
            node["value"] = u.value.to_text()
        if u.kind == "integrator":
            node["initial"] = None if u.initial is None else u.initial.to_text()
            if u.pairs != 1:
                node["pairs"] = u.pairs
        units.append(node)
    return {
        "version": SCHEMA_VERSION,
        "inputs": list(c.inputs),
        "base": [v.to_text() for v in c.base],
        "units": units,
        "wires": [{"from": w.source, "to": f"{w.unit}.{w.port}"} for w in c.wires],
        "outputs": list(c.outputs),
        "domain": c.domain.to_json(),
    }


def circuit_serialize(c: Circuit) -> str:
    return json.dumps(circuit_to_json(c), indent=1)


def circuit_from_json(doc) -> Circuit:
    if not isinstance(doc, dict):
        raise CircuitError("circuit document must be a JSON object")
    if doc.get("version") != SCHEMA_VERSION:
        raise CircuitError(f"unsupported circuit schema version {doc.get('version')!r}")
    for key in ("units", "wires", "outputs"):
        if key not in doc:
            raise CircuitError(f"circuit document is missing field {key!r}")
    try:
        units = []
        for node in doc["units"]:
            kind = node["kind"]
            value = Coefficient.from_text(node["value"]) if node.get("value") is not None else None
            initial = (Coefficient.from_text(node["initial"])
                       if node.get("initial") is not None else None)
            units.append(Unit(node["id"], kind, value, initial, int(node.get("pairs", 1))))
        wires = [wire(w["from"], w["to"]) for w in doc["wires"]]
        inputs = tuple(doc.get("inputs", ["t"]))
        base = tuple(Coefficient.from_text(v) for v in doc.get("base", ["0/1"] * len(inputs)))
        domain = DomainDecl.from_json(doc.get("domain"))
    except (KeyError, TypeError, ValueError) as exc:
        raise CircuitError(f"malformed circuit document: {exc}") from exc
    return Circuit(tuple(units), tuple(wires), inputs, tuple(doc["outputs"]), base, domain)


def circuit_deserialize(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"not valid JSON: {exc}") from exc
    return circuit_from_json(doc)


def same_system(f: PIVP, g: PIVP, permutation: Sequence[int] | None = None) -> bool:
    """Structural equality of two PIVPs, optionally up to a state permutation.

    ``permutation[i]`` is the index in ``g`` of state variable ``i`` of ``f``.
    """
    if (f.state_dim, f.input_dim, f.output_dim) != (g.state_dim, g.input_dim, g.output_dim):
        return False
    if f.x0 != g.x0:
        return False
    perm = list(range(f.state_dim)) if permutation is None else list(permutation)
    for i in range(f.state_dim):
        if f.y0[i] != g.y0[perm[i]]:
            return False
        for j in range(f.input_dim):
            if f.rhs[i, j].embed(perm, g.state_dim) != g.rhs[perm[i], j]:
                return False
    return True
