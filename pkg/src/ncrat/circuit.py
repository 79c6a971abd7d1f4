"""Rational-circuit IR: parsing, structural analysis, evaluation, and the
normal forms feeding the pencil compiler.

Circuits are DAGs over {const, var, add, sub, mul, inv} with exact
rational constants, kept field-independent; fields enter at evaluation
and compilation time.  Subtraction is a first-class node so that formula
sizes match the surface syntax.  Parsing produces trees (shared
subexpressions are not merged); DAG inputs built programmatically are
accepted and normalized by duplication under a blow-up cap.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .field import DenseMatrix, Field, MatrixTuple, Singular, invert

LinForm = dict  # var index -> Fraction, key 0 is the constant slot


class ParseError(Exception):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class Undefined(Exception):
    """An inverse gate was applied to a singular value."""

    def __init__(self, node: int):
        super().__init__(f"inverse of a singular value at node {node}")
        self.node = node


class BlowupExceeded(Exception):
    """Tree expansion of a shared DAG grew past the configured factor."""


@dataclass(frozen=True)
class RationalCircuit:
    """nodes[i] is ('const', Fraction) | ('var', k) | ('add'|'sub'|'mul', l, r)
    | ('inv', child); children always precede parents."""

    nodes: tuple[tuple, ...]
    output: int
    nvars: int

    def reachable(self) -> list[int]:
        seen = set()
        stack = [self.output]
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            stack.extend(self.nodes[i][1:] if self.nodes[i][0] != "const"
                         and self.nodes[i][0] != "var" else [])
        return sorted(seen)

    @cached_property
    def size(self) -> int:
        return len(self.reachable())


class CircuitBuilder:
    def __init__(self):
        self.nodes: list[tuple] = []

    def _push(self, node: tuple) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def const(self, c) -> int:
        return self._push(("const", Fraction(c)))

    def var(self, i: int) -> int:
        if i < 1:
            raise ValueError("variable indices are 1-based")
        return self._push(("var", i))

    def add(self, l: int, r: int) -> int:
        return self._push(("add", l, r))

    def sub(self, l: int, r: int) -> int:
        return self._push(("sub", l, r))

    def mul(self, l: int, r: int) -> int:
        return self._push(("mul", l, r))

    def inv(self, child: int) -> int:
        return self._push(("inv", child))

    def build(self, output: int, nvars: int | None = None) -> RationalCircuit:
        if nvars is None:
            nvars = max((n[1] for n in self.nodes if n[0] == "var"), default=0)
        return RationalCircuit(tuple(self.nodes), output, nvars)


# -- parsing -------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<inv>inv\b)
  | (?P<var>x[1-9][0-9]*|y[0-9]+_[01])
  | (?P<int>[0-9]+)
  | (?P<pinv>\^-1)
  | (?P<op>[-+*/()])
""", re.VERBOSE)


def _var_index(name: str) -> int:
    if name[0] == "x":
        return int(name[1:])
    j, b = name[1:].split("_")
    return 2 * int(j) + int(b) + 1


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.b = CircuitBuilder()

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", tok[2])
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> RationalCircuit:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"trailing input {tok[1]!r}", tok[2])
        return self.b.build(node)

    def expr(self) -> int:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            node = self.b.add(node, rhs) if op == "+" else self.b.sub(node, rhs)
        return node

    def term(self) -> int:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            node = self.b.mul(node, self.factor())
        return node

    def factor(self) -> int:
        tok = self.peek()
        if tok[0] == "inv":
            self.take()
            self.take("op", "(")
            node = self.expr()
            self.take("op", ")")
            node = self.b.inv(node)
        else:
            node = self.atom()
        while self.peek()[0] == "pinv":
            self.take()
            node = self.b.inv(node)
        return node

    def atom(self) -> int:
        tok = self.peek()
        if tok[0] == "var":
            self.take()
            return self.b.var(_var_index(tok[1]))
        if tok[0] == "int":
            self.take()
            num = int(tok[1])
            if self.peek()[0] == "op" and self.peek()[1] == "/":
                self.take()
                den = self.take("int")
                return self.b.const(Fraction(num, int(den[1])))
            return self.b.const(num)
        if tok[0] == "op" and tok[1] == "(":
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ParseError(f"expected an atom, found {tok[1]!r}", tok[2])


def parse_expr(text: str) -> RationalCircuit:
    """Parse an expression into a tree-shaped circuit (a formula)."""
    return _Parser(text).parse()


# -- structural analysis ---------------------------------------------------


@dataclass(frozen=True)
class CircuitInfo:
    size: int
    height: int
    is_formula: bool
    is_poly: bool


def classify(c: RationalCircuit) -> CircuitInfo:
    reach = c.reachable()
    height = {}
    fanout = {i: 0 for i in reach}
    for i in reach:
        node = c.nodes[i]
        kind = node[0]
        if kind in ("const", "var"):
            height[i] = 0
        elif kind == "inv":
            height[i] = height[node[1]] + 1
            fanout[node[1]] += 1
        else:
            height[i] = max(height[node[1]], height[node[2]])
            fanout[node[1]] += 1
            fanout[node[2]] += 1
    is_formula = all(fanout[i] <= 1 for i in reach)
    h = height[c.output]
    return CircuitInfo(size=len(reach), height=h, is_formula=is_formula,
                       is_poly=(h == 0))


def eval_circuit(c: RationalCircuit, t: MatrixTuple) -> DenseMatrix:
    """Bottom-up evaluation at a matrix tuple; raises Undefined(node) when
    an inverse gate hits a singular value."""
    if c.nvars > t.n:
        raise ValueError("tuple has fewer matrices than the circuit has variables")
    field = t.field
    vals: dict[int, DenseMatrix] = {}
    for i in c.reachable():
        node = c.nodes[i]
        kind = node[0]
        if kind == "const":
            vals[i] = DenseMatrix.identity(field, t.d).scale(field.normalize(node[1]))
        elif kind == "var":
            vals[i] = t.mats[node[1] - 1]
        elif kind == "add":
            vals[i] = vals[node[1]].add(vals[node[2]])
        elif kind == "sub":
            vals[i] = vals[node[1]].sub(vals[node[2]])
        elif kind == "mul":
            vals[i] = vals[node[1]].matmul(vals[node[2]])
        elif kind == "inv":
            try:
                vals[i] = invert(vals[node[1]])
            except Singular:
                raise Undefined(i) from None
        else:
            raise ValueError(f"unknown node kind {kind!r}")
    return vals[c.output]


def defined_at(c: RationalCircuit, t: MatrixTuple) -> bool:
    try:
        eval_circuit(c, t)
        return True
    except Undefined:
        return False


# -- algebraic branching programs ------------------------------------------


@dataclass(frozen=True)
class Abp:
    """Layered branching program in normal form: the layer matrices have
    shapes w0 x w1, ..., w_{d-1} x w_d with w0 = w_d = 1; entries are
    affine forms {var index -> Fraction} with key 0 the constant part.
    Source and sink are the single boundary nodes."""

    layers: tuple
    nvars: int

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def widths(self) -> list[int]:
        w = [1]
        for m in self.layers:
            w.append(len(m[0]))
        return w

    @property
    def width(self) -> int:
        return max(self.widths)

    @property
    def size(self) -> int:
        return sum(self.widths)

    source = 1
    sink = 1


def _form_scale(form: LinForm, c: Fraction) -> LinForm:
    if c == 0:
        return {}
    return {k: v * c for k, v in form.items()}


def _form_add(a: LinForm, b: LinForm) -> LinForm:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, Fraction(0)) + v
        if s == 0:
            out.pop(k, None)
        else:
            out[k] = s
    return out


_ID_LAYER = (((),),)  # placeholder, identity layers built by _unit_layer


def _unit_layer():
    return [[{0: Fraction(1)}]]


def _pad(layers: list, extra: int) -> list:
    return layers + [_unit_layer() for _ in range(extra)]


def _abp_layers(c: RationalCircuit, node: int) -> list:
    kind = c.nodes[node][0]
    if kind == "var":
        return [[[{c.nodes[node][1]: Fraction(1)}]]]
    if kind == "const":
        return [[[{0: Fraction(c.nodes[node][1])}]]]
    if kind == "mul":
        a = _abp_layers(c, c.nodes[node][1])
        b = _abp_layers(c, c.nodes[node][2])
        return a + b
    if kind in ("add", "sub"):
        a = _abp_layers(c, c.nodes[node][1])
        b = _abp_layers(c, c.nodes[node][2])
        if kind == "sub":
            b = [[[_form_scale(f, Fraction(-1)) for f in row] for row in b[0]]] + b[1:]
        if len(a) < len(b):
            a = _pad(a, len(b) - len(a))
        elif len(b) < len(a):
            b = _pad(b, len(a) - len(b))
        if len(a) == 1:
            return [[[_form_add(a[0][0][0], b[0][0][0])]]]
        out = []
        out.append([a[0][0] + b[0][0]])  # 1 x (wa+wb)
        for t in range(1, len(a) - 1):
            ra, ca = len(a[t]), len(a[t][0])
            rb, cb = len(b[t]), len(b[t][0])
            blk = []
            for i in range(ra):
                blk.append(a[t][i] + [{} for _ in range(cb)])
            for i in range(rb):
                blk.append([{} for _ in range(ca)] + b[t][i])
            out.append(blk)
        out.append([row for row in a[-1]] + [row for row in b[-1]])  # (ra+rb) x 1
        return out
    raise ValueError(f"node kind {kind!r} is not allowed in an inverse-free formula")


def formula_to_abp(c: RationalCircuit) -> Abp:
    """Standard simulation of an inverse-free tree formula by a branching
    program of size linear in the formula size."""
    info = classify(c)
    if info.height != 0:
        raise ValueError("formula contains inverse gates")
    if not info.is_formula:
        raise ValueError("input must be tree-shaped")
    layers = _abp_layers(c, c.output)
    nvars = max((k for m in layers for row in m for f in row for k in f), default=0)
    frozen = tuple(tuple(tuple(dict(f) for f in row) for row in m) for m in layers)
    return Abp(layers=frozen, nvars=nvars)


def _eval_form(form: LinForm, t: MatrixTuple) -> DenseMatrix:
    field = t.field
    out = DenseMatrix.zeros(field, t.d, t.d)
    for k, v in form.items():
        c = field.normalize(v)
        if k == 0:
            out = out.add(DenseMatrix.identity(field, t.d).scale(c))
        else:
            out = out.add(t.mats[k - 1].scale(c))
    return out


def eval_abp(a: Abp, t: MatrixTuple) -> DenseMatrix:
    """Product of the evaluated layer matrices (block entry at source/sink)."""
    field = t.field
    cur = None
    for m in a.layers:
        rows = len(m)
        cols = len(m[0])
        big = DenseMatrix.zeros(field, rows * t.d, cols * t.d)
        for i in range(rows):
            for j in range(cols):
                blk = _eval_form(m[i][j], t)
                for bi in range(t.d):
                    for bj in range(t.d):
                        big.data[(i * t.d + bi) * cols * t.d + j * t.d + bj] = \
                            blk.at(bi, bj)
        cur = big if cur is None else cur.matmul(big)
    return cur


def expand_abp(a: Abp, field: Field):
    """Symbolic expansion into a free-algebra polynomial (oracle use)."""
    from . import freepoly

    def form_poly(form: LinForm):
        p = freepoly.NcPoly.zero(field)
        for k, v in form.items():
            mono = freepoly.NcPoly.const(field, v) if k == 0 else \
                freepoly.scale(v, freepoly.NcPoly.var(field, k))
            p = freepoly.add(p, mono)
        return p

    cur = None
    for m in a.layers:
        pm = [[form_poly(f) for f in row] for row in m]
        if cur is None:
            cur = pm
            continue
        rows, inner, cols = len(cur), len(pm), len(pm[0])
        nxt = [[freepoly.NcPoly.zero(field) for _ in range(cols)] for _ in range(rows)]
        for i in range(rows):
            for k in range(inner):
                if cur[i][k].is_zero():
                    continue
                for j in range(cols):
                    nxt[i][j] = freepoly.add(nxt[i][j],
                                             freepoly.mul(cur[i][k], pm[k][j]))
        cur = nxt
    return cur[0][0]


# -- inversely disjoint normal form ----------------------------------------


@dataclass(frozen=True)
class IdrCircuit:
    """Recursive decomposition r = f(x, g_1^{-1}, ..., g_m^{-1}): the top is
    an inverse-free branching program over the x variables (1..nx) and one
    placeholder variable nx+k per inverse gate; the subs are node-disjoint
    circuits of strictly lower inversion height."""

    top: Abp
    nx: int
    subs: tuple["IdrCircuit", ...]

    @property
    def m(self) -> int:
        return len(self.subs)

    @property
    def height(self) -> int:
        return 0 if not self.subs else 1 + max(s.height for s in self.subs)

    @property
    def size(self) -> int:
        return self.top.size + sum(s.size + 1 for s in self.subs)


def _expand_tree(c: RationalCircuit, cap_nodes: int) -> tuple[CircuitBuilder, int]:
    b = CircuitBuilder()
    count = 0

    def go(i: int) -> int:
        nonlocal count
        count += 1
        if count > cap_nodes:
            raise BlowupExceeded(
                f"tree expansion exceeded {cap_nodes} nodes; the circuit shares "
                "subexpressions too aggressively for duplication")
        node = c.nodes[i]
        kind = node[0]
        if kind == "const":
            return b.const(node[1])
        if kind == "var":
            return b.var(node[1])
        if kind == "inv":
            return b.inv(go(node[1]))
        return b._push((kind, go(node[1]), go(node[2])))

    out = go(c.output)
    return b, out


def to_idrrsc(c: RationalCircuit, blowup_cap: float = 8.0) -> IdrCircuit:
    """Normalize a circuit to the inversely disjoint form: a maximal
    inverse-free top lowered to a branching program, with one placeholder
    per top-level inverse gate and recursively normalized sub-circuits.
    DAG sharing is resolved by duplication up to blowup_cap times the
    original size."""
    cap = max(int(blowup_cap * c.size), c.size)
    b, out = _expand_tree(c, cap)
    tree = b.build(out, nvars=c.nvars)
    return _decompose(tree, tree.output, c.nvars)


def _decompose(tree: RationalCircuit, root: int, nx: int) -> IdrCircuit:
    subs: list[RationalCircuit] = []
    top = CircuitBuilder()

    def go(i: int) -> int:
        node = tree.nodes[i]
        kind = node[0]
        if kind == "const":
            return top.const(node[1])
        if kind == "var":
            return top.var(node[1])
        if kind == "inv":
            sub = _extract(tree, node[1])
            subs.append(sub)
            return top.var(nx + len(subs))
        return top._push((kind, go(node[1]), go(node[2])))

    out = go(root)
    top_circ = top.build(out, nvars=nx + len(subs))
    abp = formula_to_abp(top_circ)
    return IdrCircuit(top=abp, nx=nx,
                      subs=tuple(_decompose(s, s.output, nx) for s in subs))


def _extract(tree: RationalCircuit, root: int) -> RationalCircuit:
    b = CircuitBuilder()

    def go(i: int) -> int:
        node = tree.nodes[i]
        kind = node[0]
        if kind == "const":
            return b.const(node[1])
        if kind == "var":
            return b.var(node[1])
        if kind == "inv":
            return b.inv(go(node[1]))
        return b._push((kind, go(node[1]), go(node[2])))

    out = go(root)
    return b.build(out, nvars=tree.nvars)


def eval_idrrsc(idr: IdrCircuit, t: MatrixTuple) -> DenseMatrix:
    """Evaluate the decomposition directly: placeholders take the inverses
    of the evaluated subs.  Raises Undefined(-1) when a sub value or the
    composition is singular."""
    vals = list(t.mats)
    for sub in idr.subs:
        v = eval_idrrsc(sub, t)
        try:
            vals.append(invert(v))
        except Singular:
            raise Undefined(-1) from None
    ext = MatrixTuple(t.field, t.d, tuple(vals))
    return eval_abp(idr.top, ext)


# -- variable substitutions -------------------------------------------------


def variable_reduction(c: RationalCircuit, h: int) -> RationalCircuit:
    """Substitute x_i -> sum_{j=0..h} y_{j0} y_{j1}^i y_{j0}; the result uses
    2(h+1) variables (y_{j0} = 2j+1, y_{j1} = 2j+2) and keeps the inversion
    height of the input."""
    if h < classify(c).height:
        raise ValueError("h must be at least the inversion height")
    b = CircuitBuilder()
    cache: dict[int, int] = {}

    def encode_var(i: int) -> int:
        total = None
        for j in range(h + 1):
            pw = b.var(2 * j + 2)
            for _ in range(i - 1):
                pw = b.mul(pw, b.var(2 * j + 2))
            term = b.mul(b.var(2 * j + 1), b.mul(pw, b.var(2 * j + 1)))
            total = term if total is None else b.add(total, term)
        return total

    def go(i: int) -> int:
        if i in cache:
            return cache[i]
        node = c.nodes[i]
        kind = node[0]
        if kind == "const":
            out = b.const(node[1])
        elif kind == "var":
            out = encode_var(node[1])
        elif kind == "inv":
            out = b.inv(go(node[1]))
        else:
            out = b._push((kind, go(node[1]), go(node[2])))
        cache[i] = out
        return out

    out = go(c.output)
    return b.build(out, nvars=2 * (h + 1))


def bivariate_encode(c: RationalCircuit) -> RationalCircuit:
    """Polynomial special case of variable_reduction (h = 0)."""
    if classify(c).height != 0:
        raise ValueError("bivariate encoding applies to inverse-free circuits")
    return variable_reduction(c, 0)


def transport_tuple(q: MatrixTuple, n: int, h: int) -> MatrixTuple:
    """Map a witness for the reduced circuit back: p_i = sum_j q_{j0} q_{j1}^i q_{j0}."""
    if q.n < 2 * (h + 1):
        raise ValueError("tuple too short for the reduction parameters")
    mats = []
    for i in range(1, n + 1):
        acc = DenseMatrix.zeros(q.field, q.d, q.d)
        for j in range(h + 1):
            q0 = q.mats[2 * j]
            q1 = q.mats[2 * j + 1]
            pw = DenseMatrix.identity(q.field, q.d)
            for _ in range(i):
                pw = pw.matmul(q1)
            acc = acc.add(q0.matmul(pw).matmul(q0))
        mats.append(acc)
    return MatrixTuple(q.field, q.d, tuple(mats))


# -- circuit file format -----------------------------------------------------


def dump_circuit(c: RationalCircuit) -> str:
    lines = []
    for i, node in enumerate(c.nodes):
        kind = node[0]
        if kind == "const":
            v = Fraction(node[1])
            txt = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
            lines.append(f"{i} const {txt}")
        elif kind == "var":
            lines.append(f"{i} var {node[1]}")
        elif kind == "inv":
            lines.append(f"{i} inv {node[1]}")
        else:
            lines.append(f"{i} {kind} {node[1]} {node[2]}")
    lines.append(f"output {c.output}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> RationalCircuit:
    raw: dict[int, tuple] = {}
    output = None
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if parts[0] == "output":
            output = int(parts[1])
            continue
        nid = int(parts[0])
        kind = parts[1]
        if kind == "const":
            raw[nid] = ("const", Fraction(parts[2]))
        elif kind == "var":
            raw[nid] = ("var", int(parts[2]))
        elif kind == "inv":
            raw[nid] = ("inv", int(parts[2]))
        elif kind in ("add", "sub", "mul"):
            raw[nid] = (kind, int(parts[2]), int(parts[3]))
        else:
            raise ValueError(f"unknown node kind {kind!r}")
    if output is None:
        raise ValueError("missing output line")
    order: list[int] = []
    state: dict[int, int] = {}

    def visit(i: int):
        st = state.get(i, 0)
        if st == 1:
            raise ValueError("circuit file contains a cycle")
        if st == 2:
            return
        state[i] = 1
        node = raw[i]
        if node[0] not in ("const", "var"):
            for ch in node[1:]:
                visit(ch)
        state[i] = 2
        order.append(i)

    for i in raw:
        visit(i)
    remap = {old: new for new, old in enumerate(order)}
    nodes = []
    for old in order:
        node = raw[old]
        if node[0] in ("const", "var"):
            nodes.append(node)
        elif node[0] == "inv":
            nodes.append(("inv", remap[node[1]]))
        else:
            nodes.append((node[0], remap[node[1]], remap[node[2]]))
    return RationalCircuit(tuple(nodes), remap[output],
                           max((n[1] for n in nodes if n[0] == "var"), default=0))


def read_circuit(path: str) -> RationalCircuit:
    with open(path) as fh:
        return parse_circuit(fh.read())


def write_circuit(c: RationalCircuit, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dump_circuit(c))
