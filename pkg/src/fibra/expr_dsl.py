"""A small expression language for node controls, symmetric in same-type inputs.

Input states are reachable only through ``sum``/``mean`` aggregators over a
named type group, so every expressible control is invariant under
permutations of same-type inputs by construction.  Aggregation order is
canonicalized (input vectors sorted by value) before summation, which makes
that invariance exact in floating point, not just up to roundoff.

Grammar sketch::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" INT)?
    atom   := NUMBER | IDENT "[" INT "]" | FUNC "(" expr ")" | "(" expr ")"
            | ("sum" | "mean") "(" IDENT "in" "inputs" "[" TYPE "]" ")" "{" expr "}"

``x`` always refers to the root state; any other indexed identifier must be
bound by an enclosing aggregator.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EvaluationFault, InputError, SignatureMismatch
from .graphs import PhaseSpace

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
    "tanh": math.tanh,
}

KEYWORDS = {"sum", "mean", "in", "inputs"}

Pos = tuple[int, int]


class ExprSyntaxError(InputError):
    def __init__(self, message: str, pos: Pos):
        super().__init__(f"line {pos[0]}, column {pos[1]}: {message}")
        self.pos = pos


@dataclass(frozen=True)
class ControlSignature:
    """Root phase space plus the multiset of input phase spaces of a control."""

    root: PhaseSpace
    inputs: tuple[PhaseSpace, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(sorted(self.inputs, key=lambda s: s.name)))

    def groups(self) -> dict[str, tuple[int, int]]:
        """Input type groups: name -> (dim, count)."""
        counts = Counter(s.name for s in self.inputs)
        dims = {s.name: s.dim for s in self.inputs}
        return {name: (dims[name], counts[name]) for name in sorted(counts)}


# --- AST -------------------------------------------------------------------
# Positions are carried for error reporting but excluded from equality so
# that parse(unparse(ast)) == ast holds.


class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float
    pos: Pos = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class RootRef(Expr):
    index: int
    pos: Pos = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class InputRef(Expr):
    var: str
    index: int
    pos: Pos = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr
    pos: Pos = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr
    pos: Pos = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    pos: Pos = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int
    pos: Pos = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Aggregate(Expr):
    op: str  # "sum" | "mean"
    var: str
    group: str
    body: Expr
    pos: Pos = field(default=(1, 1), compare=False, repr=False)


# --- tokenizer -------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    pos: Pos


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        pos = (line, col)
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            try:
                float(text)
            except ValueError:
                raise ExprSyntaxError(f"bad number literal {text!r}", pos) from None
            tokens.append(_Token("num", text, pos))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(_Token("ident", src[i:j], pos))
            col += j - i
            i = j
            continue
        if c in "+-*/^()[]{}":
            tokens.append(_Token("op", c, pos))
            i += 1
            col += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", pos)
    tokens.append(_Token("end", "", (line, col)))
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, src: str, signature: ControlSignature):
        self.tokens = _tokenize(src)
        self.k = 0
        self.signature = signature
        self.groups = signature.groups()
        self.scope: list[tuple[str, str]] = []  # (var, group name)

    def peek(self) -> _Token:
        return self.tokens[self.k]

    def advance(self) -> _Token:
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            raise ExprSyntaxError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek().text in ("+", "-"):
            op = self.advance()
            right = self.term()
            left = BinOp(op.text, left, right, pos=op.pos)
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.advance()
            right = self.factor()
            left = BinOp(op.text, left, right, pos=op.pos)
        return left

    def factor(self) -> Expr:
        tok = self.peek()
        if tok.text == "-":
            self.advance()
            return Neg(self.factor(), pos=tok.pos)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().text == "^":
            op = self.advance()
            sign = 1
            if self.peek().text == "-":
                self.advance()
                sign = -1
            tok = self.peek()
            if tok.kind != "num" or not tok.text.isdigit():
                raise ExprSyntaxError("exponent must be an integer literal", tok.pos)
            self.advance()
            return Pow(base, sign * int(tok.text), pos=op.pos)
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text), pos=tok.pos)
        if tok.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            if tok.text in ("sum", "mean"):
                return self.aggregate()
            if tok.text in FUNCTIONS:
                self.advance()
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg, pos=tok.pos)
            return self.reference()
        raise ExprSyntaxError(f"expected an expression, found {tok.text or 'end of input'!r}", tok.pos)

    def reference(self) -> Expr:
        name_tok = self.advance()
        name = name_tok.text
        self.expect("[")
        idx_tok = self.peek()
        if idx_tok.kind != "num" or not idx_tok.text.isdigit():
            raise ExprSyntaxError("index must be a non-negative integer", idx_tok.pos)
        self.advance()
        index = int(idx_tok.text)
        self.expect("]")
        if name == "x":
            if index >= self.signature.root.dim:
                raise ExprSyntaxError(
                    f"x[{index}] out of range for root space {self.signature.root.name}", name_tok.pos
                )
            return RootRef(index, pos=name_tok.pos)
        for var, group in reversed(self.scope):
            if var == name:
                dim = self.groups[group][0]
                if index >= dim:
                    raise ExprSyntaxError(
                        f"{name}[{index}] out of range for input type {group}", name_tok.pos
                    )
                return InputRef(name, index, pos=name_tok.pos)
        raise ExprSyntaxError("input reference outside aggregator", name_tok.pos)

    def aggregate(self) -> Expr:
        op_tok = self.advance()
        self.expect("(")
        var_tok = self.peek()
        if var_tok.kind != "ident" or var_tok.text in KEYWORDS or var_tok.text == "x" or var_tok.text in FUNCTIONS:
            raise ExprSyntaxError("expected a fresh aggregator variable name", var_tok.pos)
        self.advance()
        in_tok = self.peek()
        if in_tok.text != "in":
            raise ExprSyntaxError(f"expected 'in', found {in_tok.text!r}", in_tok.pos)
        self.advance()
        inputs_tok = self.peek()
        if inputs_tok.text != "inputs":
            raise ExprSyntaxError(f"expected 'inputs', found {inputs_tok.text!r}", inputs_tok.pos)
        self.advance()
        self.expect("[")
        group_tok = self.peek()
        if group_tok.kind not in ("ident", "num"):
            raise ExprSyntaxError("expected an input type name", group_tok.pos)
        self.advance()
        group = group_tok.text
        if group not in self.groups:
            known = ", ".join(self.groups) or "none"
            raise ExprSyntaxError(
                f"type name mismatch: no input group {group!r} (signature has: {known})", group_tok.pos
            )
        self.expect("]")
        self.expect(")")
        self.expect("{")
        self.scope.append((var_tok.text, group))
        try:
            body = self.expr()
        finally:
            self.scope.pop()
        self.expect("}")
        return Aggregate(op_tok.text, var_tok.text, group, body, pos=op_tok.pos)


def parse(src: str, signature: ControlSignature) -> Expr:
    """Parse and validate one output-component expression against a signature."""
    return _Parser(src, signature).parse()


@dataclass(frozen=True)
class ControlExpr:
    """A complete control: one component expression per root coordinate."""

    signature: ControlSignature
    components: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.components) != self.signature.root.dim:
            raise SignatureMismatch(
                f"{len(self.components)} components for root space {self.signature.root.name}"
            )

    def sources(self) -> tuple[str, ...]:
        return tuple(unparse(c) for c in self.components)


def parse_control(sources: Sequence[str] | str, signature: ControlSignature) -> ControlExpr:
    if isinstance(sources, str):
        sources = [sources]
    return ControlExpr(signature, tuple(parse(s, signature) for s in sources))


# --- printing --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4, "atom": 5}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    if isinstance(e, Pow):
        return _PREC["pow"]
    return _PREC["atom"]


def _wrap(e: Expr, parent_prec: int, *, strict: bool = False) -> str:
    s = unparse(e)
    p = _prec(e)
    if p < parent_prec or (strict and p == parent_prec):
        return f"({s})"
    return s


def unparse(e: Expr) -> str:
    """Render an AST back to source; parse(unparse(e)) == e."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, RootRef):
        return f"x[{e.index}]"
    if isinstance(e, InputRef):
        return f"{e.var}[{e.index}]"
    if isinstance(e, Call):
        return f"{e.func}({unparse(e.arg)})"
    if isinstance(e, Neg):
        return f"-{_wrap(e.arg, _PREC['neg'])}"
    if isinstance(e, BinOp):
        # the grammar is left-associative, so a right child at equal
        # precedence must keep its parentheses
        left = _wrap(e.left, _PREC[e.op])
        right = _wrap(e.right, _PREC[e.op], strict=True)
        return f"{left} {e.op} {right}"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC['pow'], strict=True)}^{e.exponent}"
    if isinstance(e, Aggregate):
        return f"{e.op}({e.var} in inputs[{e.group}]) {{ {unparse(e.body)} }}"
    raise TypeError(f"not an expression node: {e!r}")


# --- evaluation ------------------------------------------------------------


def _space_name(t: PhaseSpace | str) -> str:
    return t if isinstance(t, str) else t.name


def group_inputs(
    inputs: Sequence[tuple[PhaseSpace | str, np.ndarray]],
    known_groups: Mapping[str, tuple[int, int]],
) -> dict[str, list[np.ndarray]]:
    """Bucket input states by type name; canonical (sorted-by-value) order per bucket."""
    buckets: dict[str, list[np.ndarray]] = {name: [] for name in known_groups}
    for t, state in inputs:
        name = _space_name(t)
        if name not in buckets:
            raise SignatureMismatch(f"input of type {name} not in signature groups {sorted(buckets)}")
        vec = np.asarray(state, dtype=float).reshape(-1)
        if vec.shape[0] != known_groups[name][0]:
            raise SignatureMismatch(
                f"input of type {name} has dimension {vec.shape[0]}, expected {known_groups[name][0]}"
            )
        buckets[name].append(vec)
    for name in buckets:
        buckets[name].sort(key=lambda v: tuple(v))
    return buckets


def _eval(e: Expr, root: np.ndarray, buckets: Mapping[str, list[np.ndarray]], env: dict[str, np.ndarray]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, RootRef):
        return float(root[e.index])
    if isinstance(e, InputRef):
        return float(env[e.var][e.index])
    if isinstance(e, Neg):
        return -_eval(e.arg, root, buckets, env)
    if isinstance(e, BinOp):
        a = _eval(e.left, root, buckets, env)
        b = _eval(e.right, root, buckets, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        try:
            return a / b
        except ZeroDivisionError:
            raise EvaluationFault(f"division by zero at line {e.pos[0]}, column {e.pos[1]}") from None
    if isinstance(e, Pow):
        base = _eval(e.base, root, buckets, env)
        try:
            return float(base**e.exponent)
        except ZeroDivisionError:
            raise EvaluationFault(f"zero raised to a negative power at line {e.pos[0]}, column {e.pos[1]}") from None
        except OverflowError:  # propagate as inf, IEEE style; the integrator faults on it
            sign = -1.0 if (base < 0 and e.exponent % 2 == 1) else 1.0
            return sign * math.inf
    if isinstance(e, Call):
        arg = _eval(e.arg, root, buckets, env)
        try:
            return float(FUNCTIONS[e.func](arg))
        except ValueError as exc:
            raise EvaluationFault(f"{e.func} fault at line {e.pos[0]}, column {e.pos[1]}: {exc}") from None
        except OverflowError:
            return math.inf
    if isinstance(e, Aggregate):
        values = buckets[e.group]
        if e.op == "mean" and not values:
            raise EvaluationFault(f"mean of empty group at line {e.pos[0]}, column {e.pos[1]}")
        had, saved = e.var in env, env.get(e.var)
        total = 0.0
        for v in values:
            env[e.var] = v
            total += _eval(e.body, root, buckets, env)
        if had:
            env[e.var] = saved  # type: ignore[assignment]
        else:
            env.pop(e.var, None)
        if e.op == "mean":
            total /= len(values)
        return total
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(
    ctrl: ControlExpr,
    root: np.ndarray,
    inputs: Sequence[tuple[PhaseSpace | str, np.ndarray]],
) -> np.ndarray:
    """Evaluate a control at a root state and typed input states; returns the tangent vector."""
    root = np.asarray(root, dtype=float).reshape(-1)
    if root.shape[0] != ctrl.signature.root.dim:
        raise SignatureMismatch(
            f"root state has dimension {root.shape[0]}, expected {ctrl.signature.root.dim}"
        )
    buckets = group_inputs(inputs, ctrl.signature.groups())
    return np.array([_eval(c, root, buckets, {}) for c in ctrl.components])


@dataclass(frozen=True)
class RawControl:
    """Escape hatch: an opaque evaluable on (root state, ordered labelled input states).

    The callable receives the input states as (leaf edge id, state) pairs in
    edge-id lexicographic order, the canonical leaf order of the tree the
    control is bound to.  Its groupoid invariance is only ever checked by
    sampling.
    """

    signature: ControlSignature
    fn: Callable[[np.ndarray, tuple[tuple[str, np.ndarray], ...]], np.ndarray]
    invariance: str = "unchecked"  # "claimed" | "unchecked"

    def __post_init__(self):
        if self.invariance not in ("claimed", "unchecked"):
            raise ValueError("invariance must be 'claimed' or 'unchecked'")


def check_invariance(ctrl, a, net, trials: int = 200, seed: int = 0) -> float:
    """Max residual of the control under random same-type leaf permutations.

    Samples random root/input states and random elements of the node's
    automorphism group (leaf permutations); expression controls come out at
    exactly zero because aggregation is canonicalized.
    """
    from .dynamics import eval_control  # late import, avoids a module cycle
    from .input_trees import input_tree
    from .sampling import sample_space

    tree = input_tree(net, a)
    rng = np.random.default_rng(seed)
    groups = tree.type_groups()
    worst = 0.0
    for _ in range(trials):
        root = sample_space(tree.root_type, rng)
        values = {l.edge_id: sample_space(l.leaf_type, rng) for l in tree.leaves}
        sigma: dict[str, str] = {}
        for _, leaves in groups.items():
            ids = [l.edge_id for l in leaves]
            for src, dst in zip(ids, rng.permutation(ids)):
                sigma[src] = str(dst)
        base_inputs = [(l.edge_id, l.leaf_type, values[l.edge_id]) for l in tree.leaves]
        perm_inputs = [(l.edge_id, l.leaf_type, values[sigma[l.edge_id]]) for l in tree.leaves]
        before = eval_control(ctrl, root, base_inputs)
        after = eval_control(ctrl, root, perm_inputs)
        diff = np.abs(before - after)
        if diff.size:
            worst = max(worst, float(diff.max()))
    return worst
