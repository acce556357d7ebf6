"""Rewrite rules, polygraph instances and the rewriting engine.

Rules are written once with formula variables (atoms named ``?A``) and
instantiated when they match. Matching works on the port graph: an
occurrence of the left-hand side is grown from one anchor gate along the
rule's internal wires, then the matched gates are gathered into a
contiguous block by interchange moves. The block is compared with the
instantiated left-hand side up to interchange and, on success, the match
records the context ``after ∘ (id_gamma * lhs * id_delta) ∘ before``.
"""
from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, NamedTuple, Optional, Sequence

from .diagrams import (
    Control, Diagram, DiagramError, Step, _port_graph, ax, bot, commute,
    cut, identity, is_twisting, one, par, swap, tensor,
)
from .formulas import (
    BOT, ONE, Atom, DualAtom, Formula, Par, Tensor, closure, dual,
)
from .permutations import (
    Permutation, canonical_perm_diagram, ladder_left,
    ladder_right,
)

__all__ = [
    "RewriteRule", "RuleScheme", "Polygraph", "Match", "Reduction",
    "JoinResult", "StaleMatch", "UniverseNotClosed", "TWISTING_FAMILIES",
    "instantiate", "find_redexes", "iter_redexes", "apply", "normalize",
    "critical_peaks_S", "check_joinable", "interp_eval", "check_decrease",
    "twist_equivalent", "cut_eliminate", "trace_to_json", "trace_from_json",
    "replay", "swap_involution_variants", "POLYGRAPHS", "DERIVED",
]

FAMILIES = ("twist-involution", "yang-baxter", "naturality", "ax-involution",
            "cut-elimination", "unit")
TWISTING_FAMILIES = frozenset(FAMILIES[:4])
CUT_FAMILIES = frozenset(FAMILIES[4:])


class StaleMatch(DiagramError):
    pass


class UniverseNotClosed(ValueError):
    pass


@dataclass(frozen=True)
class RewriteRule:
    name: str
    lhs: Diagram
    rhs: Diagram
    family: str

    def __post_init__(self):
        if self.lhs.input != self.rhs.input or self.lhs.output != self.rhs.output:
            raise DiagramError(f"rule {self.name}: sides have different boundaries")
        if not self.lhs.steps:
            raise DiagramError(f"rule {self.name}: left-hand side has no gate")

    def reversed(self) -> "RewriteRule":
        return RewriteRule(_rev_name(self.name), self.rhs, self.lhs, self.family)


def _rev_name(name: str) -> str:
    return name[:-4] if name.endswith(".rev") else name + ".rev"


# unification of formula patterns ----------------------------------------------

def _is_var(f) -> bool:
    return isinstance(f, (Atom, DualAtom)) and f.name.startswith("?")


def _unify(pat, val, env: dict) -> bool:
    if isinstance(pat, Atom) and pat.name.startswith("?"):
        bound = env.get(pat.name)
        if bound is None:
            if isinstance(val, Control):
                return False
            env[pat.name] = val
            return True
        return bound == val
    if isinstance(pat, DualAtom) and pat.name.startswith("?"):
        if isinstance(val, Control):
            return False
        return _unify(Atom(pat.name), dual(val), env)
    if isinstance(pat, (Tensor, Par)):
        return (type(val) is type(pat) and _unify(pat.left, val.left, env)
                and _unify(pat.right, val.right, env))
    return pat == val


def _unify_gate(pg, g, env: dict) -> bool:
    if pg.name != g.name or len(pg.dom) != len(g.dom) or len(pg.cod) != len(g.cod):
        return False
    return (all(_unify(p, v, env) for p, v in zip(pg.dom, g.dom))
            and all(_unify(p, v, env) for p, v in zip(pg.cod, g.cod)))


# rule schemes -----------------------------------------------------------------

class _Proto(NamedTuple):
    lhs: Diagram
    root: int
    ins: list
    outs: list
    make: Callable[[dict], Optional[RewriteRule]]


def _proto(lhs: Diagram, make, root: Optional[int] = None) -> _Proto:
    ins, outs, _ = _port_graph(lhs.steps, len(lhs.input))
    if root is None:
        root = next((i for i, (g, _) in enumerate(lhs.steps) if g.name != "swap"), 0)
    return _Proto(lhs, root, ins, outs, make)


class RuleScheme:
    """A family of rules indexed by formulas.

    ``build`` maps keyword formulas to ``(lhs, rhs)``; the scheme's
    prototype is ``build`` applied to variables ``?A``, ``?B``, ...
    """

    def __init__(self, name: str, family: str, variables: Sequence[str],
                 build: Callable[..., tuple]):
        self.name = name
        self.family = family
        self.variables = tuple(variables)
        self.build = build
        lhs, _ = build(**{v: Atom("?" + v) for v in self.variables})
        self._protos = [_proto(lhs, self._make)]
        self.root_name = lhs.steps[self._protos[0].root].gate.name

    def __repr__(self) -> str:
        return f"RuleScheme({self.name!r}, {self.family!r})"

    @lru_cache(maxsize=4096)
    def _instance(self, args: tuple) -> Optional[RewriteRule]:
        try:
            lhs, rhs = self.build(**dict(zip(self.variables, args)))
        except DiagramError:
            return None
        return RewriteRule(self.name, lhs, rhs, self.family)

    def _make(self, env: dict) -> Optional[RewriteRule]:
        try:
            args = tuple(env["?" + v] for v in self.variables)
        except KeyError:
            return None
        return self._instance(args)

    def protos_at(self, steps, ins, outs, k) -> list:
        return self._protos if steps[k].gate.name == self.root_name else []

    def instance(self, **formulas) -> RewriteRule:
        rule = self._instance(tuple(formulas[v] for v in self.variables))
        if rule is None:
            raise DiagramError(f"rule {self.name} has no instance at {formulas}")
        return rule

    def reversed(self) -> "RuleScheme":
        build = self.build
        return RuleScheme(_rev_name(self.name), self.family, self.variables,
                          lambda **kw: build(**kw)[::-1])


class _ConcreteScheme:
    """Wraps a single concrete rule so that it can be matched like a scheme."""

    def __init__(self, rule: RewriteRule):
        self.name = rule.name
        self.family = rule.family
        self.rule = rule
        self._protos = [_proto(rule.lhs, lambda env: rule)]
        self.root_name = rule.lhs.steps[self._protos[0].root].gate.name

    def protos_at(self, steps, ins, outs, k) -> list:
        return self._protos if steps[k].gate.name == self.root_name else []


def _as_scheme(rule):
    return _ConcreteScheme(rule) if isinstance(rule, RewriteRule) else rule


# matching -------------------------------------------------------------------

class _Graph:
    """Port graph of a diagram's step sequence, shared by all matchers."""

    def __init__(self, d: Diagram):
        self.d = d
        self.steps = d.steps
        self.ins, self.outs, _ = _port_graph(d.steps, len(d.input))


def _embed(proto: _Proto, graph: _Graph, k0: int) -> Optional[tuple]:
    """Grow the occurrence of ``proto`` anchored at step ``k0``."""
    steps = graph.steps
    env: dict = {}
    if not _unify_gate(proto.lhs.steps[proto.root].gate, steps[k0].gate, env):
        return None
    pmap = {proto.root: k0}
    used = {k0}
    queue = [proto.root]
    while queue:
        j = queue.pop()
        k = pmap[j]
        links = [(src, graph.ins[k][p]) for p, src in enumerate(proto.ins[j])]
        links += [(dst, graph.outs[k][p]) for p, dst in enumerate(proto.outs[j])]
        for pend, dend in links:
            if not isinstance(pend[0], int):
                continue
            if not isinstance(dend[0], int) or dend[1] != pend[1]:
                return None
            j2, k2 = pend[0], dend[0]
            if j2 in pmap:
                if pmap[j2] != k2:
                    return None
                continue
            if k2 in used or not _unify_gate(proto.lhs.steps[j2].gate, steps[k2].gate, env):
                return None
            pmap[j2] = k2
            used.add(k2)
            queue.append(j2)
    if len(pmap) != len(proto.lhs.steps):
        return None
    return pmap, env


def _gather(graph: _Graph, chosen: set) -> Optional[tuple]:
    """Reorder steps so that ``chosen`` is contiguous.

    Returns ``(steps, start)`` or ``None`` when some step outside the set
    sits on a path between two chosen steps.
    """
    steps = graph.steps
    lo, hi = min(chosen), max(chosen)
    rank = {}
    # steps below the block that read, directly or not, an output of it
    later = set()
    todo = list(chosen)
    while todo:
        k = todo.pop()
        for dst in graph.outs[k]:
            j = dst[0]
            if not isinstance(j, int) or j > hi:
                continue
            if j in chosen:
                if k not in chosen:
                    return None
                continue
            if j not in later:
                later.add(j)
                todo.append(j)
    for k in range(lo, hi + 1):
        rank[k] = 1 if k in chosen else 2 if k in later else 0

    def promote(k: int) -> bool:
        todo = [k]
        while todo:
            x = todo.pop()
            if x in chosen:
                return False
            if rank[x] == 2 and x != k:
                continue
            rank[x] = 2
            for dst in graph.outs[x]:
                j = dst[0]
                if isinstance(j, int) and j <= hi and rank[j] != 2:
                    todo.append(j)
        return True

    while True:
        arr = [(rank[k], steps[k]) for k in range(lo, hi + 1)]
        orig = list(range(lo, hi + 1))
        failed = None
        for i in range(1, len(arr)):
            j = i
            while j > 0 and arr[j - 1][0] > arr[j][0]:
                r = commute(arr[j - 1][1], arr[j][1])
                if r is None:
                    failed = (arr[j][0], orig[j])
                    break
                arr[j - 1], arr[j] = (arr[j][0], r[0]), (arr[j - 1][0], r[1])
                orig[j - 1], orig[j] = orig[j], orig[j - 1]
                j -= 1
            if failed:
                break
        if failed is None:
            break
        r, k = failed
        if r != 0 or not promote(k):
            return None
    start = lo + sum(1 for x in arr if x[0] == 0)
    new = list(steps[:lo]) + [s for _, s in arr] + list(steps[hi + 1:])
    return new, start


class Match:
    """An occurrence of a rule's left-hand side inside a diagram."""

    __slots__ = ("rule", "anchor", "source", "occurrence", "_steps", "_start", "_count",
                 "_lo", "_frontier")

    def __init__(self, rule, anchor, source, occurrence, steps, start, count, lo, frontier):
        self.rule = rule
        self.anchor = anchor
        self.source = source
        self.occurrence = occurrence
        self._steps = steps
        self._start = start
        self._count = count
        self._lo = lo
        self._frontier = frontier

    def __repr__(self) -> str:
        return f"Match({self.rule.name!r}, anchor={self.anchor})"

    @property
    def before(self) -> Diagram:
        return Diagram(self.source.input, self._steps[:self._start])

    @property
    def gamma(self) -> tuple:
        return tuple(self._frontier[:self._lo])

    @property
    def delta(self) -> tuple:
        return tuple(self._frontier[self._lo + len(self.rule.lhs.input):])

    @property
    def after(self) -> Diagram:
        mid = self.gamma + self.rule.lhs.output + self.delta
        return Diagram(mid, self._steps[self._start + self._count:])

    def recompose(self, side: Diagram) -> Diagram:
        """``after ∘ (id_gamma * side * id_delta) ∘ before``."""
        body = [Step(g, o + self._lo) for g, o in side.steps]
        return Diagram(self.source.input, self._steps[:self._start] + tuple(body)
                       + self._steps[self._start + self._count:])


def _frontier(d: Diagram, steps: Sequence[Step], upto: int) -> list:
    w = list(d.input)
    for g, o in steps[:upto]:
        w[o:o + len(g.dom)] = g.cod
    return w


def _match_at(graph: _Graph, proto: _Proto, k0: int) -> Iterator[Match]:
    found = _embed(proto, graph, k0)
    if found is None:
        return
    pmap, env = found
    gathered = _gather(graph, set(pmap.values()))
    if gathered is None:
        return
    steps, start = gathered
    n = len(pmap)
    block = steps[start:start + n]
    frontier = _frontier(graph.d, steps, start)
    n_in = len(proto.lhs.input)
    first = block[0].offset
    for lo in range(max(0, first - n_in), min(first, len(frontier) - n_in) + 1):
        env2 = dict(env)
        if not all(_unify(p, v, env2) for p, v in zip(proto.lhs.input, frontier[lo:lo + n_in])):
            continue
        rule = proto.make(env2)
        if rule is None:
            continue
        try:
            piece = Diagram(frontier[lo:lo + n_in], [Step(g, o - lo) for g, o in block])
        except DiagramError:
            continue
        if piece == rule.lhs:
            anchor = graph.d.step_positions[k0]
            yield Match(rule, anchor, graph.d, frozenset(pmap.values()), tuple(steps),
                        start, n, lo, frontier)


def _iter(d: Diagram, schemes: Iterable, graph: Optional[_Graph] = None) -> Iterator[Match]:
    graph = graph or _Graph(d)
    schemes = [_as_scheme(s) for s in schemes]
    for k in range(len(d.steps)):
        for scheme in schemes:
            for proto in scheme.protos_at(graph.steps, graph.ins, graph.outs, k):
                yield from _match_at(graph, proto, k)


def iter_redexes(d: Diagram, rules: Iterable) -> Iterator[Match]:
    """Lazily enumerate matches of several rules, anchors in step order."""
    return _iter(d, list(rules))


def find_redexes(d: Diagram, rule) -> list:
    """All occurrences of ``rule`` (a rule or a scheme) in ``d``, leftmost first."""
    seen = set()
    out = []
    for m in _iter(d, [rule]):
        key = (m.rule.name, m.anchor, m.recompose(m.rule.rhs))
        if key in seen:
            continue
        seen.add(key)
        out.append(m)
    out.sort(key=lambda m: m.anchor)
    return out


def apply(d: Diagram, m: Match) -> Diagram:
    """Replace the matched left-hand side by the right-hand side."""
    if m.source is not d and m.source != d:
        raise StaleMatch(f"match of {m.rule.name} at {m.anchor} was found in another diagram")
    return m.recompose(m.rule.rhs)


# rule catalogue -----------------------------------------------------------------

def _d(word, *steps) -> Diagram:
    return Diagram(word, [Step(g, o) for g, o in steps])


def _ss(A, B):
    return _d([A, B], (swap(A, B), 0), (swap(B, A), 0)), identity([A, B])


def _yb(A, B, C):
    lhs = _d([A, B, C], (swap(A, B), 0), (swap(A, C), 1), (swap(B, C), 0))
    rhs = _d([A, B, C], (swap(B, C), 1), (swap(A, C), 0), (swap(A, B), 1))
    return lhs, rhs


def _gate_nat_left(make_gate):
    # the gate's output crosses a wire on its right: slide the gate below
    def build(A, B, C):
        g = make_gate(A, B)
        out = g.cod[0]
        lhs = _d([A, B, C], (g, 0), (swap(out, C), 0))
        rhs = _d([A, B, C], (swap(B, C), 1), (swap(A, C), 0), (g, 1))
        return lhs, rhs
    return build


def _gate_nat_right(make_gate):
    def build(A, B, C):
        g = make_gate(B, C)
        out = g.cod[0]
        lhs = _d([A, B, C], (g, 1), (swap(A, out), 0))
        rhs = _d([A, B, C], (swap(A, B), 0), (swap(A, C), 1), (g, 0))
        return lhs, rhs
    return build


def _ax_slide_left(A, B):
    # a wire crossing both outputs of an axiom from the right
    lhs = _d([B], (ax(A), 0), (swap(dual(A), B), 1), (swap(A, B), 0))
    return lhs, _d([B], (ax(A), 1))


def _ax_slide_right(A, B):
    lhs = _d([B], (ax(A), 1), (swap(B, A), 0), (swap(B, dual(A)), 1))
    return lhs, _d([B], (ax(A), 0))


def _cut_slide_left(A, B):
    lhs = _d([A, dual(A), B], (swap(dual(A), B), 1), (swap(A, B), 0), (cut(A), 1))
    return lhs, _d([A, dual(A), B], (cut(A), 0))


def _cut_slide_right(A, B):
    lhs = _d([B, A, dual(A)], (swap(B, A), 0), (swap(B, dual(A)), 1), (cut(A), 0))
    return lhs, _d([B, A, dual(A)], (cut(A), 1))


def _ax_inv(A):
    return _d([], (ax(A), 0), (swap(A, dual(A)), 0)), _d([], (ax(dual(A)), 0))


def _cut_inv(A):
    return (_d([dual(A), A], (swap(dual(A), A), 0), (cut(A), 0)),
            _d([dual(A), A], (cut(dual(A)), 0)))


def _ctrl_ax_inv(A):
    return (_d([], (ax(A, True), 0), (swap(A, dual(A)), 1)),
            _d([], (ax(dual(A), True), 0)))


def _unit_slide_left(make_unit):
    def build(A):
        u = make_unit()
        x = u.cod[0]
        return _d([A], (u, 0), (swap(x, A), 0)), _d([A], (u, 1))
    return build


def _unit_slide_right(make_unit):
    def build(A):
        u = make_unit()
        x = u.cod[0]
        return _d([A], (u, 1), (swap(A, x), 0)), _d([A], (u, 0))
    return build


def _cut_par_ten(A, B):
    word = [A, B, dual(B), dual(A)]
    lhs = _d(word, (par(A, B), 0), (tensor(dual(B), dual(A)), 1), (cut(Par(A, B)), 0))
    return lhs, _d(word, (cut(B), 1), (cut(A), 0))


def _cut_ten_par(A, B):
    word = [A, B, dual(B), dual(A)]
    lhs = _d(word, (tensor(A, B), 0), (par(dual(B), dual(A)), 1), (cut(Tensor(A, B)), 0))
    return lhs, _d(word, (cut(B), 1), (cut(A), 0))


def _cut_bot_one():
    return _d([], (bot(), 0), (one(), 1), (cut(BOT), 0)), identity()


def _cut_one_bot():
    return _d([], (one(), 0), (bot(), 1), (cut(ONE), 0)), identity()


def _ax_swap_cut(A):
    lhs = _d([A], (ax(dual(A)), 0), (swap(A, A), 1), (cut(dual(A)), 0))
    return lhs, identity([A])


def _then(d: Diagram, steps: Iterable[Step], shift: int) -> list:
    return list(d.steps) + [Step(g, o + shift) for g, o in steps]


def ax_cut_left_rule(A: Formula, gamma: Sequence) -> RewriteRule:
    """Axiom on the left, its dual output laddered across ``gamma`` into a cut."""
    gamma = tuple(gamma)
    k = len(gamma)
    word = gamma + (A,)
    steps = [Step(ax(A), 0)]
    steps += [Step(g, o + 1) for g, o in ladder_left((dual(A),) + gamma).steps]
    steps.append(Step(cut(dual(A)), k + 1))
    lhs = Diagram(word, steps)
    return RewriteRule("ax_cut_left", lhs, ladder_right(word), "cut-elimination")


def ax_cut_right_rule(A: Formula, gamma: Sequence) -> RewriteRule:
    gamma = tuple(gamma)
    k = len(gamma)
    word = (A,) + gamma
    steps = [Step(ax(dual(A)), k + 1)]
    steps += [Step(g, o + 1) for g, o in ladder_right(gamma + (dual(A),)).steps]
    steps.append(Step(cut(A), 0))
    lhs = Diagram(word, steps)
    return RewriteRule("ax_cut_right", lhs, ladder_left(word), "cut-elimination")


def ax_perm_cut_rule(A: Formula, gamma: Sequence, sigma: Permutation) -> RewriteRule:
    gamma = tuple(gamma)
    k = len(gamma)
    word = (A,) + gamma
    perm = canonical_perm_diagram(sigma, gamma)
    steps = [Step(ax(A), k + 1)]
    steps += [Step(g, o + 1) for g, o in ladder_right(gamma + (A,)).steps]
    steps.append(Step(swap(A, A), 0))
    steps += [Step(g, o + 2) for g, o in perm.steps]
    steps += [Step(g, o + 1) for g, o in ladder_left((A,) + perm.output).steps]
    steps.append(Step(cut(A), k + 1))
    lhs = Diagram(word, steps)
    rhs = Diagram(word, [Step(g, o + 1) for g, o in perm.steps])
    return RewriteRule("ax_perm_cut", lhs, rhs, "cut-elimination")


def _follow_back(graph: _Graph, end: tuple, enter: int, leave: int) -> tuple:
    """Walk backwards from input ``end`` through swaps entered at port
    ``enter`` and left at ``leave``; return the swaps crossed and the port
    the walk stopped at."""
    crossed = []
    src = end
    while isinstance(src[0], int):
        g = graph.steps[src[0]].gate
        if g.name != "swap" or src[1] != leave:
            break
        crossed.append(src[0])
        src = graph.ins[src[0]][enter]
    return crossed, src


class _LadderScheme:
    """Axiom/cut rules whose left-hand side contains ladders of any length.

    Instances are built lazily from the shape found around each cut.
    """

    root_name = "cut"

    def __init__(self, name: str):
        self.name = name
        self.family = "cut-elimination"

    def __repr__(self) -> str:
        return f"RuleScheme({self.name!r}, {self.family!r})"

    def _protos(self, rule: Optional[RewriteRule]) -> list:
        if rule is None:
            return []
        root = next(i for i, (g, _) in enumerate(rule.lhs.steps) if g.name == "cut")
        return [_proto(rule.lhs, lambda env: rule, root)]

    def protos_at(self, steps, ins, outs, k) -> list:
        g = steps[k].gate
        if g.name != "cut" or len(g.dom) != 2:
            return []
        graph = _GraphView(steps, ins, outs)
        if self.name == "ax_cut_left":
            crossed, src = _follow_back(graph, ins[k][0], 0, 1)
            if not isinstance(src[0], int) or steps[src[0]].gate.name != "ax" or src[1] != 1:
                return []
            A = steps[src[0]].gate.params[0]
            gamma = [steps[s].gate.dom[1] for s in reversed(crossed)]
            return self._protos(_safe(ax_cut_left_rule, A, gamma))
        if self.name == "ax_cut_right":
            crossed, src = _follow_back(graph, ins[k][1], 1, 0)
            if not isinstance(src[0], int) or steps[src[0]].gate.name != "ax" or src[1] != 0:
                return []
            A = g.params[0]
            gamma = [steps[s].gate.dom[0] for s in crossed]
            return self._protos(_safe(ax_cut_right_rule, A, gamma))
        # ax_perm_cut: right input straight from an axiom, left input laddered
        # from the output of the swap that crosses the two axiom strands
        src = ins[k][1]
        if not isinstance(src[0], int) or steps[src[0]].gate.name != "ax" or src[1] != 1:
            return []
        a_idx = src[0]
        crossed, top = _follow_back(graph, ins[k][0], 0, 1)
        if not isinstance(top[0], int) or steps[top[0]].gate.name != "swap" or top[1] != 1:
            return []
        mid = top[0]
        rcrossed, rsrc = _follow_back(graph, ins[mid][1], 1, 0)
        if rsrc != (a_idx, 0) or len(rcrossed) != len(crossed):
            return []
        A = g.params[0]
        gamma = [steps[s].gate.dom[0] for s in rcrossed]
        sigma = _trace_perm(graph, rcrossed, list(reversed(crossed)))
        if sigma is None:
            return []
        return self._protos(_safe(ax_perm_cut_rule, A, gamma, sigma))


class _GraphView(NamedTuple):
    steps: tuple
    ins: list
    outs: list


def _safe(fn, *args) -> Optional[RewriteRule]:
    try:
        return fn(*args)
    except (DiagramError, ValueError):
        return None


def _trace_perm(graph, starts: list, ends: list) -> Optional[Permutation]:
    """Follow each strand leaving ``starts[i]`` (port 1) through swaps until
    it enters one of ``ends`` (port 1); ``starts`` listed by the strand's
    position in the word, which is the reverse of the crossing order."""
    k = len(starts)
    order = list(reversed(starts))
    targets = {s: j for j, s in enumerate(ends)}
    images = []
    for s in order:
        dst = graph.outs[s][1]
        while True:
            if not isinstance(dst[0], int):
                return None
            if dst[0] in targets:
                if dst[1] != 1:
                    return None
                images.append(targets[dst[0]] + 1)
                break
            if graph.steps[dst[0]].gate.name != "swap":
                return None
            dst = graph.outs[dst[0]][1 - dst[1]]
    try:
        return Permutation(tuple(images))
    except ValueError:
        return None


def _scheme(name, family, variables, build):
    return RuleScheme(name, family, variables, build)


def _twist_schemes(control: bool, units: bool) -> list:
    out = [
        _scheme("swap_swap", "twist-involution", "AB", _ss),
        _scheme("yang_baxter", "yang-baxter", "ABC", _yb),
    ]
    if not control:
        out += [
            _scheme("ax_slide_left", "naturality", "AB", _ax_slide_left),
            _scheme("ax_slide_right", "naturality", "AB", _ax_slide_right),
            _scheme("cut_slide_left", "naturality", "AB", _cut_slide_left),
            _scheme("cut_slide_right", "naturality", "AB", _cut_slide_right),
            _scheme("tensor_slide_left", "naturality", "ABC", _gate_nat_left(tensor)),
            _scheme("tensor_slide_right", "naturality", "ABC", _gate_nat_right(tensor)),
        ]
    out += [
        _scheme("par_slide_left", "naturality", "ABC", _gate_nat_left(par)),
        _scheme("par_slide_right", "naturality", "ABC", _gate_nat_right(par)),
    ]
    if control:
        out.append(_scheme("ax_involution", "ax-involution", "A", _ctrl_ax_inv))
    else:
        out += [
            _scheme("ax_involution", "ax-involution", "A", _ax_inv),
            _scheme("cut_involution", "ax-involution", "A", _cut_inv),
        ]
    if units:
        out += [
            _scheme("bot_slide_left", "naturality", "A", _unit_slide_left(bot)),
            _scheme("bot_slide_right", "naturality", "A", _unit_slide_right(bot)),
        ]
        if not control:
            out += [
                _scheme("one_slide_left", "naturality", "A", _unit_slide_left(one)),
                _scheme("one_slide_right", "naturality", "A", _unit_slide_right(one)),
            ]
    return out


def _cut_schemes(units: bool) -> list:
    out = [
        _scheme("cut_par_tensor", "cut-elimination", "AB", _cut_par_ten),
        _scheme("cut_tensor_par", "cut-elimination", "AB", _cut_ten_par),
        _LadderScheme("ax_cut_left"),
        _LadderScheme("ax_cut_right"),
        _scheme("ax_swap_cut", "cut-elimination", "A", _ax_swap_cut),
        _LadderScheme("ax_perm_cut"),
    ]
    if units:
        out += [
            _scheme("cut_bot_one", "unit", "", _cut_bot_one),
            _scheme("cut_one_bot", "unit", "", _cut_one_bot),
        ]
    return out


# polygraphs --------------------------------------------------------------------

POLYGRAPHS = ("S", "MLL", "MLLc", "ctrlMLL", "ctrlMLLc")


@dataclass(frozen=True)
class Polygraph:
    name: str
    universe: frozenset
    gate_names: tuple
    rules: tuple
    control: bool
    units: bool

    def twisting(self, label) -> bool:
        return is_twisting(label)

    @property
    def twisting_rules(self) -> tuple:
        return tuple(r for r in self.rules if r.family in TWISTING_FAMILIES)

    @property
    def cut_rules(self) -> tuple:
        return tuple(r for r in self.rules if r.family in CUT_FAMILIES)

    def rule(self, name: str):
        for r in self.rules:
            if r.name == name:
                return r
        if name.endswith(".rev"):
            base = self.rule(name[:-4])
            if isinstance(base, RuleScheme):
                return base.reversed()
        raise KeyError(f"polygraph {self.name} has no rule {name!r}")

    def admits(self, d: Diagram) -> bool:
        """Whether every gate of ``d`` belongs to this polygraph's signature."""
        for g, _ in d.steps:
            if g.name not in self.gate_names:
                return False
            if g.name != "swap" and g.control != (self.control and g.name not in ("par", "bot")):
                return False
        return True


def instantiate(name: str, universe: Iterable = ()) -> Polygraph:
    """Build one of the bundled polygraphs over a formula universe.

    The universe must already be closed under subformulas and duals; rules
    are schematic in formulas and instantiated on demand when they match.
    """
    if name not in POLYGRAPHS:
        raise ValueError(f"unknown polygraph {name!r}; expected one of {', '.join(POLYGRAPHS)}")
    universe = frozenset(universe)
    missing = closure(universe) - universe
    if missing:
        example = sorted(str(f) for f in missing)[0]
        raise UniverseNotClosed(f"universe is not closed under subformulas and duals "
                                f"(missing {example})")
    if name == "S":
        rules = (_scheme("swap_swap", "twist-involution", "AB", _ss),
                 _scheme("yang_baxter", "yang-baxter", "ABC", _yb))
        return Polygraph(name, universe, ("swap",), rules, False, False)
    control = name.startswith("ctrl")
    units = name.endswith("c")
    gates = ("tensor", "par", "ax", "cut", "swap") + (("one", "bot") if units else ())
    rules = tuple(_twist_schemes(control, units))
    if not control:
        rules += tuple(_cut_schemes(units))
    return Polygraph(name, universe, gates, rules, control, units)


# derived moves used by cut elimination -------------------------------------------

def _ax_hop_left(A, B):
    # reverse axiom slide followed by a swap cancellation: the left output
    # of the axiom stops crossing B, the right output crosses it instead
    lhs = _d([B], (ax(A), 1), (swap(B, A), 0))
    rhs = _d([B], (ax(A), 0), (swap(dual(A), B), 1))
    return lhs, rhs


def _ax_hop_right(A, B):
    lhs = _d([B], (ax(A), 0), (swap(dual(A), B), 1))
    rhs = _d([B], (ax(A), 1), (swap(B, A), 0))
    return lhs, rhs


DERIVED = {
    "ax_hop_left": _scheme("ax_hop_left", "naturality", "AB", _ax_hop_left),
    "ax_hop_right": _scheme("ax_hop_right", "naturality", "AB", _ax_hop_right),
}


def _lookup(p: Polygraph, name: str):
    if name in DERIVED:
        return DERIVED[name]
    return p.rule(name)


# normalisation ---------------------------------------------------------------------

class Reduction(NamedTuple):
    diagram: Diagram
    trace: list
    exhausted: bool


def _all_matches(d: Diagram, rules: Sequence) -> list:
    graph = _Graph(d)
    out = list(_iter(d, rules, graph))
    out.sort(key=lambda m: m.anchor)
    return out


def normalize(d: Diagram, p: Polygraph, budget: int = 10000, strategy: str = "leftmost",
              seed: Optional[int] = None, rules: Optional[Sequence] = None) -> Reduction:
    """Rewrite until no rule applies or ``budget`` steps were taken.

    ``strategy`` is ``"leftmost"`` (smallest anchor in the canonical
    layering, earliest layer first) or ``"random"`` (uniform among all
    redexes, seeded by ``seed``).
    """
    rules = list(p.rules if rules is None else rules)
    rng = random.Random(seed)
    trace = []
    while True:
        if strategy == "leftmost":
            m = min(_iter(d, rules), key=lambda m: m.anchor, default=None)
        elif strategy == "random":
            ms = list(_iter(d, rules))
            m = rng.choice(ms) if ms else None
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        if m is None:
            return Reduction(d, trace, False)
        if len(trace) >= budget:
            return Reduction(d, trace, True)
        trace.append((m.rule.name, m.anchor))
        d = apply(d, m)


# confluence of the permutation polygraph -----------------------------------------

def _x(n: int) -> list:
    return [Atom("x")] * n


def critical_peaks_S() -> list:
    """The five minimal critical branchings of the swap polygraph.

    Each entry is ``(diagram, m1, m2)`` with two overlapping redexes.
    """
    x = Atom("x")
    s = swap(x, x)
    shapes = [
        (2, [0, 0, 0]),
        (3, [0, 0, 1, 0]),
        (3, [0, 1, 0, 0]),
        (3, [0, 1, 0, 1, 0]),
        (4, [0, 1, 0, 2, 1, 0]),
    ]
    p = instantiate("S")
    peaks = []
    for n, offsets in shapes:
        d = Diagram(_x(n), [Step(s, o) for o in offsets])
        ms = _all_matches(d, p.rules)
        pair = next((m1, m2) for i, m1 in enumerate(ms) for m2 in ms[i + 1:]
                    if m1.occurrence & m2.occurrence)
        peaks.append((d, pair[0], pair[1]))
    return peaks


class JoinResult(NamedTuple):
    joinable: bool
    exhausted: bool
    common: Optional[Diagram] = None

    def __bool__(self) -> bool:
        return self.joinable


def check_joinable(peak: Diagram, m1: Match, m2: Match, budget: int = 100,
                   rules: Optional[Sequence] = None) -> JoinResult:
    """Breadth-first search for a common reduct of the two one-step reducts."""
    if rules is None:
        rules = instantiate("S").rules
    a, b = apply(peak, m1), apply(peak, m2)
    if a == b:
        return JoinResult(True, False, a)
    seen = ({a}, {b})
    queues = (deque([a]), deque([b]))
    spent = 0
    while queues[0] or queues[1]:
        side = 0 if (queues[0] and (len(queues[0]) <= len(queues[1]) or not queues[1])) else 1
        if spent >= budget:
            return JoinResult(False, True)
        spent += 1
        cur = queues[side].popleft()
        for m in _iter(cur, rules):
            nxt = apply(cur, m)
            if nxt in seen[1 - side]:
                return JoinResult(True, False, nxt)
            if nxt not in seen[side]:
                seen[side].add(nxt)
                queues[side].append(nxt)
    return JoinResult(False, False)


def interp_eval(d: Diagram, values: Sequence[int]) -> tuple:
    """Monotone interpretation of a swap diagram: ``swap(x, y) = (x + y, x)``."""
    if len(values) != len(d.input):
        raise ValueError(f"expected {len(d.input)} values, got {len(values)}")
    v = list(values)
    for g, o in d.steps:
        if not g.twisting:
            raise DiagramError(f"gate {g} has no interpretation")
        x, y = v[o], v[o + 1]
        v[o], v[o + 1] = x + y, x
    return tuple(v)


def _rule_of(rule) -> RewriteRule:
    if isinstance(rule, RewriteRule):
        return rule
    return rule.instance(**{v: Atom("x") for v in rule.variables})


def check_decrease(rule, samples: int = 100, seed: Optional[int] = 0) -> bool:
    """Strict decrease of the interpretation on sampled and corner inputs.

    The order is the product order: every component at least as large and
    one of them strictly larger.
    """
    rule = _rule_of(rule)
    n = len(rule.lhs.input)
    rng = random.Random(seed)
    vectors = [tuple(rng.randint(1, 50) for _ in range(n)) for _ in range(samples)]
    vectors += [tuple(100 if (mask >> i) & 1 else 1 for i in range(n)) for mask in range(2 ** n)]
    for v in vectors:
        left, right = interp_eval(rule.lhs, v), interp_eval(rule.rhs, v)
        if not (all(x >= y for x, y in zip(left, right)) and left != right):
            return False
    return True


# equivalence modulo twisting relations ---------------------------------------------

def _equivalence_rules(p: Polygraph) -> list:
    # involutions only ever shrink the diagram: run backwards, each one can be
    # applied again to its own output and the class becomes infinite
    out = []
    for r in p.twisting_rules:
        out.append(r)
        if r.family not in ("twist-involution", "ax-involution"):
            out.append(r.reversed())
    return out


def twist_equivalent(a: Diagram, b: Diagram, p: Polygraph, budget: int = 10000) -> str:
    """Decide ``a ≃ b`` by bidirectional search over the twisting relations.

    Yang-Baxter and the naturality slides are used in both directions; the
    swap and axiom involutions only in the shrinking direction, which keeps
    every reachable set finite. Returns ``"yes"``, ``"no"`` (both reachable sets exhausted)
    or ``"unknown"`` (budget spent).
    """
    if a.input != b.input or a.output != b.output:
        return "no"
    if a == b:
        return "yes"
    rules = _equivalence_rules(p)
    seen = ({a}, {b})
    queues = (deque([a]), deque([b]))
    spent = 0
    while queues[0] or queues[1]:
        side = 0 if queues[0] and (not queues[1] or len(queues[0]) <= len(queues[1])) else 1
        if spent >= budget:
            return "unknown"
        spent += 1
        cur = queues[side].popleft()
        for m in _iter(cur, rules):
            nxt = apply(cur, m)
            if nxt in seen[1 - side]:
                return "yes"
            if nxt not in seen[side]:
                seen[side].add(nxt)
                queues[side].append(nxt)
    # both reachable sets are complete and disjoint
    return "no"


def swap_involution_variants(d: Diagram) -> Iterator[Diagram]:
    """Every diagram obtained by inserting a cancelling pair of swaps."""
    frontier = list(d.input)
    steps = list(d.steps)
    for k in range(len(steps) + 1):
        for o in range(len(frontier) - 1):
            x, y = frontier[o], frontier[o + 1]
            if is_twisting(x) and is_twisting(y):
                pair = [Step(swap(x, y), o), Step(swap(y, x), o)]
                yield Diagram(d.input, steps[:k] + pair + steps[k:], _output=d.output)
        if k < len(steps):
            g, o = steps[k]
            frontier[o:o + len(g.dom)] = g.cod


# cut elimination ---------------------------------------------------------------------

def _cut_chains(d: Diagram, graph: _Graph) -> Iterator[list]:
    """Swap chains on strands that run from an axiom straight into a cut."""
    for k, (g, _) in enumerate(d.steps):
        if g.name != "cut":
            continue
        for p in range(len(g.dom)):
            src = graph.ins[k][p]
            chain = []
            while isinstance(src[0], int) and d.steps[src[0]].gate.name == "swap":
                chain.append(src[0])
                src = graph.ins[src[0]][1 - src[1]]
            if chain and isinstance(src[0], int) and d.steps[src[0]].gate.name == "ax":
                yield chain[::-1]


def _hop(d: Diagram) -> Optional[Match]:
    """A hop whose swap lies on an axiom-to-cut strand, nearest the axiom first.

    The hopping axiom is either the strand's own axiom or one whose leg the
    strand crosses.
    """
    graph = _Graph(d)
    chains = list(_cut_chains(d, graph))
    if not chains:
        return None
    hops = list(_iter(d, DERIVED.values(), graph))
    for chain in chains:
        for s in chain:
            for m in hops:
                if s in m.occurrence:
                    return m
    return None


def cut_eliminate(d: Diagram, p: Polygraph, budget: int = 10000) -> Reduction:
    """Remove cuts by rewriting.

    Cut rules are tried first; when none applies a forward twisting step is
    taken to bring a cut's neighbourhood into shape, and when the twisting
    relations are exhausted an axiom strand feeding a cut through swaps is
    straightened by one hop. Every step is recorded in the trace.
    """
    if p.control:
        raise ValueError("cut elimination needs a polygraph with cut rules")
    cut_rules = list(p.cut_rules)
    twist_rules = list(p.twisting_rules)
    trace = []
    while any(g.name == "cut" for g, _ in d.steps):
        if len(trace) >= budget:
            return Reduction(d, trace, True)
        m = next(iter_redexes(d, cut_rules), None)
        if m is None:
            m = next(iter_redexes(d, twist_rules), None)
        if m is None:
            m = _hop(d)
        if m is None:
            # stuck, not out of budget: the caller sees the remaining cuts
            return Reduction(d, trace, False)
        trace.append((m.rule.name, m.anchor))
        d = apply(d, m)
    return Reduction(d, trace, False)


# traces ------------------------------------------------------------------------------

def trace_to_json(trace: Sequence[tuple]) -> str:
    return json.dumps([{"rule": name, "anchor": list(anchor)} for name, anchor in trace])


def trace_from_json(text: str) -> list:
    return [(item["rule"], tuple(item["anchor"])) for item in json.loads(text)]


def replay(d: Diagram, p: Polygraph, trace: Sequence[tuple]) -> Diagram:
    """Re-apply a recorded trace; raises :class:`StaleMatch` if a step is missing."""
    for name, anchor in trace:
        rule = _lookup(p, name)
        anchor = tuple(anchor)
        m = next((m for m in _iter(d, [rule]) if m.anchor == anchor), None)
        if m is None:
            raise StaleMatch(f"no redex of {name} at {anchor}")
        d = apply(d, m)
    return d
