"""The eight acceptance criteria, each with its own time limit.

Every test records one ``PASS``/``FAIL`` line, printed in the terminal
summary.
"""
import random
import statistics
import time
from contextlib import contextmanager

import pytest

from proofdiagrams.diagrams import (
    Diagram, Step, ax, bot, cut, gate_count, identity, one, par, swap, tensor,
)
from proofdiagrams.formulas import BOT, Atom, DualAtom, Par, closure
from proofdiagrams.logic import (
    check_correct, check_derivation, compile, conclusion_derivations, random_derivation,
    sequentialize,
)
from proofdiagrams.permutations import (
    all_permutations, canonical_perm_diagram, diagram_to_permutation,
)
from proofdiagrams.polygraphs import (
    apply, check_decrease, check_joinable, critical_peaks_S, cut_eliminate, find_redexes,
    instantiate, interp_eval, normalize, swap_involution_variants, twist_equivalent,
)

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance

x = Atom("x")


@contextmanager
def criterion(number: int, title: str, limit: float = None):
    start = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - start
        ok = limit is None or elapsed <= limit
        if not ok:
            raise AssertionError(f"took {elapsed:.1f} s, limit {limit} s")
    finally:
        elapsed = time.perf_counter() - start
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({elapsed:.2f} s)")


def test_criterion_1_census():
    with criterion(1, "permutation census n=1..6", 10):
        S = instantiate("S")
        for n in range(1, 7):
            seen = set()
            count = 0
            for sigma in all_permutations(n):
                d = canonical_perm_diagram(sigma, [x] * n)
                assert not any(find_redexes(d, r) for r in S.rules)
                assert diagram_to_permutation(d) == sigma
                seen.add(d)
                count += 1
            assert count == len(seen) == [1, 2, 6, 24, 120, 720][n - 1]


def _random_swaps(rng, max_wires=5, max_swaps=10):
    n = rng.randint(2, max_wires)
    return Diagram([x] * n, [Step(swap(x, x), rng.randint(0, n - 2))
                             for _ in range(rng.randint(0, max_swaps))])


def test_criterion_2_confluence_and_termination():
    with criterion(2, "peaks join, decrease, unique normal forms", 60):
        peaks = critical_peaks_S()
        assert len(peaks) == 5
        for peak, m1, m2 in peaks:
            assert check_joinable(peak, m1, m2, budget=100)
        S = instantiate("S")
        for rule in S.rules:
            assert check_decrease(rule, samples=100)
        rng = random.Random(2)
        for _ in range(1000):
            d = _random_swaps(rng)
            forms = set()
            for _ in range(5):
                r = normalize(d, S, strategy="random", seed=rng.randrange(10 ** 9))
                assert not r.exhausted
                forms.add(r.diagram)
            assert len(forms) == 1


def test_criterion_3_interpretation():
    with criterion(3, "interpretation of the double swap and the Yang-Baxter side"):
        rng = random.Random(3)
        double = Diagram([x, x], [Step(swap(x, x), 0), Step(swap(x, x), 0)])
        yb = Diagram([x] * 3, [Step(swap(x, x), o) for o in (0, 1, 0)])
        for _ in range(50):
            p, q, r = (rng.randint(0, 1000) for _ in range(3))
            assert interp_eval(double, (p, q)) == (2 * p + q, p + q)
            assert interp_eval(yb, (p, q, r)) == (2 * p + q + r, p + q, p)


def test_criterion_4_round_trip():
    with criterion(4, "compile, check, sequentialize on 500 derivations", 30):
        rng = random.Random(4)
        for _ in range(500):
            deriv = random_derivation(rng, depth=rng.randint(1, 6))
            report = check_derivation(deriv)
            d = compile(deriv, "control")
            assert check_correct(d)
            assert check_derivation(sequentialize(d)).sequent == report.sequent
            assert report.rule_count == gate_count(d) - gate_count(d, {"swap"})


def _check_rewrites(d, rules, twisting):
    perm = diagram_to_permutation(d) if twisting else None
    for rule in rules:
        for m in find_redexes(d, rule):
            e = apply(d, m)
            assert (e.input, e.output) == (d.input, d.output)
            assert check_correct(e) == check_correct(d)
            if twisting:
                assert diagram_to_permutation(e) == perm


def test_criterion_5_twisting_rewrites_are_sound():
    with criterion(5, "twisting rewrites keep boundary, correctness, permutation"):
        rng = random.Random(5)
        ctrl = instantiate("ctrlMLLc")
        rules = list(ctrl.twisting_rules)
        rules += [r.reversed() for r in ctrl.twisting_rules
                  if r.family not in ("twist-involution", "ax-involution")]
        S = instantiate("S")
        s_rules = list(S.rules) + [S.rule("yang_baxter").reversed()]
        for _ in range(200):
            d = compile(random_derivation(rng, depth=rng.randint(1, 5), max_cuts=0))
            _check_rewrites(d, rules, twisting=False)
            _check_rewrites(_random_swaps(rng), s_rules, twisting=True)


def test_criterion_6_cut_elimination():
    with criterion(6, "cut fixtures and 100 random cut eliminations", 60):
        a, b = Atom("a"), Atom("b")
        A_, B_ = DualAtom("a"), DualAtom("b")
        p = instantiate("MLLc", closure([Par(a, b)]))
        word = [a, b, B_, A_]
        lhs = Diagram(word, [Step(par(a, b), 0), Step(tensor(B_, A_), 1), Step(cut(Par(a, b)), 0)])
        (m,) = find_redexes(lhs, p.rule("cut_par_tensor"))
        assert apply(lhs, m) == Diagram(word, [Step(cut(b), 1), Step(cut(a), 0)])
        unit = Diagram([], [Step(bot(), 0), Step(one(), 1), Step(cut(BOT), 0)])
        assert cut_eliminate(unit, p).diagram == identity()
        for d in (Diagram([a], [Step(ax(a), 0), Step(cut(A_), 1)]),
                  Diagram([a], [Step(ax(A_), 1), Step(cut(a), 0)])):
            assert cut_eliminate(d, p).diagram == identity([a])
        rng = random.Random(6)
        for _ in range(100):
            deriv = random_derivation(rng, depth=6, max_cuts=3)
            d = compile(deriv, "plain")
            sequent = check_derivation(deriv).sequent
            q = instantiate("MLLc", closure(list(sequent) + [g.params[0] for g, _ in d.steps if g.params]))
            r = cut_eliminate(d, q, budget=10000)
            assert not r.exhausted
            assert not any(g.name == "cut" for g, _ in r.diagram.steps)
            assert r.diagram.input == () and r.diagram.output == sequent


def test_criterion_7_conclusion_pair():
    with criterion(7, "distinct diagrams for one proof net", 30):
        first, second = conclusion_derivations()
        d1, d2 = compile(first), compile(second)
        atoms = [f for g, _ in d1.steps + d2.steps for f in g.params]
        p = instantiate("ctrlMLLc", closure(list(d1.output[1:-1]) + atoms))
        assert twist_equivalent(d1, d2, p, budget=10 ** 6) == "no"
        for d in (d1, d2):
            assert twist_equivalent(d, d, p) == "yes"
            for v in swap_involution_variants(d):
                assert twist_equivalent(d, v, p) == "yes"


def _time_check(d, reps: int, trials: int = 7) -> float:
    best = float("inf")
    for _ in range(trials):
        t = time.perf_counter()
        for _ in range(reps):
            check_correct(d)
        best = min(best, (time.perf_counter() - t) / reps)
    return best


def test_criterion_8_linear_time():
    from strategies import chain_diagram

    with criterion(8, "check_correct runs in linear time", 120):
        sizes = sorted({round(10 * 1000 ** (k / 19)) for k in range(20)})
        ns, ts = [], []
        for n in sizes:
            d = chain_diagram(n)
            assert check_correct(d)
            ns.append(len(d.steps))
            ts.append(_time_check(d, reps=max(3, 30000 // n)))
        # noise grows with the running time, so fit by weighted least squares
        # with weights 1/n^2: ordinary least squares of t/n against 1/n
        u = [1 / n for n in ns]
        v = [t / n for t, n in zip(ts, ns)]
        fixed, per_gate = statistics.linear_regression(u, v)
        predicted = [fixed + per_gate * n for n in ns]
        mean = statistics.fmean(ts)
        ss_res = sum((t - p) ** 2 for t, p in zip(ts, predicted))
        ss_tot = sum((t - mean) ** 2 for t in ts)
        r2 = 1 - ss_res / ss_tot
        worst = max(abs(t - p) / p for t, p in zip(ts, predicted))
        assert r2 >= 0.98, f"R^2 = {r2:.4f}"
        assert worst <= 0.20, f"max relative residual {worst:.3f}"
