"""Specification parsing, skeleton generation, and encoding tests.

The encoding tests use an independent brute-force evaluator over the
obligation expression trees: auxiliary witness symbols are enumerated
over their declared ranges, so agreement with direct evaluation of the
source formula checks the whole finite-expansion pipeline.
"""

from __future__ import annotations

import itertools

import pytest

from qramverify.errors import (
    ArityError,
    EncodeError,
    FlagError,
    ScopeError,
    SpeqSyntaxError,
    UnboundedQuantifier,
)
from qramverify.obligations import App, Expr, IntConst, RatConst, Sym
from qramverify.silq_frontend import parse_silq, type_check
from qramverify.silspeq_frontend import (
    LForall,
    encode_spec,
    eval_arith,
    eval_logic,
    generate_skeleton,
    parse_speq,
)

from conftest import corpus_text

GHZ_SPEC = corpus_text("ghz2.speq")
DJ_SPEC = corpus_text("dj2.speq")
BV_SPEC = corpus_text("bv2.speq")


# --- parsing ---

def test_ghz_spec_fields():
    spec = parse_speq(GHZ_SPEC)
    assert spec.function_name == "ghz"
    assert spec.flag.kind == "whp"
    assert float(spec.flag.threshold) == 0.5
    assert spec.inputs == []
    assert spec.ret[0] == "ghz_ret"
    assert spec.ret[1].bits == 2
    assert spec.pre == []
    assert len(spec.post) == 1


def test_bv_spec_fields():
    spec = parse_speq(BV_SPEC)
    assert spec.flag.kind == "cert"
    assert any(isinstance(l, LForall) for l in spec.pre)


def test_dj_spec_fields():
    spec = parse_speq(DJ_SPEC)
    assert spec.flag.kind == "rand"
    assert [n for n, _ in spec.pre_defines] == ["y", "x", "bal"]


def test_dot_width_mismatch():
    text = """f[rand]()->
(define f_ret : {0, 1}^2)
pre{
  define a : {0,1}^2
  define b : {0,1}^3
  assert(a.b = 0)
}
post{
}
"""
    with pytest.raises(ArityError):
        parse_speq(text)


def test_whp_threshold_range():
    for bad in ("0", "0.0", "1.5", "-0.5"):
        text = GHZ_SPEC.replace("whp(0.5)", f"whp({bad})")
        with pytest.raises(FlagError):
            parse_speq(text)
    ok = parse_speq(GHZ_SPEC.replace("whp(0.5)", "whp(1)"))
    assert float(ok.flag.threshold) == 1.0


def test_ret_name_must_match_function():
    text = GHZ_SPEC.replace("ghz_ret", "wrong_ret")
    with pytest.raises(SpeqSyntaxError):
        parse_speq(text)


def test_duplicate_declaration():
    text = """f[rand]()->
(define f_ret : {0, 1})
pre{
  define a : {0,1}
  define a : {0,1}
}
post{
}
"""
    with pytest.raises(ScopeError):
        parse_speq(text)


def test_undeclared_variable():
    text = """f[rand]()->
(define f_ret : {0, 1})
pre{
  assert(zz = 0)
}
post{
}
"""
    with pytest.raises(ScopeError):
        parse_speq(text)


# --- skeleton generation ---

def test_skeleton_ghz_exact():
    ast = type_check(parse_silq(corpus_text("ghz2.slq")))
    text = generate_skeleton(ast, "ghz")
    assert text == (
        "ghz[rand]()->\n(define ghz_ret:{0, 1}^2)\npre{\n}\npost{\n}"
    )
    assert parse_speq(text).function_name == "ghz"
    assert generate_skeleton(ast, "ghz") == text


def test_skeleton_dj_oracle_input():
    ast = type_check(parse_silq(corpus_text("dj2.slq")))
    text = generate_skeleton(ast, "fixed_dj")
    assert "define f:{0, 1}^2->{0, 1}" in text
    parse_speq(text)


# --- independent evaluation of obligation expressions ---

def eval_expr(e: Expr, env: dict[str, int]):
    if isinstance(e, Sym):
        return env[e.name]
    if isinstance(e, IntConst):
        return e.value
    if isinstance(e, RatConst):
        return e.value
    assert isinstance(e, App)
    if e.op == "true":
        return True
    if e.op == "false":
        return False
    a = [eval_expr(x, env) for x in e.args]
    if e.op == "+":
        return sum(a)
    if e.op == "-":
        return -a[0] if len(a) == 1 else a[0] - a[1]
    if e.op == "*":
        out = 1
        for v in a:
            out *= v
        return out
    if e.op == "to_real":
        return a[0]
    if e.op == "=":
        return a[0] == a[1]
    if e.op == "<":
        return a[0] < a[1]
    if e.op == "<=":
        return a[0] <= a[1]
    if e.op == ">":
        return a[0] > a[1]
    if e.op == ">=":
        return a[0] >= a[1]
    if e.op == "and":
        return all(a)
    if e.op == "or":
        return any(a)
    if e.op == "not":
        return not a[0]
    if e.op == "=>":
        return (not a[0]) or a[1]
    raise AssertionError(f"unhandled operator {e.op!r}")


def obligation_truth(obls, st, env: dict[str, int]) -> bool:
    """Existential truth of an obligation set over its witness symbols.

    env fixes the spec variables and oracle cells; any remaining
    declared symbols (division witnesses) are enumerated inside their
    declared ranges.
    """
    free = [i for i in st.infos() if i.name not in env]
    ranges = []
    for i in free:
        assert i.lo is not None and i.hi is not None, i.name
        ranges.append(range(i.lo, i.hi))
    exprs = [a.expr for a in obls.definitions] + [a.expr for a in obls.assertions]
    for combo in itertools.product(*ranges):
        trial = dict(env)
        trial.update({i.name: v for i, v in zip(free, combo)})
        if all(eval_expr(x, trial) for x in exprs):
            return True
    return False


def spec_env(spec):
    """All assignments of a spec's finite variables and oracle tables."""
    names, ranges, table_names = [], [], []
    for name, ty in spec.scope().items():
        if hasattr(ty, "bits"):
            names.append(name)
            ranges.append(range(2 ** ty.bits))
        elif hasattr(ty, "domain"):
            table_names.append((name, 2 ** ty.domain.bits))
    for combo in itertools.product(*ranges):
        env = dict(zip(names, combo))
        table_ranges = [
            itertools.product(range(2), repeat=cells)
            for _, cells in table_names
        ]
        for cells in itertools.product(*table_ranges):
            tables = {n: t for (n, _), t in zip(table_names, cells)}
            yield env, tables


def assert_expansion_matches(text: str):
    spec = parse_speq(text)
    pre, _ = encode_spec(spec, "")
    from qramverify.obligations import SymbolTable

    # Re-encode with a fresh table to know the declared symbols.
    st = SymbolTable()
    pre, _ = encode_spec(spec, "", st)
    scope = spec.scope()
    for env, tables in spec_env(spec):
        direct = all(eval_logic(l, scope, env, tables) for l in spec.pre)
        flat = dict(env)
        for t, cells in tables.items():
            for v, c in enumerate(cells):
                flat[f"{t}_{v}"] = c
        assert obligation_truth(pre, st, flat) == direct, (env, tables)


def test_expansion_forall_oracle():
    """The key certainty-flag precondition over every table and string."""
    assert_expansion_matches(BV_SPEC)


def test_expansion_exists():
    text = """f[rand]()->
(define f_ret : {0, 1})
pre{
  define g : {0,1}^2->{0,1}
  define k : {0,1}^2
  assert(exists k. g(k) = 1)
}
post{
}
"""
    assert_expansion_matches(text)


def test_expansion_mod_and_sum():
    text = """f[rand]()->
(define f_ret : {0, 1})
pre{
  define g : {0,1}^2->{0,1}
  define a : {0,1}^2
  assert(SUM[a](g) mod 2 = a mod 2)
}
post{
}
"""
    assert_expansion_matches(text)


def test_dj_pre_is_cell_sum():
    """SUM over a 2-bit oracle means the four cells add up."""
    spec = parse_speq(DJ_SPEC)
    from qramverify.obligations import SymbolTable

    st = SymbolTable()
    pre, _ = encode_spec(spec, "", st)
    sum_claim = pre.assertions[0].expr
    for cells in itertools.product(range(2), repeat=4):
        for y in range(5):
            env = {f"f_{v}": c for v, c in enumerate(cells)}
            env["y"] = y
            assert eval_expr(sum_claim, env) == (sum(cells) == y)


def test_bv_forall_expands_to_four_conjuncts():
    spec = parse_speq(BV_SPEC)
    pre, _ = encode_spec(spec, "")
    (claim,) = [a.expr for a in pre.assertions]
    assert isinstance(claim, App) and claim.op == "and"
    assert len(claim.args) == 4


def test_dot_product_parity_is_popcount():
    """a.a mod 2 equals the parity of a's bit count."""
    from qramverify.silspeq_frontend import BitVecType, SBin, SVar

    for n in range(1, 5):
        scope = {"a": BitVecType(n)}
        e = SBin("mod", SBin(".", SVar("a"), SVar("a")), SInt(2))
        for a in range(2 ** n):
            got = eval_arith(e, scope, {"a": a}, {})
            assert got == bin(a).count("1") % 2


def test_quantifier_over_nat_rejected():
    text = """f[rand]()->
(define f_ret : {0, 1})
pre{
  define n : N
  assert(@n. n = 0)
}
post{
}
"""
    spec = parse_speq(text)
    with pytest.raises(UnboundedQuantifier):
        encode_spec(spec, "")


def test_wide_oracle_result_rejected():
    text = """f[rand](define g:{0, 1}^2->{0, 1}^2)->
(define f_ret : {0, 1})
pre{
}
post{
}
"""
    spec = parse_speq(text)
    with pytest.raises(EncodeError):
        encode_spec(spec, "")


def test_empty_blocks_encode_empty():
    text = "f[rand]()->\n(define f_ret:{0, 1})\npre{\n}\npost{\n}"
    pre, post = encode_spec(parse_speq(text), "")
    assert len(pre) == 0 and len(post) == 0


from qramverify.silspeq_frontend import SInt  # noqa: E402  (test helper import)
