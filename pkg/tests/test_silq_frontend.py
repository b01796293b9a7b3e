"""Parser and type checker tests for the program language."""

from __future__ import annotations

import pytest

from qramverify.errors import (
    MixedConditionError,
    SilqSyntaxError,
    SilqTypeError,
    UnsupportedFeature,
    UseBeforeDefine,
)
from qramverify.silq_frontend import (
    DataType,
    GateApply,
    OracleCondBlock,
    OracleType,
    parse_silq,
    type_check,
    walk_stmts,
)
from qramverify.silq_frontend.pretty import render_program

from conftest import CORPUS, corpus_text

GHZ = corpus_text("ghz2.slq")
DJ = corpus_text("dj2.slq")


def test_ghz_shape():
    ast = parse_silq(GHZ)
    assert [f.name for f in ast.functions] == ["ghz"]
    fn = ast.functions[0]
    assert fn.params == []
    assert len(fn.body) == 7
    assert sum(1 for _ in walk_stmts(fn.body)) == 9
    cond = next(s for s in fn.body if isinstance(s, OracleCondBlock))
    gates = [s for s in cond.body if isinstance(s, GateApply)]
    assert [g.gate_name for g in gates] == ["X", "X"]
    assert [g.index for g in gates] == [0, 1]


def test_dj_shape():
    ast = parse_silq(DJ)
    fn = ast.functions[0]
    assert fn.name == "fixed_dj"
    assert len(fn.params) == 1
    p = fn.params[0]
    assert p.name == "f"
    assert isinstance(p.ty, OracleType)
    assert p.ty.domain.size == 2
    assert p.ty.result.size == 1
    assert p.ty.const_arg and p.ty.qfree
    cond = next(s for s in fn.body if isinstance(s, OracleCondBlock))
    (phase,) = cond.body
    assert (phase.num, phase.den) == (1, 1)


def test_use_before_define():
    with pytest.raises(UseBeforeDefine):
        type_check(parse_silq("def f(){ return x; }"))


def test_round_trip_corpus():
    """Pretty-printing then reparsing reproduces the same AST."""
    for path in sorted(CORPUS.glob("*.slq")):
        src = path.read_text()
        ast = parse_silq(src)
        again = parse_silq(render_program(ast))
        assert render_program(again) == render_program(ast), path.name


def test_types_after_checking():
    ast = type_check(parse_silq(GHZ))
    fn = ast.functions[0]
    decls = {s.name: s.decl_type for s in fn.body if hasattr(s, "decl_type")}
    assert decls["x"] == DataType("bit", 1, False)
    assert decls["y"] == DataType("uint", 2, False)
    assert fn.return_name == "y"
    assert fn.return_size == 2


def test_measure_moves_to_classical():
    src = """def m(){
    x := 0:B;
    x := measure(x);
    y := x + 1;
    q := 0:B;
    q := measure(q);
    return x;
}
"""
    ast = type_check(parse_silq(src))
    fn = ast.functions[0]
    assign = next(s for s in fn.body if getattr(s, "name", None) == "y")
    assert assign.size == 1


def test_quantum_condition_classification():
    ast = type_check(parse_silq(DJ))
    cond = next(
        s for s in ast.functions[0].body if isinstance(s, OracleCondBlock)
    )
    assert cond.cond_classical is False


def test_size_function():
    for n in range(1, 11):
        ast = parse_silq(
            "def f(){\n    x := 0:uint[%d];\n    x := measure(x);\n"
            "    return x;\n}\n" % n
        )
        decl = ast.functions[0].body[0]
        assert decl.decl_type.size == n
    bit = parse_silq("def f(){\n    x := 0:B;\n    x := measure(x);\n"
                     "    return x;\n}\n")
    assert bit.functions[0].body[0].decl_type.size == 1


def test_loops_rejected():
    with pytest.raises(UnsupportedFeature):
        parse_silq("def f(){ for x { x := H(x); } }")
    with pytest.raises(UnsupportedFeature):
        parse_silq("def f(){ while x { x := H(x); } }")


def test_quantum_parameter_rejected():
    with pytest.raises(UnsupportedFeature):
        type_check(parse_silq("def f(q: B){ q := measure(q); return q; }"))


def test_classical_parameter_accepted():
    ast = type_check(parse_silq(corpus_text("classctrl.slq")))
    p = ast.functions[0].params[0]
    assert p.ty == DataType("bit", 1, True)


def test_statements_after_return_rejected():
    src = "def f(){ x := 0:B; x := measure(x); return x; x := 1:!B; }"
    with pytest.raises(SilqSyntaxError):
        parse_silq(src)


def test_measure_inside_condition_rejected():
    src = "def f(){ x := 0:B; if measure(x) { phase(pi); } return x; }"
    with pytest.raises((SilqSyntaxError, UnsupportedFeature)):
        parse_silq(src)


def test_quantum_in_classical_arithmetic_rejected():
    src = """def f(){
    x := 0:B;
    y := x + 1;
    x := measure(x);
    return x;
}
"""
    with pytest.raises((SilqTypeError, UnsupportedFeature)):
        type_check(parse_silq(src))


def test_index_out_of_range_rejected():
    src = """def f(){
    y := 0:uint[2];
    y[2] := X(y[2]);
    y := measure(y);
    return y;
}
"""
    with pytest.raises(SilqTypeError):
        type_check(parse_silq(src))


def test_mixed_condition_rejected():
    """A quantum condition must not guard classical mutation."""
    src = """def f(){
    x := 0:B;
    c := 0:!uint[2];
    if x{
        c := c + 1;
    }
    x := measure(x);
    return x;
}
"""
    with pytest.raises(MixedConditionError):
        type_check(parse_silq(src))
