import pytest

from gradsamp.costfn import Add, Const, Freq, Pow, Sub
from gradsamp.parsing import (
    ParseError,
    Rule,
    detect_format,
    parse_cnf_with_cost,
    parse_ground_asp,
    parse_program,
)


# --- DIMACS -------------------------------------------------------------------


def test_cnf_with_pats_and_cost():
    program = parse_cnf_with_cost("p cnf 2 1\n1 2 0\npats 1 2\ncost (0.2-f(1))^2\n")
    assert program.mode == "sat"
    assert program.num_atoms == 2
    assert program.clauses == [(1, 2)]
    assert program.param_atoms == [1, 2]
    assert program.cost == Pow(Sub(Const(0.2), Freq(1)), 2)


def test_cnf_plain_instance():
    program = parse_cnf_with_cost("p cnf 1 1\n1 0\n")
    assert program.clauses == [(1,)]
    assert program.cost is None and program.param_atoms == []


def test_cnf_cost_variable_out_of_range():
    with pytest.raises(ParseError, match="out of range"):
        parse_cnf_with_cost("p cnf 1 0\ncost f(3)\n")


def test_cnf_cost_undeclared_parameter():
    with pytest.raises(ParseError, match="not a declared parameter"):
        parse_cnf_with_cost("p cnf 2 1\n1 2 0\npats 1\ncost f(2)\n")


def test_cnf_multiple_cost_lines_summed():
    program = parse_cnf_with_cost(
        "p cnf 2 1\n1 2 0\npats 1 2\ncost f(1)\ncost f(2)\n"
    )
    assert program.cost == Add(Freq(1), Freq(2))


def test_cnf_comments_and_multiline_clauses():
    program = parse_cnf_with_cost("c header comment\np cnf 3 2\n1 2\n3 0\n-1 0\n")
    assert program.clauses == [(1, 2, 3), (-1,)]


def test_cnf_crlf():
    program = parse_cnf_with_cost("p cnf 1 1\r\n1 0\r\n")
    assert program.clauses == [(1,)]


def test_cnf_clause_variable_out_of_range():
    with pytest.raises(ParseError, match="out of range"):
        parse_cnf_with_cost("p cnf 2 1\n1 5 0\n")


def test_cnf_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 3"):
        parse_cnf_with_cost("p cnf 2 2\n1 0\nfoo bar\n")


def test_cnf_unused_pats_variable_rejected():
    with pytest.raises(ValueError, match="occurs in no clause"):
        parse_cnf_with_cost("p cnf 2 1\n1 0\npats 2\n")


# --- ground ASP ---------------------------------------------------------------


def test_asp_weights_and_constraint():
    program = parse_ground_asp("0.6 :: a.\n0.2 :: b.\n:- a, b.\n")
    table = program.table
    a, b = table.lookup("a"), table.lookup("b")
    assert program.param_atoms == [a, b]
    assert program.weights == {a: 0.6, b: 0.2}
    assert program.choice_atoms == [a, b]  # weights imply choices
    assert program.rules == [Rule(0, (a, b), ())]


def test_asp_negative_loop_program():
    program = parse_ground_asp("p :- not q.\nq :- not p.\n")
    p, q = program.table.lookup("p"), program.table.lookup("q")
    assert program.rules == [Rule(p, (), (q,)), Rule(q, (), (p,))]
    assert program.param_atoms == []


def test_asp_weight_out_of_range():
    with pytest.raises(ParseError, match=r"outside \[0,1\]"):
        parse_ground_asp("1.6 :: a.\n")


def test_asp_duplicate_weight():
    with pytest.raises(ParseError, match="duplicate weight"):
        parse_ground_asp("0.5 :: a.\n0.6 :: a.\n")


def test_asp_choice_fact_constraint_query_cost():
    text = "{c}.\nd :- c.\ne.\n:- e, not d, not c.\n#query d.\n#cost (0.5 - f(c))^2.\n"
    program = parse_ground_asp(text)
    t = program.table
    assert t.lookup("c") in program.choice_atoms
    assert Rule(t.lookup("e"), (), ()) in program.rules
    assert program.query_atoms == [t.lookup("d")]
    # cost references make c a parameter implicitly
    assert program.param_atoms == [t.lookup("c")]


def test_asp_weighted_rule_recorded():
    program = parse_ground_asp("0.7 :: win :- heads.\n")
    t = program.table
    assert len(program.weighted_rules) == 1
    weight, rule = program.weighted_rules[0]
    assert weight == 0.7
    assert rule == Rule(t.lookup("win"), (t.lookup("heads"),), ())


def test_asp_structured_atom_names():
    program = parse_ground_asp(
        "0.5 :: coin_out(1,heads).\ncoin_out(1,tails) :- not coin_out(1,heads).\n"
    )
    assert program.table.lookup("coin_out(1,heads)") is not None
    assert program.table.lookup("coin_out(1,tails)") is not None


def test_asp_comments_and_crlf():
    program = parse_ground_asp("% comment\r\np :- not q. % trailing\r\nq :- not p.\r\n")
    assert len(program.rules) == 2


def test_asp_syntax_error_line_number():
    with pytest.raises(ParseError, match="line 2"):
        parse_ground_asp("p.\n:- .\n")


def test_asp_query_unknown_atom():
    with pytest.raises(ParseError, match="unknown atom"):
        parse_ground_asp("p.\n#query zz.\n")


def test_asp_cost_unknown_atom():
    with pytest.raises(ParseError, match="unknown identifier"):
        parse_ground_asp("p.\n#cost f(zz).\n")


def test_asp_cost_decimal_terminator():
    program = parse_ground_asp("{a}.\n#cost 0.5 - f(a).\n#cost 0.25.\n")
    assert program.cost == Add(Sub(Const(0.5), Freq(1)), Const(0.25))


def test_asp_not_is_reserved():
    program = parse_ground_asp("p :- not notx.\n")
    assert program.table.lookup("notx") is not None


# --- dispatch ------------------------------------------------------------------


def test_detect_format():
    assert detect_format("c foo\np cnf 1 1\n1 0\n") == "cnf"
    assert detect_format("p :- q.\n") == "lp"
    assert parse_program("p cnf 1 1\n1 0\n").mode == "sat"
    assert parse_program("p.\n").mode == "asp"
    with pytest.raises(ValueError):
        parse_program("p.\n", fmt="weird")
