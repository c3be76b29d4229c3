"""Input frontends: extended DIMACS-CNF and a ground-ASP text format.

DIMACS extensions: after the standard header and clause lines, optional
``pats v1 v2 ...`` lines declare parameter variables and ``cost <expr>``
lines attach cost terms (several lines are summed into one objective).

Ground-ASP format, statements terminated by ``.``:

    h :- b1, ..., not c1.      normal rule
    h.                         fact
    :- b1, not c2.             integrity constraint
    {a}.                       choice (a becomes nondeterministic)
    0.6 :: a.                  weighted parameter atom, implies {a}.
    0.6 :: h :- b.             weighted rule (auxiliary-atom expansion)
    #query a.                  query atom
    #cost <expr>.              cost term (summed)

Comments start with ``%`` (ASP) or ``c`` (DIMACS). Atom names are lowercase
identifiers, optionally with a flat argument tuple: ``coin_out(1,heads)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .costfn import Add, CostExpr, CostParseError, parse_cost_expr
from .model import AtomTable


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Rule:
    """Ground normal rule; head 0 encodes an integrity constraint."""

    head: int
    pos: tuple[int, ...]
    neg: tuple[int, ...]


@dataclass
class Program:
    mode: str  # "sat" | "asp"
    table: AtomTable
    clauses: list[tuple[int, ...]] = field(default_factory=list)
    rules: list[Rule] = field(default_factory=list)
    choice_atoms: list[int] = field(default_factory=list)
    weighted_rules: list[tuple[float, Rule]] = field(default_factory=list)
    param_atoms: list[int] = field(default_factory=list)
    weights: dict[int, float] = field(default_factory=dict)
    query_atoms: list[int] = field(default_factory=list)
    cost: Optional[CostExpr] = None

    @property
    def num_atoms(self) -> int:
        return self.table.num_atoms

    def add_param(self, atom: int) -> None:
        if atom not in self.param_atoms:
            self.param_atoms.append(atom)

    def validate(self) -> None:
        occurring: set[int] = set(self.choice_atoms)
        for clause in self.clauses:
            occurring.update(abs(l) for l in clause)
        for rule in self.rules:
            if rule.head:
                occurring.add(rule.head)
            occurring.update(rule.pos)
            occurring.update(rule.neg)
        for _, rule in self.weighted_rules:
            occurring.add(rule.head)
            occurring.update(rule.pos)
            occurring.update(rule.neg)
        for p in self.param_atoms:
            if p not in occurring:
                raise ValueError(
                    f"parameter atom {self.table.name(p)!r} occurs in no clause, "
                    "rule, or choice declaration"
                )
        for a, w in self.weights.items():
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"weight of {self.table.name(a)!r} outside [0,1]")


# --- DIMACS -----------------------------------------------------------------


def parse_cnf_with_cost(text: str) -> Program:
    table = AtomTable()
    program = Program(mode="sat", table=table)
    num_vars = 0
    header_seen = False
    pats: list[int] = []
    cost_lines: list[tuple[str, int]] = []
    pending: list[int] = []  # literals of a clause split across lines

    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        keyword = line.split(maxsplit=1)[0]
        if keyword == "p":
            m = re.fullmatch(r"p\s+cnf\s+(\d+)\s+(\d+)", line)
            if not m:
                raise ParseError(f"malformed header {line!r}", lineno)
            if header_seen:
                raise ParseError("duplicate header", lineno)
            header_seen = True
            num_vars = int(m.group(1))
            for v in range(1, num_vars + 1):
                table.add(str(v))
            continue
        if keyword == "pats":
            if not header_seen:
                raise ParseError("pats before header", lineno)
            for tok in line.split()[1:]:
                if not tok.isdigit():
                    raise ParseError(f"bad variable index {tok!r} in pats", lineno)
                v = int(tok)
                if not 1 <= v <= num_vars:
                    raise ParseError(f"variable {v} out of range", lineno)
                if v not in pats:
                    pats.append(v)
            continue
        if keyword == "cost":
            if not header_seen:
                raise ParseError("cost before header", lineno)
            cost_lines.append((line[4:].strip(), lineno))
            continue
        if keyword.startswith("c"):  # comment; 'cost' was handled above
            continue
        if not header_seen:
            raise ParseError("clause before header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                program.clauses.append(tuple(pending))
                pending = []
            else:
                if not 1 <= abs(lit) <= num_vars:
                    raise ParseError(f"variable {abs(lit)} out of range", lineno)
                pending.append(lit)
    if pending:
        raise ParseError("unterminated clause at end of input", lineno)
    if not header_seen:
        raise ParseError("missing 'p cnf' header", 1)

    program.param_atoms = list(pats)
    pat_set = set(pats)

    def resolver(ref: str) -> int:
        if not ref.isdigit():
            raise CostParseError(f"unknown identifier {ref!r}")
        v = int(ref)
        if not 1 <= v <= num_vars:
            raise CostParseError(f"variable {v} out of range")
        if v not in pat_set:
            raise CostParseError(f"variable {v} is not a declared parameter")
        return v

    program.cost = _sum_costs(cost_lines, resolver)
    program.validate()
    return program


def _sum_costs(cost_lines, resolver) -> Optional[CostExpr]:
    total: Optional[CostExpr] = None
    for text, lineno in cost_lines:
        try:
            expr = parse_cost_expr(text, resolver)
        except CostParseError as exc:
            raise ParseError(str(exc), lineno) from None
        total = expr if total is None else Add(total, expr)
    return total


# --- ground ASP -------------------------------------------------------------

_ASP_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<num>\d+\.\d+|\d+)
  | (?P<op>:-|::|\#query|\#cost|\{|\}|,|\.|not\b)
  | (?P<atom>[a-z][A-Za-z0-9_]*(?:\([^()]*\))?)
    """,
    re.VERBOSE,
)


class _AspTokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1

    def next(self) -> Optional[tuple[str, str, int]]:
        """Return (kind, value, line) or None at end of input."""
        while self.pos < len(self.text):
            m = _ASP_TOKEN_RE.match(self.text, self.pos)
            if not m:
                raise ParseError(
                    f"unexpected character {self.text[self.pos]!r}", self.line
                )
            start_line = self.line
            self.line += self.text.count("\n", self.pos, m.end())
            self.pos = m.end()
            if m.lastgroup == "ws":
                continue
            return m.lastgroup, m.group(), start_line
        return None

    def take_until_dot(self, start_line: int) -> str:
        """Consume raw text up to the next statement terminator.

        Used for #cost expressions, whose grammar is richer than the ASP
        token set. A '.' inside a number (e.g. 0.4) is not a terminator.
        """
        out = []
        i = self.pos
        text = self.text
        while i < len(text):
            ch = text[i]
            if ch == ".":
                before = text[i - 1] if i > 0 else ""
                after = text[i + 1] if i + 1 < len(text) else ""
                if not (before.isdigit() and after.isdigit()):
                    self.line += text.count("\n", self.pos, i + 1)
                    self.pos = i + 1
                    return "".join(out)
            if ch == "%":
                while i < len(text) and text[i] != "\n":
                    i += 1
                continue
            out.append(ch)
            i += 1
        raise ParseError("unterminated #cost statement", start_line)


def _canon_atom(tok: str) -> str:
    return re.sub(r"\s+", "", tok)


def parse_ground_asp(text: str) -> Program:
    table = AtomTable()
    program = Program(mode="asp", table=table)
    toks = _AspTokens(text)
    cost_lines: list[tuple[str, int]] = []
    query_names: list[tuple[str, int]] = []
    choice_set: set[int] = set()

    def add_choice(atom: int) -> None:
        if atom not in choice_set:
            choice_set.add(atom)
            program.choice_atoms.append(atom)

    def expect(kind_value, tok, line, what):
        if tok is None or tok[1] != kind_value:
            found = "end of input" if tok is None else repr(tok[1])
            raise ParseError(f"expected {what}, found {found}", line if tok is None else tok[2])
        return tok

    def parse_body(first_tok, line):
        """Parse `lit, lit, ...` and the closing '.'; returns (pos, neg)."""
        pos: list[int] = []
        neg: list[int] = []
        tok = first_tok
        while True:
            negated = False
            if tok and tok[0] == "op" and tok[1] == "not":
                negated = True
                tok = toks.next()
            if tok is None or tok[0] != "atom":
                raise ParseError("expected an atom in rule body", line if tok is None else tok[2])
            idx = table.ensure(_canon_atom(tok[1]))
            (neg if negated else pos).append(idx)
            tok = toks.next()
            if tok and tok[0] == "op" and tok[1] == ",":
                tok = toks.next()
                continue
            expect(".", tok, line, "'.' or ','")
            return tuple(pos), tuple(neg)

    def parse_rule_tail(head_idx: int, line: int) -> Rule:
        """After the head atom: either '.', or ':-' body '.'"""
        tok = toks.next()
        if tok and tok[0] == "op" and tok[1] == ".":
            return Rule(head_idx, (), ())
        if tok and tok[0] == "op" and tok[1] == ":-":
            pos, neg = parse_body(toks.next(), line)
            return Rule(head_idx, pos, neg)
        raise ParseError("expected '.' or ':-' after head atom", line if tok is None else tok[2])

    while True:
        tok = toks.next()
        if tok is None:
            break
        kind, value, line = tok

        if kind == "num":
            # weighted statement: w :: <atom> [:- body] .
            weight = float(value)
            expect("::", toks.next(), line, "'::' after weight")
            atok = toks.next()
            if atok is None or atok[0] != "atom":
                raise ParseError("expected an atom after '::'", line)
            idx = table.ensure(_canon_atom(atok[1]))
            if not 0.0 <= weight <= 1.0:
                raise ParseError(f"weight {weight} outside [0,1]", line)
            rule = parse_rule_tail(idx, line)
            if rule.pos or rule.neg:
                program.weighted_rules.append((weight, rule))
            else:
                if idx in program.weights:
                    raise ParseError(
                        f"duplicate weight declaration for {table.name(idx)!r}", line
                    )
                program.weights[idx] = weight
                program.add_param(idx)
                add_choice(idx)
            continue

        if kind == "op" and value == "{":
            atok = toks.next()
            if atok is None or atok[0] != "atom":
                raise ParseError("expected an atom inside {...}", line)
            idx = table.ensure(_canon_atom(atok[1]))
            expect("}", toks.next(), line, "'}'")
            expect(".", toks.next(), line, "'.'")
            add_choice(idx)
            continue

        if kind == "op" and value == ":-":
            pos, neg = parse_body(toks.next(), line)
            program.rules.append(Rule(0, pos, neg))
            continue

        if kind == "op" and value == "#query":
            atok = toks.next()
            if atok is None or atok[0] != "atom":
                raise ParseError("expected an atom after #query", line)
            query_names.append((_canon_atom(atok[1]), line))
            expect(".", toks.next(), line, "'.'")
            continue

        if kind == "op" and value == "#cost":
            cost_lines.append((toks.take_until_dot(line), line))
            continue

        if kind == "atom":
            idx = table.ensure(_canon_atom(value))
            program.rules.append(parse_rule_tail(idx, line))
            continue

        raise ParseError(f"unexpected token {value!r}", line)

    for name, line in query_names:
        idx = table.lookup(name)
        if idx is None:
            raise ParseError(f"#query names unknown atom {name!r}", line)
        if idx not in program.query_atoms:
            program.query_atoms.append(idx)

    def resolver(ref: str) -> int:
        idx = table.lookup(ref)
        if idx is None:
            raise CostParseError(f"unknown identifier {ref!r}")
        # atoms referenced by the cost become parameter atoms implicitly
        program.add_param(idx)
        return idx

    program.cost = _sum_costs(cost_lines, resolver)
    program.validate()
    return program


def detect_format(text: str) -> str:
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if re.match(r"p\s+cnf\s+\d+\s+\d+\s*$", line):
            return "cnf"
        if line.startswith("c ") or line == "c":
            continue  # DIMACS comment; keep scanning for the header
        return "lp"
    return "lp"


def parse_program(text: str, fmt: Optional[str] = None) -> Program:
    fmt = fmt or detect_format(text)
    if fmt == "cnf":
        return parse_cnf_with_cost(text)
    if fmt == "lp":
        return parse_ground_asp(text)
    raise ValueError(f"unknown format {fmt!r}")
