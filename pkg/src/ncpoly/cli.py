"""Command-line front end: problem files, hierarchy runs and reports.

Problem file format, one statement per line, ``#`` starts a comment::

    name: example
    vars x1 x2 hermitian          # or: vars a b operator  (adds a', b')
    rule x1^2 = x1                 # explicit rewrite rule
    idempotent x1                  # shorthands: idempotent, projector,
    commute x1 | x2                #   commute G1 | G2 ..., commutative
    fermions a1 a2                 # declares operators with CAR rules
    objective: x1*x2 + x2*x1       # or minimize: / maximize:
    constraint: -x2^2 + x2 + 1/2 >= 0
    constraint: x1 - x2 == 0
    ket0: 3*x1 + 2*x2 - 1          # r phi = 0
    expect>=0: -x1 + 1/3           # <phi, s phi> >= 0
    ball: 2
    archimedean

Expressions use ``*`` for products, ``^`` for positive integer powers,
postfix ``'`` for the adjoint and ``/`` for division by a number.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .algebra import (Alphabet, Polynomial, RewriteSystem, commutative_rules,
                      commutation_rules, fermionic_rules, group_commutation_rules,
                      idempotent_rules, poly_adjoint, poly_mul, projector_group_rules)
from .certify import (RANK_TOL, CertifyError, extract_optimizer, extract_sos,
                      flatness_check, moment_mismatch, verify_optimizer, verify_sos)
from .relaxation import NCProblem, RelaxationError, assemble
from .sdp import GAP_TOL, SolverError, export_sdpa, solve

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVER = 3


class ParseError(ValueError):
    """Problem file error with a 1-based source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        super().__init__(f"line {line}, column {col}: {message}")


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()'])
""", re.VERBOSE)


def _tokenize(text: str, line: int, col0: int):
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        if m.lastgroup != "ws":
            toks.append((m.lastgroup, m.group(), col0 + pos))
        pos = m.end()
    toks.append(("end", "", col0 + len(text)))
    return toks


class _ExprParser:
    """Recursive descent over the free algebra (no rewriting applied)."""

    def __init__(self, text: str, alphabet: Alphabet, line: int, col0: int):
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.a = alphabet
        self.line = line

    def error(self, msg, tok=None):
        tok = tok or self.toks[self.i]
        return ParseError(msg, self.line, tok[2])

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        p = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return p

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()
            q = self.unary()
            if op[1] == "*":
                p = poly_mul(p, q)
            else:
                if q.degree() > 0:
                    raise self.error("division by a non-constant expression", op)
                c = q.coeff(())
                if c == 0.0:
                    raise self.error("division by zero", op)
                p = p / c
        return p

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        p = self.postfix()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit() or int(tok[1]) < 1:
                raise self.error("exponent must be a positive integer", tok)
            base = p
            for _ in range(int(tok[1]) - 1):
                p = poly_mul(p, base)
        return p

    def postfix(self):
        p = self.atom()
        while self.peek()[1] == "'":
            self.take()
            p = poly_adjoint(p, self.a)
        return p

    def atom(self):
        tok = self.take()
        kind, text = tok[0], tok[1]
        if kind == "num":
            return Polynomial.constant(float(text))
        if kind == "name":
            if text not in self.a.names:
                raise self.error(f"undeclared variable {text!r}", tok)
            return Polynomial.monomial((self.a.index(text),))
        if text == "(":
            p = self.expr()
            if self.peek()[1] != ")":
                raise self.error("expected ')'")
            self.take()
            return p
        raise self.error(f"unexpected {text!r}" if text else "unexpected end of expression", tok)


def parse_expression(text: str, alphabet: Alphabet, line: int = 1, col: int = 1) -> Polynomial:
    """Parse ``text`` into a polynomial over ``alphabet`` (no rewriting)."""
    return _ExprParser(text, alphabet, line, col).parse()


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------

_STATEMENT = re.compile(
    r"\s*(?P<kw>expect>=0|[A-Za-z_][A-Za-z0-9_]*)\s*(?P<colon>:)?\s*(?P<rest>.*)$")


def _names(rest: str, line: int, col: int) -> list:
    names = rest.split()
    for nm in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", nm):
            raise ParseError(f"bad variable name {nm!r}", line, col + rest.find(nm))
    return names


def parse_problem(text: str) -> NCProblem:
    """Parse a problem file into a validated :class:`NCProblem`.

    Raises
    ------
    ParseError
        On syntax errors, undeclared variables, conflicting rules or a
        non-hermitian objective; carries the offending line and column.
    """
    stmts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        m = _STATEMENT.match(body)
        if m is None:
            raise ParseError("expected a keyword", lineno, len(body) - len(body.lstrip()) + 1)
        stmts.append((lineno, m.group("kw"), m.group("rest"), m.start("rest") + 1,
                      m.start("kw") + 1))

    # Declarations first so that statements may appear in any order.
    decls, fermion_groups = [], []
    for lineno, kw, rest, col, _ in stmts:
        if kw == "vars":
            names = _names(rest, lineno, col)
            herm = True
            if names and names[-1] in ("hermitian", "operator"):
                herm = names.pop() == "hermitian"
            if not names:
                raise ParseError("vars needs at least one name", lineno, col)
            decls.extend((nm, herm, lineno) for nm in names)
        elif kw == "fermions":
            names = _names(rest, lineno, col)
            if not names:
                raise ParseError("fermions needs at least one name", lineno, col)
            decls.extend((nm, False, lineno) for nm in names)
            fermion_groups.append((lineno, names))
    seen = set()
    for nm, _, lineno in decls:
        if nm in seen:
            raise ParseError(f"variable {nm!r} declared twice", lineno, 1)
        seen.add(nm)
    if not decls:
        raise ParseError("no variables declared", 1, 1)
    alphabet = Alphabet.from_declarations([(nm, h) for nm, h, _ in decls])
    for nm in alphabet.names[alphabet.n:]:
        if nm in seen:
            raise ParseError(f"name {nm!r} clashes with an adjoint letter", 1, 1)

    def expr(s, lineno, col):
        return parse_expression(s, alphabet, lineno, col)

    def letters_of(names, lineno, col):
        out = []
        for nm in names:
            if nm not in alphabet.names:
                raise ParseError(f"undeclared variable {nm!r}", lineno, col)
            out.append(alphabet.index(nm))
        return out

    rules, ineqs, eqs, kernel, expects = [], [], [], [], []
    objective, sense, ball, archimedean, name = None, "min", None, False, ""
    for lineno, kw, rest, col, kwcol in stmts:
        if kw == "vars":
            continue
        if kw == "fermions":
            idx = letters_of(_names(rest, lineno, col), lineno, col)
            rules.extend(_remap_fermionic(idx, alphabet))
        elif kw == "name":
            name = rest.strip()
        elif kw in ("objective", "obj", "minimize", "maximize"):
            if objective is not None:
                raise ParseError("objective given twice", lineno, kwcol)
            objective = expr(rest, lineno, col)
            sense = "max" if kw == "maximize" else "min"
        elif kw == "rule":
            lhs_s, rhs_s, rhs_col = _split_once(rest, "=", lineno, col)
            lhs = expr(lhs_s, lineno, col)
            if len(lhs) != 1 or next(iter(lhs.items()))[1] != 1.0 or lhs.degree() == 0:
                raise ParseError("rule left-hand side must be a single word", lineno, col)
            rules.append((next(iter(lhs.words())), expr(rhs_s, lineno, rhs_col)))
        elif kw == "idempotent":
            rules.extend(idempotent_rules(letters_of(_names(rest, lineno, col), lineno, col)))
        elif kw == "projector":
            rules.extend(projector_group_rules(letters_of(_names(rest, lineno, col), lineno, col)))
        elif kw == "commute":
            groups = []
            for part in rest.split("|"):
                idx = letters_of(_names(part, lineno, col), lineno, col)
                idx += [alphabet.adjoint_map[l] for l in idx if alphabet.adjoint_map[l] != l]
                groups.append(idx)
            if len(groups) < 2:
                raise ParseError("commute needs at least two groups separated by '|'", lineno, col)
            rules.extend(group_commutation_rules(groups))
        elif kw == "commutative":
            rules.extend(commutative_rules(alphabet))
        elif kw == "constraint":
            _constraint(rest, lineno, col, expr, ineqs, eqs)
        elif kw == "ket0":
            kernel.append(expr(rest, lineno, col))
        elif kw == "expect>=0":
            expects.append(expr(rest, lineno, col))
        elif kw == "ball":
            try:
                ball = float(rest)
            except ValueError:
                raise ParseError("ball needs a number", lineno, col) from None
        elif kw == "archimedean":
            archimedean = True
        else:
            raise ParseError(f"unknown statement {kw!r}", lineno, kwcol)

    if objective is None:
        raise ParseError("missing objective", len(text.splitlines()) or 1, 1)
    try:
        rs = RewriteSystem(rules)
        problem = NCProblem(alphabet, objective, rs, inequalities=tuple(ineqs),
                            equalities=tuple(eqs), state_kernel=tuple(kernel),
                            expectation_ineqs=tuple(expects), ball=ball,
                            archimedean=archimedean, name=name, sense=sense)
        problem.validate()
    except (ValueError, RelaxationError) as exc:
        raise ParseError(str(exc), _line_of(stmts, exc), 1) from None
    return problem


def _line_of(stmts, exc) -> int:
    msg = str(exc)
    if "objective" in msg:
        for lineno, kw, *_ in stmts:
            if kw in ("objective", "obj", "minimize", "maximize"):
                return lineno
    return stmts[-1][0] if stmts else 1


def _split_once(rest: str, sep: str, lineno: int, col: int):
    pos = rest.find(sep)
    if pos < 0 or rest.find(sep, pos + 1) >= 0:
        raise ParseError(f"expected exactly one {sep!r}", lineno, col)
    return rest[:pos], rest[pos + 1:], col + pos + 1


def _constraint(rest, lineno, col, expr, ineqs, eqs):
    m = re.search(r">=|<=|==", rest)
    if m is None:
        raise ParseError("constraint needs '>=', '<=' or '=='", lineno, col)
    lhs = expr(rest[:m.start()], lineno, col)
    rhs = expr(rest[m.end():], lineno, col + m.end())
    op = m.group()
    if op == ">=":
        ineqs.append(lhs - rhs)
    elif op == "<=":
        ineqs.append(rhs - lhs)
    else:
        eqs.append(lhs - rhs)


def _remap_fermionic(idx, alphabet):
    """CAR rules for the annihilators ``idx`` inside an arbitrary alphabet."""
    m = len(idx)
    table = list(idx) + [alphabet.adjoint_map[l] for l in idx]

    def mp(w):
        return tuple(table[l] for l in w)

    out = []
    for pattern, rhs in fermionic_rules(m):
        out.append((mp(pattern), Polynomial({mp(w): c for w, c in rhs.items()})))
    return out


def format_problem(problem: NCProblem) -> str:
    """Problem file text that :func:`parse_problem` maps back to ``problem``."""
    a = problem.alphabet
    fmt = lambda p: p.to_string(a, fmt=repr)
    lines = []
    if problem.name:
        lines.append(f"name: {problem.name}")
    run, flag = [], None
    for i in range(a.n):
        herm = a.is_hermitian_letter(i)
        if run and herm != flag:
            lines.append(f"vars {' '.join(run)} {'hermitian' if flag else 'operator'}")
            run = []
        run.append(a.names[i])
        flag = herm
    lines.append(f"vars {' '.join(run)} {'hermitian' if flag else 'operator'}")
    for pattern, rhs in problem.rewrite.rules:
        lines.append(f"rule {a.word_str(pattern)} = {fmt(rhs)}")
    key = "maximize" if problem.sense == "max" else "objective"
    lines.append(f"{key}: {fmt(problem.objective)}")
    lines += [f"constraint: {fmt(q)} >= 0" for q in problem.inequalities]
    lines += [f"constraint: {fmt(e)} == 0" for e in problem.equalities]
    lines += [f"ket0: {fmt(r)}" for r in problem.state_kernel]
    lines += [f"expect>=0: {fmt(s)}" for s in problem.expectation_ineqs]
    if problem.ball is not None:
        lines.append(f"ball: {problem.ball!r}")
    if problem.archimedean:
        lines.append("archimedean")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Running the hierarchy
# ---------------------------------------------------------------------------

@dataclass
class RunFlags:
    """Options of :func:`run`; mirrors the command-line flags."""

    tol: float = GAP_TOL
    rank_tol: float = RANK_TOL
    export_sdpa: str | None = None
    certify: bool = False
    extract: bool = False
    stop_on_flat: bool = False
    seed: int = 0
    parallel_orders: bool = False
    k_min: int | None = None


@dataclass
class RunReport:
    """Result of a hierarchy run.

    Objective values are in the user's sense: for a maximisation problem
    ``primal_obj`` is an upper bound on the maximum.
    """

    name: str
    sense: str
    k_min: int
    k_max: int
    seed: int
    records: list = field(default_factory=list)
    optimizer: dict | None = None
    certificate: dict | None = None
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"name": self.name, "sense": self.sense, "k_min": self.k_min,
                "k_max": self.k_max, "seed": self.seed, "records": self.records,
                "optimizer": self.optimizer, "certificate": self.certificate,
                "timings": self.timings, "warnings": self.warnings}

    @property
    def solved(self) -> bool:
        return all(r["status"] in ("optimal", "near_optimal") for r in self.records)


def _sdpa_path(template: str, k: int, single: bool) -> str:
    if "{k}" in template:
        return template.replace("{k}", str(k))
    if single:
        return template
    root, ext = os.path.splitext(template)
    return f"{root}_k{k}{ext}"


def _solve_order(problem: NCProblem, k: int, flags: RunFlags, single: bool) -> dict:
    rec = {"k": k, "primal_obj": None, "dual_obj": None, "gap": None, "status": "error",
           "flat": None, "ranks": None, "iterations": 0, "message": ""}
    t0 = time.perf_counter()
    try:
        sdp, _ = assemble(problem, k)
        if flags.export_sdpa:
            path = _sdpa_path(flags.export_sdpa, k, single)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(export_sdpa(sdp, comment=f"{problem.name or 'problem'} order {k}"))
        t1 = time.perf_counter()
        sol = solve(sdp, gap_tol=flags.tol, feas_tol=flags.tol)
        t2 = time.perf_counter()
    except (RelaxationError, SolverError, ValueError, OSError) as exc:
        rec["message"] = f"{type(exc).__name__}: {exc}"
        rec["_time"] = {"assemble": time.perf_counter() - t0, "solve": 0.0}
        return rec
    rec.update(primal_obj=problem.user_value(sol.primal_obj),
               dual_obj=problem.user_value(sol.dual_obj), gap=sol.gap, status=sol.status,
               iterations=sol.iterations, message=sol.message)
    rec["_time"] = {"assemble": t1 - t0, "solve": t2 - t1}
    rec["_sol"] = sol
    return rec


def run(problem: NCProblem, k_max: int, flags: RunFlags | None = None) -> RunReport:
    """Solve the relaxations of orders ``k_min..k_max`` and collect a report.

    Errors of a single order are recorded in its record (status ``error``)
    and do not stop the run.
    """
    flags = flags or RunFlags()
    k_min = flags.k_min if flags.k_min is not None else problem.min_order()
    report = RunReport(problem.name, problem.sense, k_min, k_max, flags.seed)
    orders = list(range(k_min, k_max + 1))
    if not orders:
        report.warnings.append(f"no orders to solve: k_max={k_max} < k_min={k_min}")
        return report
    t_start = time.perf_counter()
    single = len(orders) == 1

    def one(k):
        rec = _solve_order(problem, k, flags, single)
        _check_flat(rec, problem, flags, report)
        return rec

    if flags.parallel_orders and len(orders) > 1:
        with ThreadPoolExecutor(max_workers=len(orders)) as pool:
            recs = list(pool.map(one, orders))
        if flags.stop_on_flat:
            cut = next((i for i, r in enumerate(recs) if r["flat"]), len(recs) - 1)
            recs = recs[:cut + 1]
    else:
        recs = []
        for k in orders:
            recs.append(one(k))
            if flags.stop_on_flat and recs[-1]["flat"]:
                break

    sols = {r["k"]: r.pop("_sol", None) for r in recs}
    report.timings = {"orders": {str(r["k"]): r.pop("_time") for r in recs}}
    report.records = recs
    _check_monotone(recs, problem, report)

    flat_k = next((r["k"] for r in recs if r["flat"] and sols[r["k"]] is not None), None)
    if flags.extract:
        t0 = time.perf_counter()
        if flat_k is None:
            report.warnings.append("no flat order reached: optimizer not extracted")
        else:
            report.optimizer = _optimizer_summary(problem, sols[flat_k], flat_k, flags, report)
        report.timings["extract"] = time.perf_counter() - t0
    if flags.certify:
        t0 = time.perf_counter()
        good = [r["k"] for r in recs if sols[r["k"]] is not None and sols[r["k"]].ok]
        k_cert = flat_k if flat_k is not None else (good[-1] if good else None)
        if k_cert is None:
            report.warnings.append("no solved order: certificate not extracted")
        else:
            report.certificate = _certificate_summary(problem, sols[k_cert], k_cert, report)
        report.timings["certify"] = time.perf_counter() - t0
    report.timings["total"] = time.perf_counter() - t_start
    return report


def _check_flat(rec, problem, flags, report):
    sol = rec.get("_sol")
    if sol is None:
        return
    try:
        fr = flatness_check(sol.y, rec["k"], problem, rank_tol=flags.rank_tol)
    except CertifyError as exc:
        rec["message"] = (rec["message"] + "; " if rec["message"] else "") + f"flatness: {exc}"
        return
    rec["flat"] = bool(fr.flat)
    rec["ranks"] = [int(fr.rank_k), int(fr.rank_k_minus_d)]


def _check_monotone(recs, problem, report, tol: float = 1e-6):
    prev = None
    for r in recs:
        if r["primal_obj"] is None:
            continue
        v = r["primal_obj"] if problem.sense == "min" else -r["primal_obj"]
        if prev is not None and v < prev[1] - tol:
            report.warnings.append(
                f"solver accuracy: bound at order {r['k']} is weaker than at order {prev[0]} "
                f"by {prev[1] - v:.3g}")
        prev = (r["k"], v if prev is None else max(v, prev[1]))


def _optimizer_summary(problem, sol, k, flags, report):
    try:
        opt = extract_optimizer(sol.y, k, problem, rank_tol=flags.rank_tol, seed=flags.seed)
    except CertifyError as exc:
        report.warnings.append(f"extraction failed at order {k}: {exc}")
        return None
    check = verify_optimizer(opt, problem)
    residuals = dict(check.as_dict())
    residuals["moment_mismatch"] = moment_mismatch(opt, sol.y, k, problem)
    return {"order": k, "dimension": int(opt.dim),
            "matrices": [np.asarray(X).tolist() for X in opt.X],
            "phi": np.asarray(opt.phi).tolist(),
            "objective_value": problem.user_value(opt.objective_value),
            "residuals": residuals, "passed": bool(check.passed)}


def _certificate_summary(problem, sol, k, report):
    try:
        cert = extract_sos(sol, problem, k)
        residual = verify_sos(cert, problem, k)
    except (CertifyError, ValueError) as exc:
        report.warnings.append(f"certificate extraction failed at order {k}: {exc}")
        return None
    return {"order": k, "lambda": problem.user_value(cert.lam), "residual_norm": residual,
            "term_counts": cert.term_counts}


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(f"{x:.12g}") if math.isfinite(x) else None
    if isinstance(x, complex):
        return _jsonable([x.real, x.imag])
    return x


def _fmt(v, spec=".8g"):
    if v is None:
        return "-"
    if isinstance(v, float):
        return format(v, spec)
    return str(v)


def emit_report(report: RunReport, fmt: str = "json") -> str:
    """Render ``report`` as JSON (sorted keys, 12 significant digits) or a table."""
    data = _jsonable(report.as_dict())
    if fmt == "json":
        return json.dumps(data, sort_keys=True, indent=2)
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    head = ["k", "primal_obj", "dual_obj", "gap", "status", "flat", "ranks"]
    rows = [[_fmt(r["k"]), _fmt(r["primal_obj"]), _fmt(r["dual_obj"]), _fmt(r["gap"], ".2e"),
             r["status"], _fmt(r["flat"]),
             "-" if r["ranks"] is None else "/".join(map(str, r["ranks"]))]
            for r in data["records"]]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(head)]
    line = lambda cells: "  ".join(c.rjust(w) for c, w in zip(cells, widths)).rstrip()
    out = [f"# {report.name or 'problem'} ({report.sense})", line(head),
           line(["-" * w for w in widths])]
    out += [line(row) for row in rows]
    if data["optimizer"]:
        o = data["optimizer"]
        out.append(f"optimizer: order {o['order']}, dimension {o['dimension']}, "
                   f"value {_fmt(o['objective_value'])}, passed {o['passed']}")
    if data["certificate"]:
        c = data["certificate"]
        out.append(f"certificate: order {c['order']}, lambda {_fmt(c['lambda'])}, "
                   f"residual {_fmt(c['residual_norm'], '.2e')}")
    out += [f"warning: {w}" for w in data["warnings"]]
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _threads() -> int:
    raw = os.environ.get("NCPOLY_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        warnings.warn(f"ignoring NCPOLY_THREADS={raw!r}")
        return 1
    return max(1, n)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncpoly", description=(
        "Solve a noncommutative polynomial optimisation problem with the moment hierarchy."))
    ap.add_argument("problem", help="problem file, '-' for stdin")
    ap.add_argument("-k", "--order", type=int, default=None,
                    help="highest relaxation order (default: the minimal order)")
    ap.add_argument("--min-order", type=int, default=None, help="lowest order to solve")
    ap.add_argument("--tol", type=float, default=GAP_TOL, help="solver gap/feasibility tolerance")
    ap.add_argument("--rank-tol", type=float, default=RANK_TOL, help="numerical rank tolerance")
    ap.add_argument("--export-sdpa", metavar="PATH",
                    help="write each order in SDPA format ('{k}' in PATH is the order)")
    ap.add_argument("--certify", action="store_true", help="extract a sum-of-squares certificate")
    ap.add_argument("--extract", action="store_true", help="extract an optimizer when flat")
    ap.add_argument("--stop-on-flat", action="store_true", help="stop at the first flat order")
    ap.add_argument("--format", choices=("json", "table"), default="json")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomised basis choices")
    ap.add_argument("--parallel-orders", action="store_true", help="solve orders concurrently")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.problem == "-":
            text = sys.stdin.read()
        else:
            with open(args.problem, encoding="utf-8") as fh:
                text = fh.read()
        problem = parse_problem(text)
    except ParseError as exc:
        print(f"{args.problem}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"{args.problem}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    flags = RunFlags(tol=args.tol, rank_tol=args.rank_tol, export_sdpa=args.export_sdpa,
                     certify=args.certify, extract=args.extract,
                     stop_on_flat=args.stop_on_flat, seed=args.seed,
                     parallel_orders=args.parallel_orders, k_min=args.min_order)
    k_max = args.order if args.order is not None else problem.min_order()
    with threadpool_limits(limits=_threads()):
        report = run(problem, k_max, flags)
    print(emit_report(report, args.format))
    return EXIT_OK if report.solved else EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
