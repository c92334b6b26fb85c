#!/usr/bin/env python3
"""MILP backend for idmilp: reads an LP file, solves it with HiGHS through
scipy.optimize.milp, and writes a solution file.

Usage: highs_backend.py <model.lp> <solution.sol>

The solution file holds `status <optimal|feasible|infeasible|timeout>`,
`objective <value>` and one `name value` line per column. IDMILP_TIME_LIMIT
(seconds) bounds the solve.
"""

import math
import os
import re
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix

SECTIONS = {
    "maximize": "obj", "maximise": "obj", "maximum": "obj", "max": "obj",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "bound": "bounds",
    "binary": "binary", "binaries": "binary", "bin": "binary",
    "general": "general", "generals": "general", "gen": "general",
    "end": "end",
}
TOKEN = re.compile(r"\s*(<=|>=|=<|=>|<|>|=|:|[+-]|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[^\s:<>=+-]+)")


def tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot tokenize: {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def is_number(tok):
    try:
        float(tok)
        return tok.lower() not in ("inf", "infinity", "nan")
    except ValueError:
        return False


def parse_value(tokens, i):
    sign = 1.0
    while tokens[i] in "+-":
        sign *= -1.0 if tokens[i] == "-" else 1.0
        i += 1
    tok = tokens[i].lower()
    if tok in ("inf", "infinity"):
        return sign * math.inf, i + 1
    return sign * float(tokens[i]), i + 1


class Model:
    def __init__(self):
        self.columns = {}
        self.order = []
        self.objective = {}
        self.rows = []
        self.lower = {}
        self.upper = {}
        self.binary = set()

    def column(self, name):
        if name not in self.columns:
            self.columns[name] = len(self.order)
            self.order.append(name)
        return self.columns[name]

    def read_terms(self, tokens, i):
        terms = {}
        while i < len(tokens) and tokens[i] not in ("<=", ">=", "=<", "=>", "<", ">", "="):
            sign, coef = 1.0, 1.0
            while tokens[i] in ("+", "-"):
                sign *= -1.0 if tokens[i] == "-" else 1.0
                i += 1
            if is_number(tokens[i]):
                coef = float(tokens[i])
                i += 1
            name = tokens[i]
            i += 1
            col = self.column(name)
            terms[col] = terms.get(col, 0.0) + sign * coef
        return terms, i


def parse_lp(text):
    model = Model()
    section = None
    obj_tokens, row_tokens = [], []
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = SECTIONS.get(line.lower())
        if key is None and line.lower() in ("minimize", "minimise", "minimum", "min"):
            raise ValueError("minimization is not supported")
        if key is not None:
            section = key
            if key == "end":
                break
            continue
        tokens = tokenize(line)
        if section == "obj":
            obj_tokens += tokens
        elif section == "rows":
            row_tokens += tokens
        elif section == "bounds":
            parse_bound(model, tokens)
        elif section == "binary":
            for name in tokens:
                model.binary.add(model.column(name))
        elif section == "general":
            raise ValueError("general integers are not supported")
        else:
            raise ValueError(f"text outside of a section: {line}")

    i = 2 if len(obj_tokens) >= 2 and obj_tokens[1] == ":" else 0
    model.objective, _ = model.read_terms(obj_tokens, i)

    i = 0
    while i < len(row_tokens):
        name = None
        if i + 1 < len(row_tokens) and row_tokens[i + 1] == ":":
            name, i = row_tokens[i], i + 2
        terms, i = model.read_terms(row_tokens, i)
        sense = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(row_tokens[i], row_tokens[i])
        rhs, i = parse_value(row_tokens, i + 1)
        model.rows.append((name, terms, sense, rhs))
    return model


def parse_bound(model, tokens):
    if len(tokens) == 2 and tokens[1].lower() == "free":
        col = model.column(tokens[0])
        model.lower[col], model.upper[col] = -math.inf, math.inf
        return
    ops = {"<=": "<=", "=<": "<=", "<": "<=", ">=": ">=", "=>": ">=", ">": ">=", "=": "="}
    if not (is_number(tokens[0]) or tokens[0] in "+-" or tokens[0].lower() in ("inf", "infinity")):
        col = model.column(tokens[0])
        value, _ = parse_value(tokens, 2)
        op = ops[tokens[1]]
        if op in ("<=", "="):
            model.upper[col] = value
        if op in (">=", "="):
            model.lower[col] = value
        return
    lo, i = parse_value(tokens, 0)
    op, name = ops[tokens[i]], tokens[i + 1]
    col = model.column(name)
    if op in ("<=", "="):
        model.lower[col] = lo
    if op in (">=", "="):
        model.upper[col] = lo
    i += 2
    if i < len(tokens):
        hi, _ = parse_value(tokens, i + 1)
        if ops[tokens[i]] == "<=":
            model.upper[col] = hi
        else:
            model.lower[col] = hi


def solve(model, time_limit):
    n = len(model.order)
    c = np.zeros(n)
    for col, coef in model.objective.items():
        c[col] = coef
    lower = np.array([model.lower.get(j, 0.0) for j in range(n)])
    upper = np.array([model.upper.get(j, math.inf) for j in range(n)])
    integrality = np.zeros(n)
    for j in model.binary:
        integrality[j] = 1
        lower[j], upper[j] = max(lower[j], 0.0), min(upper[j], 1.0)

    constraints = []
    if model.rows:
        data, rows, cols, lb, ub = [], [], [], [], []
        for r, (_, terms, sense, rhs) in enumerate(model.rows):
            for col, coef in terms.items():
                rows.append(r)
                cols.append(col)
                data.append(coef)
            lb.append(rhs if sense in (">=", "=") else -math.inf)
            ub.append(rhs if sense in ("<=", "=") else math.inf)
        matrix = csr_matrix((data, (rows, cols)), shape=(len(model.rows), n))
        constraints.append(LinearConstraint(matrix, lb, ub))

    options = {"mip_rel_gap": 1e-9, "presolve": True}
    if time_limit is not None:
        options["time_limit"] = time_limit
    if n == 0:
        return "optimal", 0.0, np.zeros(0)
    result = milp(-c, integrality=integrality, bounds=Bounds(lower, upper), constraints=constraints, options=options)
    if result.status == 0:
        status = "optimal"
    elif result.status == 2:
        return "infeasible", None, None
    elif result.x is not None:
        status = "feasible"
    elif result.status == 1:
        return "timeout", None, None
    else:
        raise RuntimeError(f"HiGHS failed: {result.message}")
    x = np.array(result.x)
    return status, float(c @ x), x


def main(argv):
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    with open(argv[1], encoding="utf-8") as handle:
        model = parse_lp(handle.read())
    limit = os.environ.get("IDMILP_TIME_LIMIT")
    status, objective, x = solve(model, float(limit) if limit else None)
    with open(argv[2], "w", encoding="utf-8") as out:
        out.write(f"status {status}\n")
        if x is not None:
            out.write(f"objective {objective!r}\n")
            for name, value in zip(model.order, x):
                out.write(f"{name} {float(value)!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
