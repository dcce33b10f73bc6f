"""Command-line front end.

System files are line oriented::

    # golden-mean shift, phi = 0, psi = 1
    [shift]
    alphabet_size = 2        # optional, checked against the rows
    1 1
    1 0

    [potential phi memory=1]
    * 0                      # '*' fills every word not listed

    [potential psi memory=2]
    11 1.0
    12 log(3)
    21 -log(0.5)

    [options]
    tol = 1e-12
    seed = 7

Words are digit strings when the alphabet has at most 9 symbols and
dot-separated symbol lists (``10.3``) otherwise; dotted form is always
accepted.  ``#`` starts a comment.  Recognised option keys are listed in
``OPTION_TYPES``.

Exit codes: 0 success, 1 computation error, 2 parse or validation error.
Errors are reported as a single JSON object on stderr and nothing is
written to stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import InducedPressureError, ValidationError
from .induced import (
    InducedProblem,
    bs_dimension,
    definitional_scan,
    r_diagnostic,
    solve_bowen,
)
from .measures import equilibrium_check, gibbs_constant_estimate, gibbs_measure, variational_search
from .potentials import PSI_FLOOR, LocallyConstantPotential, higher_block_words, word_code
from .pressure import pressure_definitional, pressure_spectral, require_irreducible
from .sft import Sft, count_words, is_irreducible, period, primitivity_exponent

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_PARSE = 2

VARIATIONAL_SLACK = 1e-8


def _as_int(text):
    x = float(text)
    if not x.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(x)


def _as_float(text):
    x = float(text)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite number, got {text!r}")
    return x


OPTION_TYPES = {
    "tol": _as_float,
    "cap": _as_int,
    "seed": _as_int,
    "samples": _as_int,
    "refine_steps": _as_int,
    "t_max": _as_float,
    "t_step": _as_float,
    "gibbs_depth": _as_int,
}


class ParseError(ValidationError):
    """Syntax or invariant error in a system file, located by line and column."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}" if line is not None else "input"
        if line is not None and column is not None:
            where += f", column {column}"
        super().__init__(f"{where}: {message}")


@dataclass
class SystemFile:
    """Parsed system: shift, named potentials (file order) and options.

    Unpacks as ``sft, potentials, options``.  ``lines`` maps each potential
    name to its header line and per-word source lines, for diagnostics.
    """

    sft: Sft
    potentials: dict
    options: dict
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    def __iter__(self):
        return iter((self.sft, self.potentials, self.options))

    def potential(self, name, role="potential"):
        if name not in self.potentials:
            known = ", ".join(self.potentials) or "none"
            raise ParseError(f"{role} {name!r} is not defined (available: {known})")
        return self.potentials[name]

    def positive_potential(self, name):
        """Look up ``name`` and check it can serve as a time potential."""
        pot = self.potential(name, "psi")
        header, word_lines = self.lines.get(name, (None, {}))
        vals = pot.values
        for word in higher_block_words(pot.sft, pot.memory):
            v = vals[word_code([s - 1 for s in word], pot.sft.alphabet_size)]
            if not v >= PSI_FLOOR:
                raise ParseError(
                    f"psi potential {name!r} must be positive; value {float(v)!r} at word {_format_word(word, pot.sft.alphabet_size)}",
                    word_lines.get(word, header),
                )
        return pot


_HEADER = re.compile(r"^\[\s*(shift|options|potential\s+(?P<name>[A-Za-z_][\w\-]*)\s+memory\s*=\s*(?P<mem>\d+))\s*\]$")
_LOG = re.compile(r"^(?P<sign>[+-]?)log\((?P<arg>[^()]+)\)$")


def _strip(raw):
    text = raw.split("#", 1)[0].rstrip()
    stripped = text.lstrip()
    return stripped, len(text) - len(stripped) + 1


def _tokens(text, col0):
    return [(m.group(), col0 + m.start()) for m in re.finditer(r"\S+", text)]


def parse_value(token):
    """Parse a table value: a float literal, ``log(x)`` or ``-log(x)``."""
    m = _LOG.match(token)
    if m:
        arg = float(m.group("arg"))
        if not arg > 0 or not math.isfinite(arg):
            raise ValueError(f"log argument must be positive and finite, got {m.group('arg')!r}")
        v = math.log(arg)
        return -v if m.group("sign") == "-" else v
    return _as_float(token)


def _parse_word(token, k):
    if "." in token:
        parts = token.split(".")
    elif k <= 9:
        parts = list(token)
    else:
        parts = [token]
    if any(not p.isdigit() for p in parts):
        raise ValueError(f"malformed word {token!r}")
    word = tuple(int(p) for p in parts)
    if any(not 1 <= s <= k for s in word):
        raise ValueError(f"word {token!r} uses a symbol outside 1..{k}")
    return word


def _format_word(word, k):
    return "".join(str(s) for s in word) if k <= 9 else ".".join(str(s) for s in word)


def _format_float(x):
    return repr(float(x))


def parse_system(text):
    """Parse and validate a system file; raises :class:`ParseError`."""
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, col = _strip(raw)
        if not body:
            continue
        if body.startswith("["):
            m = _HEADER.match(body)
            if not m:
                raise ParseError(f"malformed section header {body!r}", lineno, col)
            kind = m.group(1).split()[0]
            current = {"kind": kind, "line": lineno, "body": [], "name": m.group("name"),
                       "memory": int(m.group("mem")) if m.group("mem") else None}
            sections.append(current)
            continue
        if current is None:
            raise ParseError("content before the first section header", lineno, col)
        current["body"].append((lineno, col, body))

    shifts = [s for s in sections if s["kind"] == "shift"]
    if not shifts:
        raise ParseError("missing [shift] section")
    if len(shifts) > 1:
        raise ParseError("duplicate [shift] section", shifts[1]["line"], 1)
    sft = _parse_shift(shifts[0])

    opts = [s for s in sections if s["kind"] == "options"]
    if len(opts) > 1:
        raise ParseError("duplicate [options] section", opts[1]["line"], 1)
    options = _parse_options(opts[0]) if opts else {}

    potentials, lines = {}, {}
    for sec in sections:
        if sec["kind"] != "potential":
            continue
        if sec["name"] in potentials:
            raise ParseError(f"duplicate potential {sec['name']!r}", sec["line"], 1)
        pot, word_lines = _parse_potential(sec, sft)
        potentials[sec["name"]] = pot
        lines[sec["name"]] = (sec["line"], word_lines)
    return SystemFile(sft, potentials, options, lines)


def _parse_shift(sec):
    declared = None
    rows, row_lines = [], []
    for lineno, col, body in sec["body"]:
        if "=" in body:
            key, _, value = (part.strip() for part in body.partition("="))
            if key != "alphabet_size":
                raise ParseError(f"unknown shift key {key!r}", lineno, col)
            if declared is not None:
                raise ParseError("alphabet_size given twice", lineno, col)
            try:
                declared = _as_int(value)
            except ValueError as exc:
                raise ParseError(str(exc), lineno, col) from None
            if declared < 1:
                raise ParseError("alphabet_size must be at least 1", lineno, col)
            continue
        toks = _tokens(body, col)
        row = []
        for tok, c in toks:
            if tok not in ("0", "1"):
                raise ParseError(f"transition entries must be 0 or 1, got {tok!r}", lineno, c)
            row.append(int(tok))
        rows.append(row)
        row_lines.append((lineno, col))
    if not rows:
        raise ParseError("[shift] section has no transition rows", sec["line"], 1)
    k = declared if declared is not None else len(rows[0])
    for row, (lineno, col) in zip(rows, row_lines):
        if len(row) != k:
            raise ParseError(f"transition row has {len(row)} entries, expected {k}", lineno, col)
    if len(rows) != k:
        lineno, col = row_lines[-1]
        raise ParseError(f"[shift] has {len(rows)} rows, expected {k}", lineno, col)
    for row, (lineno, col) in zip(rows, row_lines):
        if not any(row):
            raise ParseError("transition row is all zeros", lineno, col)
    for j in range(k):
        if not any(row[j] for row in rows):
            raise ParseError(f"column {j + 1} of the transition matrix is all zeros", sec["line"], 1)
    return Sft(tuple(tuple(r) for r in rows))


def _parse_options(sec):
    options = {}
    for lineno, col, body in sec["body"]:
        key, eq, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or not value:
            raise ParseError("expected 'key = value'", lineno, col)
        if key not in OPTION_TYPES:
            raise ParseError(f"unknown option {key!r} (known: {', '.join(sorted(OPTION_TYPES))})", lineno, col)
        if key in options:
            raise ParseError(f"option {key!r} given twice", lineno, col)
        try:
            options[key] = OPTION_TYPES[key](value)
        except ValueError as exc:
            raise ParseError(f"option {key!r}: {exc}", lineno, col + body.index(value)) from None
    return options


def _parse_potential(sec, sft):
    k = sft.alphabet_size
    memory = sec["memory"]
    if memory < 1:
        raise ParseError("memory must be at least 1", sec["line"], 1)
    table, word_lines = {}, {}
    fill = None
    fill_line = None
    for lineno, col, body in sec["body"]:
        toks = _tokens(body, col)
        if len(toks) != 2:
            raise ParseError("expected 'WORD VALUE'", lineno, col)
        (wtok, wcol), (vtok, vcol) = toks
        try:
            value = parse_value(vtok)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, vcol) from None
        if wtok == "*":
            if fill is not None:
                raise ParseError("default '*' given twice", lineno, wcol)
            fill, fill_line = value, lineno
            continue
        try:
            word = _parse_word(wtok, k)
        except ValueError as exc:
            raise ParseError(str(exc), lineno, wcol) from None
        if len(word) != memory:
            raise ParseError(f"word {wtok!r} has length {len(word)}, potential memory is {memory}", lineno, wcol)
        if not sft.is_admissible(word):
            raise ParseError(f"word {wtok!r} is not admissible for the shift", lineno, wcol)
        if word in table:
            raise ParseError(f"word {wtok!r} given twice", lineno, wcol)
        table[word] = value
        word_lines[word] = lineno
    missing = []
    for word in higher_block_words(sft, memory):
        if word not in table:
            if fill is None:
                missing.append(_format_word(word, k))
            else:
                table[word] = fill
                word_lines[word] = fill_line
    if missing:
        shown = ", ".join(missing[:5]) + (", ..." if len(missing) > 5 else "")
        raise ParseError(f"potential {sec['name']!r} has no value for {shown}", sec["line"], 1)
    return LocallyConstantPotential(sft, memory, table), word_lines


def emit_system(system):
    """Canonical text for a parsed system: every word explicit, full precision."""
    sft, potentials, options = system
    k = sft.alphabet_size
    out = ["[shift]", f"alphabet_size = {k}"]
    out += [" ".join(str(v) for v in row) for row in sft.transitions]
    for name, pot in potentials.items():
        out += ["", f"[potential {name} memory={pot.memory}]"]
        for word in higher_block_words(sft, pot.memory):
            out.append(f"{_format_word(word, k)} {_format_float(pot.table[word])}")
    if options:
        out += ["", "[options]"]
        for key in sorted(options):
            v = options[key]
            out.append(f"{key} = {v if isinstance(v, int) else _format_float(v)}")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------ output

@dataclass
class Table:
    title: str
    columns: list
    rows: list


def _cell(v, full):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if full else format(float(v), ".7g")
    return str(v)


def render(tables, as_csv=False):
    """Aligned text (7 significant digits) or CSV blocks (full precision).

    Each table becomes one block; blocks are separated by a blank line.
    """
    blocks = []
    for t in tables:
        cells = [[_cell(v, as_csv) for v in row] for row in t.rows]
        if as_csv:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(t.columns)
            w.writerows(cells)
            blocks.append(buf.getvalue())
        else:
            widths = [max(len(c), *(len(r[i]) for r in cells)) if cells else len(c) for i, c in enumerate(t.columns)]
            lines = [f"# {t.title}", "  ".join(c.rjust(wd) for c, wd in zip(t.columns, widths)).rstrip()]
            lines += ["  ".join(c.rjust(wd) for c, wd in zip(r, widths)).rstrip() for r in cells]
            blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


# ---------------------------------------------------------------- commands

def _opt(args, system, key, default=None):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return system.options.get(key, default)


def _problem(args, system):
    phi = system.potential(args.phi, "phi")
    psi = system.positive_potential(args.psi)
    return InducedProblem(system.sft, phi, psi, f"{args.phi}/{args.psi}")


def _cmd_pressure(args, system):
    phi = system.potential(args.phi, "phi")
    p = pressure_spectral(system.sft, phi, _opt(args, system, "tol", 1e-12))
    columns, row = ["phi", "pressure"], [args.phi, p]
    if args.definitional is not None:
        require_irreducible(system.sft)
        columns.append(f"definitional_n{args.definitional}")
        row.append(pressure_definitional(system.sft, phi, args.definitional, _opt(args, system, "cap")))
    return [Table("pressure", columns, [row])]


def _cmd_induced(args, system):
    prob = _problem(args, system)
    res = solve_bowen(prob, tol_inner=_opt(args, system, "tol", 1e-12))
    return [Table("induced pressure", ["beta", "bracket_width", "residual", "evaluations"],
                  [[res.beta, res.bracket_width, res.residual, res.evaluations]])]


def _cmd_bs_dim(args, system):
    psi = system.positive_potential(args.psi)
    dim = bs_dimension(system.sft, psi)
    return [Table("bs dimension", ["psi", "dimension"], [[args.psi, dim]])]


def _state_labels(mu, prob):
    k = prob.sft.alphabet_size
    if mu.sft == prob.sft:
        return [_format_word((i,), k) for i in range(1, k + 1)]
    # recoded alphabet: blocks of length memory - 1
    return [_format_word(w, k) for w in higher_block_words(prob.sft, prob.memory - 1)]


def _cmd_gibbs(args, system):
    prob = _problem(args, system)
    mu, beta = gibbs_measure(prob, _opt(args, system, "tol", 1e-12))
    check = equilibrium_check(mu, prob, beta_star=beta)
    labels = _state_labels(mu, prob)
    depth = _opt(args, system, "gibbs_depth", 8)
    bands = gibbs_constant_estimate(mu, prob, beta, depth, _opt(args, system, "cap"))
    n = len(labels)
    return [
        Table("gibbs summary", ["beta", "quotient", "gap"], [[beta, check.quotient, check.gap]]),
        Table("transition matrix P", ["from", "to", "p"],
              [[labels[i], labels[j], float(mu.transition[i, j])]
               for i in range(n) for j in range(n) if mu.sft.matrix[i, j]]),
        Table("stationary vector pi", ["state", "pi"], [[labels[i], float(mu.stationary[i])] for i in range(n)]),
        Table("gibbs ratio bands", ["depth", "k_low", "k_high", "spread"],
              [[int(d), float(lo), float(hi), float(hi / lo)]
               for d, lo, hi in zip(bands.depths, bands.k_low, bands.k_high)]),
    ]


def _cmd_variational(args, system):
    prob = _problem(args, system)
    seed = _opt(args, system, "seed")
    if seed is None:
        raise ParseError("variational-check needs a seed (--seed or 'seed' in [options])")
    samples = _opt(args, system, "samples", 2000)
    steps = _opt(args, system, "refine_steps", 500)
    res = variational_search(prob, samples, steps, seed, args.inject_gibbs)
    beta = solve_bowen(prob).beta
    gap = res.best_quotient - beta
    verdict = "PASS" if res.best_quotient <= beta + VARIATIONAL_SLACK else "FAIL"
    return [Table("variational check", ["samples", "seed", "best_quotient", "beta", "gap", "verdict"],
                  [[samples, seed, res.best_quotient, beta, gap, verdict]])]


def _cmd_definitional(args, system):
    prob = _problem(args, system)
    t_max = _opt(args, system, "t_max")
    if t_max is None:
        raise ParseError("definitional needs --t-max or 't_max' in [options]")
    scan = definitional_scan(prob, t_max, _opt(args, system, "t_step"), args.variant, _opt(args, system, "cap"))
    return [
        Table("partition sum rates", ["T", "log_rate"], [[float(t), float(r)] for t, r in zip(scan.grid, scan.log_rates)]),
        Table("definitional estimate", ["variant", "estimate", "partial"], [[scan.variant, scan.estimate, scan.partial]]),
    ]


def _cmd_r_diagnostic(args, system):
    prob = _problem(args, system)
    rep = r_diagnostic(prob, args.beta, args.t_grid, _opt(args, system, "cap"))
    return [
        Table("R samples", ["T", "R", "tail_bound", "horizon"],
              [[t, v, float(b), int(h)] for (t, v), b, h in zip(rep.samples, rep.tail_bounds, rep.horizons)]),
        Table("R verdict", ["beta", "pressure", "verdict"], [[rep.beta, rep.pressure, rep.verdict]]),
    ]


def _cmd_info(args, system):
    sft = system.sft
    irreducible = is_irreducible(sft)
    prim = primitivity_exponent(sft)
    summary = Table("shift", ["alphabet_size", "irreducible", "mixing", "period", "primitivity_exponent"],
                    [[sft.alphabet_size, irreducible, prim is not None,
                      period(sft) if irreducible else "-", prim if prim is not None else "-"]])
    counts = Table("word counts", ["length", "count"],
                   [[n, count_words(sft, n)] for n in range(1, args.max_length + 1)])
    pots = Table("potentials", ["name", "memory", "min", "max"],
                 [[name, p.memory, float(np.nanmin(p.values)), float(np.nanmax(p.values))]
                  for name, p in system.potentials.items()])
    return [summary, counts, pots]


COMMANDS = {
    "pressure": _cmd_pressure,
    "induced": _cmd_induced,
    "bs-dim": _cmd_bs_dim,
    "gibbs": _cmd_gibbs,
    "variational-check": _cmd_variational,
    "definitional": _cmd_definitional,
    "r-diagnostic": _cmd_r_diagnostic,
    "info": _cmd_info,
}


@dataclass
class CommandResult:
    code: int
    stdout: str
    stderr: str


def _error_line(kind, exc):
    payload = {"error": kind, "type": type(exc).__name__, "message": getattr(exc, "message", str(exc))}
    if isinstance(exc, ParseError):
        payload["line"] = exc.line
        payload["column"] = exc.column
    return json.dumps(payload) + "\n"


def run_command(command, args, system):
    """Run ``command`` on a parsed system; never raises for library errors."""
    try:
        tables = COMMANDS[command](args, system)
    except ValidationError as exc:
        return CommandResult(EXIT_PARSE, "", _error_line("validation", exc))
    except (InducedPressureError, ArithmeticError, ValueError) as exc:
        return CommandResult(EXIT_COMPUTE, "", _error_line("computation", exc))
    return CommandResult(EXIT_OK, render(tables, args.csv), "")


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(json.dumps({"error": "usage", "message": message}) + "\n")
        raise SystemExit(EXIT_PARSE)


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    parser = _Parser(prog="induced-pressure", description="Induced topological pressure on subshifts of finite type.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("system", help="system file ('-' reads stdin)")
        p.add_argument("--csv", action="store_true", help="CSV output with full precision")
        p.add_argument("--cap", type=int, default=None, help="enumeration cap (words)")
        p.add_argument("--tol", type=float, default=None, help="eigenvalue tolerance")
        return p

    def phi_psi(p, phi=True):
        if phi:
            p.add_argument("--phi", required=True, metavar="NAME")
        p.add_argument("--psi", required=True, metavar="NAME")

    p = add("pressure", "topological pressure of a potential")
    p.add_argument("--phi", required=True, metavar="NAME")
    p.add_argument("--definitional", type=int, default=None, metavar="N",
                   help="also report (1/N) log of the length-N partition sum")

    phi_psi(add("induced", "induced pressure (Bowen root)"))
    phi_psi(add("bs-dim", "BS dimension of a time potential"), phi=False)

    p = add("gibbs", "Gibbs measure tables and ratio bands")
    phi_psi(p)
    p.add_argument("--gibbs-depth", dest="gibbs_depth", type=int, default=None)

    p = add("variational-check", "random search over Markov measures")
    phi_psi(p)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--refine-steps", dest="refine_steps", type=int, default=None)
    p.add_argument("--inject-gibbs", action="store_true")

    p = add("definitional", "partition-sum rates on a grid of levels")
    phi_psi(p)
    p.add_argument("--t-max", dest="t_max", type=float, default=None)
    p.add_argument("--t-step", dest="t_step", type=float, default=None)
    p.add_argument("--variant", choices=("q", "p"), default="q")

    p = add("r-diagnostic", "truncated R sums and bounded/growing verdict")
    phi_psi(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--t-grid", dest="t_grid", type=_float_list, default=None, metavar="T1,T2,...")

    p = add("info", "shift summary and word counts")
    p.add_argument("--max-length", dest="max_length", type=int, default=8)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.system == "-":
            text = sys.stdin.read()
        else:
            with open(args.system, encoding="utf-8") as fh:
                text = fh.read()
        system = parse_system(text)
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "io", "message": str(exc)}) + "\n")
        return EXIT_PARSE
    except ValidationError as exc:
        sys.stderr.write(_error_line("parse", exc))
        return EXIT_PARSE
    result = run_command(args.command, args, system)
    sys.stdout.write(result.stdout)
    sys.stderr.write(result.stderr)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
