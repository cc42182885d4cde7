"""Run configuration: line-oriented config files and the construction grammar.

Config files are UTF-8 text with `[section]` headers and `key = value`
lines; `#` starts a comment.  Sections: [run], [group], [representation],
[pipeline.N], [budgets].  Representations are either a construction
expression

    schottky(t,theta) | irr(d) ∘ <expr> | wedge(p, <expr>) | sym(k, <expr>)
    | sum(<expr>, <expr>) | perturb(eps, seed, <expr>)

or explicit generator matrices (`dim = d`, `generator.i = row; row; ...`).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import numpy as np

from . import constructions as cons
from .errors import ParseError, ValidationError
from .representation import Representation


# --- construction expression grammar ---

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<num>[-+]?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)"
    r"|(?P<lp>\()"
    r"|(?P<rp>\))"
    r"|(?P<comma>,)"
    r"|(?P<comp>∘)"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"bad character {text[pos]!r} in expression {text!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group()))
    out.append(("end", ""))
    return out


class _ExprParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def eat(self, kind):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            raise ParseError(
                f"expected {kind} but found {tok[1]!r} in expression {self.text!r}"
            )
        self.i += 1
        return tok[1]

    def number(self):
        return float(self.eat("num"))

    def integer(self):
        raw = self.eat("num")
        val = float(raw)
        if val != int(val):
            raise ParseError(f"expected an integer, found {raw!r}")
        return int(val)

    def expr(self):
        name = self.eat("name")
        if name == "schottky":
            self.eat("lp")
            t = self.number()
            self.eat("comma")
            theta = self.number()
            self.eat("rp")
            return ("schottky", t, theta)
        if name == "irr":
            self.eat("lp")
            d = self.integer()
            self.eat("rp")
            self.eat("comp")
            return ("irr", d, self.expr())
        if name == "wedge":
            self.eat("lp")
            p = self.integer()
            self.eat("comma")
            sub = self.expr()
            self.eat("rp")
            return ("wedge", p, sub)
        if name == "sym":
            self.eat("lp")
            k = self.integer()
            self.eat("comma")
            sub = self.expr()
            self.eat("rp")
            return ("sym", k, sub)
        if name == "sum":
            self.eat("lp")
            a = self.expr()
            self.eat("comma")
            b = self.expr()
            self.eat("rp")
            return ("sum", a, b)
        if name == "perturb":
            self.eat("lp")
            eps = self.number()
            self.eat("comma")
            seed = self.integer()
            self.eat("comma")
            sub = self.expr()
            self.eat("rp")
            return ("perturb", eps, seed, sub)
        raise ParseError(f"unknown construction {name!r} in expression {self.text!r}")


def parse_expression(text: str):
    """Parse a construction expression into its syntax tree."""
    parser = _ExprParser(text)
    tree = parser.expr()
    parser.eat("end")
    return tree


def format_expression(tree) -> str:
    kind = tree[0]
    if kind == "schottky":
        return f"schottky({_fmt_num(tree[1])}, {_fmt_num(tree[2])})"
    if kind == "irr":
        return f"irr({tree[1]}) ∘ {format_expression(tree[2])}"
    if kind == "wedge":
        return f"wedge({tree[1]}, {format_expression(tree[2])})"
    if kind == "sym":
        return f"sym({tree[1]}, {format_expression(tree[2])})"
    if kind == "sum":
        return f"sum({format_expression(tree[1])}, {format_expression(tree[2])})"
    if kind == "perturb":
        return (
            f"perturb({_fmt_num(tree[1])}, {tree[2]}, {format_expression(tree[3])})"
        )
    raise ValueError(f"unknown node {kind!r}")


def _fmt_num(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


def build_expression(tree, n_generators: int) -> Representation:
    """Instantiate the representation a syntax tree describes."""
    kind = tree[0]
    if kind == "schottky":
        if n_generators != 2:
            raise ValidationError(
                "schottky(...) builds a rank-2 representation but the group "
                f"has rank {n_generators}"
            )
        return cons.schottky_fuchsian(tree[1], tree[2])
    if kind == "irr":
        return cons.compose_irreducible(tree[1], build_expression(tree[2], n_generators))
    if kind == "wedge":
        return cons.exterior_power(build_expression(tree[2], n_generators), tree[1])
    if kind == "sym":
        return cons.symmetric_power(build_expression(tree[2], n_generators), tree[1])
    if kind == "sum":
        return cons.direct_sum(
            build_expression(tree[1], n_generators),
            build_expression(tree[2], n_generators),
        )
    if kind == "perturb":
        return cons.perturb(build_expression(tree[3], n_generators), tree[1], tree[2])
    raise ValueError(f"unknown node {kind!r}")


# --- config file format ---

_COMMANDS = {
    "certify": {"p": int, "radius": int},
    "exponent": {"radius": int, "bins": int},
    "dimension": {"points": int, "depth": int, "scales": int, "seed_offset": int},
    "hyperconvex-scan": {
        "p": int, "q": int, "r": int, "triples": int, "depth": int,
        "cert_radius": int, "separation_floor": float,
    },
    "convergence-profile": {
        "p": int, "q": int, "r": int, "steps": int, "ray": str, "cert_radius": int,
    },
    "shadow-check": {
        "radius": int, "eta_max": int, "s": float, "sample_points": int,
        "sample_depth": int, "angle_window": int, "angle_count": int,
    },
    "boundary-export": {"points": int, "depth": int, "p": int, "cert_radius": int},
}

_COMMAND_DEFAULTS = {
    "certify": {"p": 1, "radius": 8},
    "exponent": {"radius": 10, "bins": 12},
    "dimension": {"points": 2000, "depth": 30, "scales": 12, "seed_offset": 0},
    "hyperconvex-scan": {
        "triples": 1000, "depth": 30, "cert_radius": 8, "separation_floor": 0.05,
    },
    "convergence-profile": {"steps": 20, "ray": "", "cert_radius": 8},
    "shadow-check": {
        "radius": 10, "eta_max": 3, "s": -1.0, "sample_points": 400,
        "sample_depth": 40, "angle_window": 6, "angle_count": 100,
    },
    "boundary-export": {"points": 1000, "depth": 30, "p": 1, "cert_radius": 8},
}

_REQUIRED = {"hyperconvex-scan": ("p", "q", "r"), "convergence-profile": ("p", "q", "r")}


@dataclass
class PipelineStep:
    command: str
    params: dict


@dataclass
class Budgets:
    max_ball: int = 2_000_000
    max_triples: int = 100_000
    wall_clock_hint: int = 0


@dataclass
class RunConfig:
    group: tuple  # ("free", n) or ("automaton", path)
    expr: str | None
    matrices: list | None
    pipeline: list[PipelineStep]
    seed: int = 0
    label: str = ""
    budgets: Budgets = field(default_factory=Budgets)

    def n_generators(self) -> int:
        if self.group[0] == "free":
            return self.group[1]
        from .words import load_automaton

        return load_automaton(self.group[1]).alphabet.n

    def build_representation(self) -> Representation:
        n = self.n_generators()
        if self.expr is not None:
            rep = build_expression(parse_expression(self.expr), n)
        else:
            if len(self.matrices) != n:
                raise ValidationError(
                    f"{len(self.matrices)} generator matrices for a rank-{n} group"
                )
            rep = Representation.from_generators(self.matrices, label=self.label or "explicit")
        if self.label:
            rep.label = self.label
        return rep


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config file; unknown keys are rejected."""
    section = None
    data: dict[str, dict] = {}
    pipeline_keys: list[str] = []
    lines_of: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError("unterminated section header", line=lineno)
            section = line[1:-1].strip()
            base = section.split(".", 1)[0]
            if base not in ("run", "group", "representation", "budgets", "pipeline"):
                raise ParseError(f"unknown section [{section}]", line=lineno)
            if base == "pipeline":
                if section == base or not section.split(".", 1)[1].isdigit():
                    raise ParseError(
                        "pipeline sections are [pipeline.<number>]", line=lineno
                    )
                pipeline_keys.append(section)
            if section in data:
                raise ParseError(f"duplicate section [{section}]", line=lineno)
            data[section] = {}
            continue
        if "=" not in line:
            raise ParseError("expected `key = value`", line=lineno)
        if section is None:
            raise ParseError("key outside of any section", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in data[section]:
            raise ParseError(f"duplicate key {key!r} in [{section}]", line=lineno)
        data[section][key] = value
        lines_of[(section, key)] = lineno

    def take(section_name, key, conv, default=None, required=False):
        sec = data.get(section_name, {})
        if key not in sec:
            if required:
                raise ValidationError(f"missing {key!r} in [{section_name}]")
            return default
        raw_value = sec.pop(key)
        try:
            return conv(raw_value)
        except (ValueError, ParseError) as exc:
            raise ParseError(
                f"bad value for {key!r}: {exc}", line=lines_of[(section_name, key)]
            )

    seed = take("run", "seed", int, default=0)
    label = take("run", "label", str, default="")

    free = take("group", "free", int)
    automaton = take("group", "automaton", str)
    if (free is None) == (automaton is None):
        raise ValidationError("[group] needs exactly one of `free` or `automaton`")
    group = ("free", free) if free is not None else ("automaton", automaton)

    expr = take("representation", "expr", str)
    dim = take("representation", "dim", int)
    matrices = None
    if expr is not None and dim is not None:
        raise ValidationError(
            "[representation] takes either `expr` or explicit matrices, not both"
        )
    if expr is not None:
        parse_expression(expr)  # syntax check now, with line-less errors
    else:
        if dim is None:
            raise ValidationError(
                "[representation] needs `expr` or `dim` + `generator.i` lines"
            )
        gens = {}
        rep_sec = data.get("representation", {})
        for key in list(rep_sec):
            m = re.fullmatch(r"generator\.(\d+)", key)
            if m:
                gens[int(m.group(1))] = _parse_matrix(
                    rep_sec.pop(key), dim, lines_of[("representation", key)]
                )
        if sorted(gens) != list(range(1, len(gens) + 1)):
            raise ValidationError("generator indices must be 1..n without holes")
        matrices = [gens[i] for i in sorted(gens)]

    budgets = Budgets(
        max_ball=take("budgets", "max_ball", int, default=2_000_000),
        max_triples=take("budgets", "max_triples", int, default=100_000),
        wall_clock_hint=take("budgets", "wall_clock_hint", int, default=0),
    )

    pipeline = []
    for sec_name in sorted(pipeline_keys, key=lambda s: int(s.split(".")[1])):
        command = take(sec_name, "command", str, required=True)
        if command not in _COMMANDS:
            raise ValidationError(
                f"unknown command {command!r} in [{sec_name}]; "
                f"known: {', '.join(sorted(_COMMANDS))}"
            )
        params = dict(_COMMAND_DEFAULTS[command])
        for key, conv in _COMMANDS[command].items():
            val = take(sec_name, key, conv)
            if val is not None:
                params[key] = val
        for key in _REQUIRED.get(command, ()):
            if key not in params:
                raise ValidationError(f"[{sec_name}] {command} needs `{key}`")
        pipeline.append(PipelineStep(command=command, params=params))

    # anything still sitting in a section is an unknown key
    for sec_name, sec in data.items():
        for key in sec:
            raise ParseError(
                f"unknown key {key!r} in [{sec_name}]", line=lines_of[(sec_name, key)]
            )

    return RunConfig(
        group=group, expr=expr, matrices=matrices, pipeline=pipeline,
        seed=seed, label=label, budgets=budgets,
    )


def _parse_matrix(text: str, dim: int, lineno: int):
    rows = [r.strip() for r in text.split(";")]
    if len(rows) != dim:
        raise ParseError(f"expected {dim} rows, found {len(rows)}", line=lineno)
    out = []
    for r in rows:
        entries = r.split()
        if len(entries) != dim:
            raise ParseError(
                f"expected {dim} entries per row, found {len(entries)}", line=lineno
            )
        try:
            out.append([float(e) for e in entries])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno)
    return np.array(out)


def emit_config(config: RunConfig) -> str:
    """Canonical text form; emit(parse(x)) is a fixed point of parse/emit."""
    lines = ["[run]", f"seed = {config.seed}"]
    if config.label:
        lines.append(f"label = {config.label}")
    lines += ["", "[group]"]
    if config.group[0] == "free":
        lines.append(f"free = {config.group[1]}")
    else:
        lines.append(f"automaton = {config.group[1]}")
    lines += ["", "[representation]"]
    if config.expr is not None:
        lines.append(f"expr = {format_expression(parse_expression(config.expr))}")
    else:
        dim = len(config.matrices[0])
        lines.append(f"dim = {dim}")
        for i, m in enumerate(config.matrices, start=1):
            rows = "; ".join(" ".join(repr(float(v)) for v in row) for row in np.asarray(m))
            lines.append(f"generator.{i} = {rows}")
    for i, step in enumerate(config.pipeline, start=1):
        lines += ["", f"[pipeline.{i}]", f"command = {step.command}"]
        for key in sorted(step.params):
            val = step.params[key]
            if val == "" or val is None:
                continue
            lines.append(f"{key} = {val}")
    lines += [
        "",
        "[budgets]",
        f"max_ball = {config.budgets.max_ball}",
        f"max_triples = {config.budgets.max_triples}",
        f"wall_clock_hint = {config.budgets.wall_clock_hint}",
        "",
    ]
    return "\n".join(lines)


def validate_config(config: RunConfig):
    """Semantic checks that need the file system: referenced files exist."""
    if config.group[0] == "automaton":
        if not os.path.exists(config.group[1]):
            raise ValidationError(f"automaton file {config.group[1]!r} does not exist")
        from .words import load_automaton

        load_automaton(config.group[1])
    config.build_representation()
