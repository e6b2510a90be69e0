"""Instruction templates as conditional segments.

Templates live in JSON files, not code, so the instruction pool can grow
without a rebuild. Each template has a system part and a user part, both
ordered lists of segments. A segment carries a boolean condition over the
input components {A, IC, IF, E} (plus the shorthand I = IC|IF) and a text
fragment; rendering concatenates the fragments whose condition holds for
the active configuration and trims the result. Fragments embed their own
joining whitespace, which keeps the all-components render byte-exact while
making every reduced variant deterministic and reviewable in the file.
"""

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import ValidationError
from .config import INTENT_CATEGORICAL, INTENT_FREE_FORM, INTENT_NONE, PromptConfig

_ATOMS = ("A", "IC", "IF", "E", "I", "true")
_TOKEN_RE = re.compile(r"\s*([A-Za-z]+|[()!&|])")


class Condition:
    """Parsed boolean expression over input-component atoms."""

    def __init__(self, source: str):
        self.source = source
        self._ast, self.atoms = _parse_expr(source)

    def evaluate(self, config: PromptConfig) -> bool:
        env = {
            "A": config.use_abstracts,
            "IC": config.intent_kind == INTENT_CATEGORICAL,
            "IF": config.intent_kind == INTENT_FREE_FORM,
            "I": config.intent_kind != INTENT_NONE,
            "E": config.use_example,
            "true": True,
        }
        return _eval(self._ast, env)

    def mentions(self, component: str) -> bool:
        """Whether the expression depends on the given component flag."""
        if component in ("IC", "IF"):
            return component in self.atoms or "I" in self.atoms
        if component == "I":
            return bool({"I", "IC", "IF"} & self.atoms)
        return component in self.atoms


def _tokenize(src: str) -> list[str]:
    tokens, pos = [], 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            if src[pos:].strip():
                raise ValidationError(f"bad condition syntax at {src[pos:]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def _parse_expr(src: str):
    tokens = _tokenize(src)
    if not tokens:
        raise ValidationError(f"empty condition: {src!r}")
    pos = 0
    atoms: set[str] = set()

    def parse_or():
        node = parse_and()
        while peek() == "|":
            advance()
            node = ("or", node, parse_and())
        return node

    def parse_and():
        node = parse_not()
        while peek() == "&":
            advance()
            node = ("and", node, parse_not())
        return node

    def parse_not():
        if peek() == "!":
            advance()
            return ("not", parse_not())
        return parse_atom()

    def parse_atom():
        tok = peek()
        if tok == "(":
            advance()
            node = parse_or()
            if peek() != ")":
                raise ValidationError(f"unbalanced parens in condition {src!r}")
            advance()
            return node
        if tok in _ATOMS:
            advance()
            if tok != "true":
                atoms.add(tok)
            return ("atom", tok)
        raise ValidationError(f"unknown token {tok!r} in condition {src!r}")

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def advance():
        nonlocal pos
        pos += 1

    ast = parse_or()
    if pos != len(tokens):
        raise ValidationError(f"trailing tokens in condition {src!r}")
    return ast, atoms


def _eval(node, env) -> bool:
    kind = node[0]
    if kind == "atom":
        return env[node[1]]
    if kind == "not":
        return not _eval(node[1], env)
    if kind == "and":
        return _eval(node[1], env) and _eval(node[2], env)
    return _eval(node[1], env) or _eval(node[2], env)


@dataclass
class TemplateSegment:
    condition: Condition
    text: str


@dataclass
class Template:
    template_id: int
    style: str
    system: list[TemplateSegment]
    user: list[TemplateSegment]

    def render_part(self, part: str, config: PromptConfig) -> str:
        segments = self.system if part == "system" else self.user
        pieces = [s.text for s in segments if s.condition.evaluate(config)]
        return "".join(pieces).strip()


def load_template(path: Path) -> Template:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return Template(
            template_id=int(doc["template_id"]),
            style=str(doc["style"]),
            system=[TemplateSegment(Condition(s["when"]), s["text"]) for s in doc["system"]],
            user=[TemplateSegment(Condition(s["when"]), s["text"]) for s in doc["user"]],
        )
    except KeyError as exc:
        raise ValidationError(f"template file {path} missing field {exc}") from exc


def default_template_dir() -> Path:
    return Path(str(resources.files("citegen"))) / "templates"


def load_template_dir(template_dir: Path | None = None) -> dict[int, Template]:
    tdir = Path(template_dir) if template_dir else default_template_dir()
    templates = {}
    for path in sorted(tdir.glob("template_*.json")):
        t = load_template(path)
        if t.template_id in templates:
            raise ValidationError(f"duplicate template id {t.template_id} in {tdir}")
        templates[t.template_id] = t
    if not templates:
        raise ValidationError(f"no template files found in {tdir}")
    return templates
