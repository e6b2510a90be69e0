"""Prompt configuration grammar: `#(+A)(+IC|+IF)(+E)`.

`#` is the instruction template id (1-6), `+A` adds the citing and cited
abstracts, `+IC`/`+IF` add a categorical or free-form intent (mutually
exclusive), `+E` adds an example citation sentence.
"""

from dataclasses import dataclass

from ..errors import ValidationError

TEMPLATE_IDS = (1, 2, 3, 4, 5, 6)

INTENT_NONE = "none"
INTENT_CATEGORICAL = "categorical"
INTENT_FREE_FORM = "free_form"


@dataclass(frozen=True)
class PromptConfig:
    template_id: int
    use_abstracts: bool = False
    intent_kind: str = INTENT_NONE
    use_example: bool = False

    def __post_init__(self):
        if self.template_id not in TEMPLATE_IDS:
            raise ValidationError(f"unknown template id {self.template_id}")
        if self.intent_kind not in (INTENT_NONE, INTENT_CATEGORICAL, INTENT_FREE_FORM):
            raise ValidationError(f"unknown intent kind {self.intent_kind!r}")

    def to_string(self) -> str:
        """Canonical configuration string, components in grammar order."""
        parts = [str(self.template_id)]
        if self.use_abstracts:
            parts.append("+A")
        if self.intent_kind == INTENT_CATEGORICAL:
            parts.append("+IC")
        elif self.intent_kind == INTENT_FREE_FORM:
            parts.append("+IF")
        if self.use_example:
            parts.append("+E")
        return "".join(parts)

    def component_set(self) -> str:
        """The component part of the string, without the template id."""
        return self.to_string()[len(str(self.template_id)) :]

    def __str__(self) -> str:
        return self.to_string()


def parse_config(spec: str) -> PromptConfig:
    """Parse a configuration string like "1+A+IF+E".

    Component order is not enforced on input; the canonical form always
    emits A, intent, E in that order.
    """
    spec = spec.strip()
    if not spec:
        raise ValidationError("empty configuration string")
    parts = spec.split("+")
    head = parts[0].strip()
    if not head.isdigit():
        raise ValidationError(f"configuration must start with a template id: {spec!r}")
    template_id = int(head)
    if template_id not in TEMPLATE_IDS:
        raise ValidationError(f"template id out of range in {spec!r}")

    use_abstracts = False
    intent_kind = INTENT_NONE
    use_example = False
    for raw in parts[1:]:
        token = raw.strip()
        if token == "A":
            if use_abstracts:
                raise ValidationError(f"duplicate +A in {spec!r}")
            use_abstracts = True
        elif token in ("IC", "IF"):
            if intent_kind != INTENT_NONE:
                raise ValidationError(f"+IC and +IF are mutually exclusive in {spec!r}")
            intent_kind = INTENT_CATEGORICAL if token == "IC" else INTENT_FREE_FORM
        elif token == "E":
            if use_example:
                raise ValidationError(f"duplicate +E in {spec!r}")
            use_example = True
        else:
            raise ValidationError(f"unknown component {token!r} in {spec!r}")
    return PromptConfig(
        template_id=template_id,
        use_abstracts=use_abstracts,
        intent_kind=intent_kind,
        use_example=use_example,
    )


# The study's run matrix: abstracts always on, intent/example toggled.
DEFAULT_COMPONENT_SETS = ("+A", "+A+E", "+A+IC", "+A+IF", "+A+IC+E", "+A+IF+E")


def enumerate_run_matrix(
    templates: list[int] | None = None,
    component_sets: list[str] | None = None,
) -> list[PromptConfig]:
    """Cross templates with component sets, template-major order."""
    templates = list(templates) if templates is not None else list(TEMPLATE_IDS)
    sets = list(component_sets) if component_sets is not None else list(DEFAULT_COMPONENT_SETS)
    configs = []
    for tid in templates:
        for comp in sets:
            configs.append(parse_config(f"{tid}{comp}"))
    return configs
