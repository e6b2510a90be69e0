"""Prompt assembly from (template, configuration, instance data)."""

from dataclasses import dataclass

from ..corpus.types import TARGET_MARK, CitationInstance, ExampleSentence
from ..errors import ValidationError
from .config import INTENT_NONE, PromptConfig
from .templates import Template


@dataclass
class RenderedPrompt:
    system_text: str
    user_text: str
    config: PromptConfig
    instance_id: str
    token_estimate: int

    def full_text(self) -> str:
        if not self.system_text:
            return self.user_text
        return self.system_text + "\n" + self.user_text

    def to_dict(self) -> dict:
        return {
            "system": self.system_text,
            "user": self.user_text,
            "config": self.config.to_string(),
            "instance_id": self.instance_id,
            "token_estimate": self.token_estimate,
        }


def _substitute(text: str, values: dict[str, str]) -> str:
    # plain replace, not str.format: abstracts may contain braces
    for key, val in values.items():
        text = text.replace("{" + key + "}", val)
    return text


def render_prompt(
    template: Template,
    config: PromptConfig,
    instance: CitationInstance,
    intent_text: str | None = None,
    example: ExampleSentence | None = None,
) -> RenderedPrompt:
    """Deterministic, byte-exact prompt assembly.

    The intent is required iff the config asks for one, the example iff the
    config asks for one; the instance must cite a single paper. The example
    sentence's target mark is normalized to [REF#1] defensively (pool
    sentences already arrive normalized).
    """
    if template.template_id != config.template_id:
        raise ValidationError(
            f"template {template.template_id} does not match config {config.to_string()}"
        )
    if len(instance.citations) != 1:
        raise ValidationError(f"{instance.instance_id}: prompts require a single citation")
    wants_intent = config.intent_kind != INTENT_NONE
    if wants_intent and not intent_text:
        raise ValidationError(f"config {config} requires an intent for {instance.instance_id}")
    if not wants_intent and intent_text is not None:
        raise ValidationError(f"config {config} does not take an intent")
    if config.use_example and example is None:
        raise ValidationError(f"config {config} requires an example for {instance.instance_id}")
    if not config.use_example and example is not None:
        raise ValidationError(f"config {config} does not take an example")

    example_text = ""
    if example is not None:
        example_text = example.sentence
        if example.mark and example.mark in example_text:
            example_text = example_text.replace(example.mark, TARGET_MARK)

    values = {
        "citing_abstract": instance.citing.abstract,
        "cited_abstract": instance.citations[0].cited.abstract,
        "intent": intent_text or "",
        "example": example_text,
    }
    system_text = _substitute(template.render_part("system", config), values)
    user_text = _substitute(template.render_part("user", config), values)
    return RenderedPrompt(
        system_text=system_text,
        user_text=user_text,
        config=config,
        instance_id=instance.instance_id,
        token_estimate=len(system_text.split()) + len(user_text.split()),
    )


def baseline_text(instance: CitationInstance) -> str:
    """Concatenated cited + citing abstracts, used directly as the baseline output."""
    if len(instance.citations) != 1:
        raise ValidationError(f"{instance.instance_id}: baseline requires a single citation")
    cited = instance.citations[0].cited.abstract
    citing = instance.citing.abstract
    if not cited or not citing:
        raise ValidationError(f"{instance.instance_id}: baseline requires both abstracts")
    return cited + "\n\n" + citing
