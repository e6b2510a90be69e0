from .config import PromptConfig, parse_config, enumerate_run_matrix, DEFAULT_COMPONENT_SETS
from .templates import Template, TemplateSegment, load_template, load_template_dir, default_template_dir
from .render import RenderedPrompt, render_prompt, baseline_text

__all__ = [
    "PromptConfig",
    "parse_config",
    "enumerate_run_matrix",
    "DEFAULT_COMPONENT_SETS",
    "Template",
    "TemplateSegment",
    "load_template",
    "load_template_dir",
    "default_template_dir",
    "RenderedPrompt",
    "render_prompt",
    "baseline_text",
]
