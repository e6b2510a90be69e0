"""citegen: an experiment harness for citation text generation with LLMs.

Pipeline stages: ingest a scholarly paragraph corpus, build an example
sentence pool, attach citation intents, render prompts from a template x
input-component grammar, collect generations through a cached gateway,
score them with surface / lexical / model-based metrics, and analyze the
results (aggregation, correlations, significance, human evaluation).
"""

__version__ = "0.1.0"
