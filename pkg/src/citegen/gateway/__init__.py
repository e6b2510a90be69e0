from .backends import BackendSpec, DecodingParams, build_backend, StubBackend, OpenAIChatBackend
from .cache import GenerationCache, GenerationRecord, generation_key
from .runner import generate, run_batch, RunManifest

__all__ = [
    "BackendSpec",
    "DecodingParams",
    "build_backend",
    "StubBackend",
    "OpenAIChatBackend",
    "GenerationCache",
    "GenerationRecord",
    "generation_key",
    "generate",
    "run_batch",
    "RunManifest",
]
