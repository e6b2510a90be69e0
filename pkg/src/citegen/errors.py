"""Exception types shared across the harness.

The CLI maps these onto exit codes: validation problems exit 2, upstream
service failures exit 3, incomplete runs exit 4.
"""


class CitegenError(Exception):
    """Base class for all harness errors."""


class ValidationError(CitegenError):
    """Bad configuration, malformed input, or a missing stage artifact."""


class EmptyCorpusError(ValidationError):
    """Ingestion removed every record."""


class MissingArtifactError(ValidationError):
    """A stage was invoked before its inputs exist."""

    def __init__(self, artifact: str, hint: str = ""):
        msg = f"missing artifact: {artifact}"
        if hint:
            msg += f" ({hint})"
        super().__init__(msg)
        self.artifact = artifact


class UpstreamError(CitegenError):
    """A remote dependency (LLM backend, scorer sidecar) failed hard."""


class IncompleteRunError(CitegenError):
    """A batch finished with failed cells; downstream stages should not trust it."""
