"""Scorer sidecar service.

Serves similarity metrics, binary entailment, sentence-grid consistency
scoring, and text embeddings over a small HTTP protocol. Which model backs
which metric is configuration (a registry file), never code: the service
reports exactly the loadable set in /v1/health and rejects requests for
anything else.
"""

__version__ = "0.1.0"

PROTOCOL_VERSION = "1"
