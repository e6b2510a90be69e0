"""Sentence segmentation.

The default splitter is rule based: sentence-final punctuation followed by
whitespace and an uppercase letter (or an opening bracket, which citation
marks often start with). Anything smarter can be plugged in through the
SegmenterHandle protocol, e.g. a scispacy-backed segmenter talking to the
scorer sidecar.
"""

import re
from typing import Callable, Protocol


class SegmenterHandle(Protocol):
    def __call__(self, text: str) -> list[str]: ...


_BOUNDARY_RE = re.compile(r"(?<=[.!?])\s+(?=[A-Z\[\(])")


def split_sentences(text: str) -> list[str]:
    parts = _BOUNDARY_RE.split(text.strip())
    return [p.strip() for p in parts if p.strip()]


def get_segmenter(custom: Callable[[str], list[str]] | None = None) -> SegmenterHandle:
    return custom if custom is not None else split_sentences
