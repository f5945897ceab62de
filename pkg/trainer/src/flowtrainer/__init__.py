"""Transformer fine-tuning for textualized network flows.

Consumes the textualized JSON Lines format ({"text": ..., "label": ...})
produced by the flow pipeline and serves the resulting classifier behind
the classify wire contract (POST /v1/classify).
"""

__version__ = "0.1.0"
