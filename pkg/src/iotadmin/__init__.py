"""IoT administration toolkit.

Two pipelines under one roof:

* retrieval-augmented question answering over a corpus of device manuals
  (chunking, embedding, exact vector search, prompt assembly, generation),
* network-flow anomaly classification (CSV ingestion, textualization,
  a naive-Bayes baseline, and the full evaluation report machinery),

plus the metric implementations (BLEU, ROUGE, METEOR, embedding-based
scoring), resource accounting, an HTTP service, and a CLI.
"""

__version__ = "0.1.0"
