"""cmreader: desk-scale conversational machine reading.

Parses rule texts into clause-level conditions, predicts per-condition
entailment states from user feedback, reasons out a four-way decision
(Yes / No / Inquire / Irrelevant), and extracts + rephrases follow-up
clarification questions. Trainable end-to-end on synthetic corpora with a
logic oracle, and servable through an HTTP session API.
"""

__version__ = "0.1.0"
