"""Bilingual pre-training corpus curation toolkit.

Pipeline stages: markdown-ish document parsing with byte-lossless
reassembly, pluggable machine-translation backends, n-gram perplexity
filtering, Devanagari-to-Roman transliteration, MinHash/LSH fuzzy
dedup, weighted blend planning, training-plan emission, and a
judge-based evaluation harness. Everything is reachable from the
``synthcorpus`` command-line tool.
"""

__version__ = "0.1.0"
