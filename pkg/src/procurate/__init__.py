"""Corpus curation for instructional cooking videos.

Pairs ASR transcripts with written recipes, sieves the pairs on lexical
overlap, and swaps noisy transcript segments for their nearest recipe
steps to produce a clean, timestamped training corpus.
"""

__version__ = "0.1.0"
