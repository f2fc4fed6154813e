"""Sentence encoders behind one small interface.

An encoder exposes `dim` and `encode_batch(texts) -> float32 array` of
L2-normalized rows. The default is a pretrained sentence-transformer;
`hashed/<dim>` selects a model-free encoder that derives each vector
from a SHAKE-256 digest of the text. Hashed vectors carry no meaning,
but they are cheap, dimension-exact, and bit-stable across machines,
which is what plumbing and format tests need.
"""

from __future__ import annotations

import hashlib
import logging

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_MODEL = "sentence-transformers/all-mpnet-base-v2"
HASHED_PREFIX = "hashed/"


class EncoderError(ValueError):
    """The requested encoder cannot be constructed."""


class HashedEncoder:
    def __init__(self, dim: int):
        if dim <= 0:
            raise EncoderError(f"hashed encoder dim must be positive, got {dim}")
        self.dim = dim

    def encode_batch(self, texts) -> np.ndarray:
        out = np.empty((len(texts), self.dim), dtype=np.float32)
        for i, text in enumerate(texts):
            digest = hashlib.shake_256(text.encode("utf-8")).digest(4 * self.dim)
            words = np.frombuffer(digest, dtype="<u4").astype(np.float64)
            vec = words / 2.0**31 - 1.0
            out[i] = (vec / np.linalg.norm(vec)).astype(np.float32)
        return out


class SentenceEncoder:
    """Wraps a sentence-transformers model in deterministic inference mode."""

    def __init__(self, model_id: str):
        try:
            import torch
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderError(
                f"model {model_id!r} needs the sentence-transformers backend; "
                'install with: pip install "embedder-sidecar[model]"'
            ) from exc

        torch.backends.cudnn.benchmark = False
        torch.backends.cudnn.deterministic = True
        self._torch = torch
        self._model = SentenceTransformer(model_id)
        self._model.eval()
        self.dim = self._model.get_sentence_embedding_dimension()
        # pooling is whatever the published model ships with; record it
        # here since the output format has no room for metadata
        log.info("model %s: dim %d, modules %s", model_id, self.dim,
                 ", ".join(type(m).__name__ for m in self._model))

    def encode_batch(self, texts) -> np.ndarray:
        with self._torch.inference_mode():
            rows = self._model.encode(
                list(texts),
                batch_size=len(texts),
                convert_to_numpy=True,
                normalize_embeddings=True,
                show_progress_bar=False,
            )
        return np.asarray(rows, dtype=np.float32)


def get_encoder(model_id: str):
    if model_id.startswith(HASHED_PREFIX):
        tail = model_id[len(HASHED_PREFIX):]
        try:
            dim = int(tail)
        except ValueError:
            raise EncoderError(f"bad hashed encoder spec {model_id!r}, want hashed/<dim>")
        return HashedEncoder(dim)
    return SentenceEncoder(model_id)
