"""Encoder selection and the hashed encoder's contract."""

import numpy as np
import pytest

from embedder_sidecar.encoders import (
    DEFAULT_MODEL,
    EncoderError,
    HashedEncoder,
    get_encoder,
)


def test_hashed_is_deterministic():
    a = HashedEncoder(24).encode_batch(["mix the dough", "mix the dough"])
    b = HashedEncoder(24).encode_batch(["mix the dough"])
    assert np.array_equal(a[0], a[1])
    assert np.array_equal(a[0], b[0])


def test_hashed_rows_are_unit_norm_float32():
    rows = HashedEncoder(48).encode_batch(["one", "two", ""])
    assert rows.dtype == np.float32
    assert rows.shape == (3, 48)
    norms = np.linalg.norm(rows.astype(np.float64), axis=1)
    assert np.all(np.abs(norms - 1.0) <= 1e-4)


def test_distinct_texts_differ():
    rows = HashedEncoder(32).encode_batch(["knead", "rest", "bake"])
    assert not np.array_equal(rows[0], rows[1])
    assert not np.array_equal(rows[1], rows[2])


def test_get_encoder_parses_hashed_spec():
    encoder = get_encoder("hashed/12")
    assert isinstance(encoder, HashedEncoder)
    assert encoder.dim == 12


@pytest.mark.parametrize("spec", ["hashed/", "hashed/zero", "hashed/-3", "hashed/0"])
def test_bad_hashed_spec_raises(spec):
    with pytest.raises(EncoderError):
        get_encoder(spec)


def test_default_model_is_a_sentence_encoder_id():
    assert DEFAULT_MODEL == "sentence-transformers/all-mpnet-base-v2"


def test_missing_backend_is_a_clear_error():
    try:
        import sentence_transformers  # noqa: F401
    except ImportError:
        with pytest.raises(EncoderError, match="sentence-transformers backend"):
            get_encoder(DEFAULT_MODEL)
    else:
        pytest.skip("backend installed; error path not reachable")


def test_pretrained_model_round_trip():
    st = pytest.importorskip("sentence_transformers")
    try:
        encoder = get_encoder(DEFAULT_MODEL)
    except Exception as exc:  # no weights in offline environments
        pytest.skip(f"model unavailable: {exc}")
    rows = encoder.encode_batch(["preheat the oven", "preheat the oven"])
    assert rows.shape == (2, encoder.dim)
    assert np.array_equal(rows[0], rows[1])
    norms = np.linalg.norm(rows.astype(np.float64), axis=1)
    assert np.all(np.abs(norms - 1.0) <= 1e-4)
