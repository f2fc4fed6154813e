import string

import pytest
from hypothesis import given, strategies as st

from procurate.textnorm import (
    Stoplist,
    content_lemmas,
    content_words,
    lemmatize,
    stoplist_filter,
    tokenize,
)

from lemma_oracle import LEMMA_ORACLE


@pytest.fixture(scope="module")
def stoplist():
    return Stoplist.default()


# -- tokenize ---------------------------------------------------------------

def test_tokenize_folds_and_strips_punctuation():
    assert tokenize("Add the salt, then STIR!") == ["add", "the", "salt", "then", "stir"]


def test_tokenize_keeps_numerals():
    assert tokenize("preheat to 350") == ["preheat", "to", "350"]


def test_tokenize_keeps_intra_word_hyphen():
    assert tokenize("pre-heat") == ["pre-heat"]


def test_tokenize_apostrophes():
    assert tokenize("don't,  don’t") == ["don't", "don't"]
    assert tokenize("the chef's knife") == ["the", "chef's", "knife"]


def test_tokenize_edge_punctuation_splits():
    assert tokenize("-heat 'em (well)") == ["heat", "em", "well"]
    assert tokenize("") == []
    assert tokenize("  ...  ") == []


@given(st.text(alphabet=string.ascii_letters + string.digits + " ,.'-!?", max_size=80))
def test_tokenize_idempotent_over_own_output(text):
    tokens = tokenize(text)
    assert tokenize(" ".join(tokens)) == tokens


@given(st.text(max_size=80))
def test_tokenize_output_is_lowercase(text):
    for token in tokenize(text):
        assert token == token.casefold()


# -- lemmatize --------------------------------------------------------------

def test_lemmatize_cooking_verbs_and_plurals():
    assert lemmatize("chopped") == "chop"
    assert lemmatize("onions") == "onion"
    assert lemmatize("salt") == "salt"


def test_lemmatize_matches_audited_table():
    wrong = {
        form: (want, lemmatize(form))
        for form, want in LEMMA_ORACLE.items()
        if lemmatize(form) != want
    }
    assert wrong == {}


def test_lemmatize_unknown_token_passthrough():
    assert lemmatize("xqzv") == "xqzv"
    assert lemmatize("sous-vide") == "sous-vide"
    assert lemmatize("350") == "350"


def test_lemmatize_possessive():
    assert lemmatize("chef's") == "chef"
    assert lemmatize("chefs'") == "chefs"


# -- stoplists and content words -------------------------------------------

def test_default_stoplist_minimum_generic_words(stoplist):
    for word in ("make", "prepare", "bake", "recipe", "cook", "how"):
        assert word in stoplist.generic_recipe_words


def test_stoplist_file_format(tmp_path):
    fw = tmp_path / "fw.txt"
    gw = tmp_path / "gw.txt"
    fw.write_text("# comment line\nthe\na  # trailing comment\n\nTo\n", encoding="utf-8")
    gw.write_text("make\n", encoding="utf-8")
    sl = Stoplist.from_files(fw, gw)
    assert sl.function_words == {"the", "a", "to"}
    assert "make" in sl
    assert "salt" not in sl


def test_content_words_worked_examples(stoplist):
    assert content_words("Add the salt, then stir", stoplist) == {"add", "salt", "stir"}
    assert content_words("How to Make a Bean Salad", stoplist) == {"bean", "salad"}


def test_content_words_empty_text(stoplist):
    assert content_words("", stoplist) == frozenset()
    assert content_lemmas("", stoplist) == []


def test_content_lemmas_keep_duplicates_and_order(stoplist):
    got = content_lemmas("add salt and salt and pepper", stoplist)
    assert got == ["add", "salt", "salt", "pepper"]


def test_content_words_inflected_forms_collapse(stoplist):
    a = content_words("chopping the onions", stoplist)
    b = content_words("chopped onion", stoplist)
    assert a == b == {"chop", "onion"}


_DEFAULT_STOPLIST = Stoplist.default()


@given(st.text(alphabet=string.ascii_lowercase + " '", max_size=60))
def test_content_words_subset_of_lemmas(text):
    lemmas = {lemmatize(t) for t in tokenize(text)}
    assert content_words(text, _DEFAULT_STOPLIST) <= lemmas


@given(st.text(alphabet=string.ascii_lowercase + " ", max_size=60))
def test_growing_stoplist_never_grows_content(text):
    small = Stoplist(function_words=frozenset({"the"}))
    big = Stoplist(
        function_words=frozenset({"the", "a", "to"}),
        generic_recipe_words=frozenset({"make", "salt"}),
    )
    assert content_words(text, big) <= content_words(text, small)


def test_content_filter_is_pluggable(stoplist):
    # a drop-in policy can override the stoplist entirely
    keep_all = lambda token, lemma: True
    got = content_lemmas("make the salad", stoplist, content_filter=keep_all)
    assert got == ["make", "the", "salad"]

    nouns_only = lambda token, lemma: lemma in {"salad"}
    assert content_words("make the salad", stoplist, content_filter=nouns_only) == {"salad"}


def test_stoplist_catches_surface_contractions(stoplist):
    # "let's" is stoplisted as a surface form even though its lemma is "let"
    assert content_words("let's make a salad", stoplist) == {"salad"}
