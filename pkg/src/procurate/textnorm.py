"""Tokenization, lemmatization and content-word extraction.

All sieve scoring runs on content lemmas: tokens are case-folded, reduced
to dictionary base forms by a rule engine, and filtered against a stoplist
of function words plus generic recipe words. The stoplist files are plain
text, one word per line, '#' starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable

# A token is a maximal run of Unicode alphanumerics; single hyphens or
# apostrophes are kept when they sit between alphanumerics ("pre-heat",
# "don't"). Underscore is excluded on purpose, numerals stay.
_TOKEN_RE = re.compile(r"[^\W_]+(?:['\-][^\W_]+)*")

_VOWELS = "aeiouy"


def tokenize(text: str) -> list[str]:
    """Split text into lowercase tokens.

    Case-folds first, then extracts runs of alphanumerics. Intra-word
    hyphens and apostrophes survive; every other character separates
    tokens. Typographic apostrophes are normalized to ASCII before
    matching so "don’t" and "don't" tokenize the same way.
    """
    folded = text.casefold().replace("’", "'")
    return _TOKEN_RE.findall(folded)


# ---------------------------------------------------------------------------
# Lemmatizer
# ---------------------------------------------------------------------------

# Irregular and rule-breaking forms. Kept small on purpose: regular
# inflection is handled by the suffix rules below, this table only covers
# words the rules would get wrong.
_EXCEPTIONS = {
    # high-frequency irregular verbs
    "am": "be", "is": "be", "are": "be", "was": "be", "were": "be",
    "been": "be", "being": "be",
    "has": "have", "had": "have", "having": "have",
    "does": "do", "did": "do", "done": "do", "doing": "do",
    "goes": "go", "went": "go", "gone": "go", "going": "go",
    "said": "say", "says": "say", "saying": "say",
    "made": "make", "ate": "eat", "eaten": "eat",
    "took": "take", "taken": "take", "got": "get", "gotten": "get",
    "gave": "give", "given": "give", "came": "come",
    "began": "begin", "begun": "begin",
    "brought": "bring", "bought": "buy", "sought": "seek",
    "thought": "think", "caught": "catch", "taught": "teach",
    "held": "hold", "kept": "keep", "left": "leave", "meant": "mean",
    "met": "meet", "sent": "send", "spent": "spend", "built": "build",
    "felt": "feel", "found": "find", "heard": "hear", "told": "tell",
    "sold": "sell", "stood": "stand", "understood": "understand",
    "broke": "break", "broken": "break", "chose": "choose",
    "chosen": "choose", "froze": "freeze", "frozen": "freeze",
    "drew": "draw", "drawn": "draw", "flew": "fly", "flown": "fly",
    "grew": "grow", "grown": "grow", "knew": "know", "known": "know",
    "threw": "throw", "thrown": "throw", "blew": "blow", "blown": "blow",
    "fell": "fall", "fallen": "fall", "rose": "rise", "risen": "rise",
    "ran": "run", "running": "run", "saw": "see", "seen": "see",
    "sat": "sit", "shook": "shake", "shaken": "shake",
    "spoke": "speak", "spoken": "speak", "stuck": "stick",
    "swept": "sweep", "wore": "wear", "worn": "wear",
    "wrote": "write", "written": "write", "writing": "write",
    "lit": "light", "ground": "grind", "slid": "slide",
    "woke": "wake", "woken": "wake", "bit": "bite", "bitten": "bite",
    "hidden": "hide", "hid": "hide", "lain": "lie", "laid": "lay",
    "paid": "pay", "dug": "dig", "hung": "hang", "swung": "swing",
    "spun": "spin", "wound": "wind", "shot": "shoot", "lost": "lose",
    "losing": "lose", "won": "win", "winning": "win",
    # regular verbs the suffix rules mangle
    "added": "add", "adding": "add", "adds": "add",
    "used": "use", "using": "use", "uses": "use",
    "agreed": "agree", "agreeing": "agree",
    "freed": "free", "freeing": "free",
    "guaranteed": "guarantee",
    "prepared": "prepare", "preparing": "prepare", "prepares": "prepare",
    "compared": "compare", "comparing": "compare",
    "measured": "measure", "measuring": "measure", "measures": "measure",
    "tasted": "taste", "tasting": "taste", "tastes": "taste",
    "basted": "baste", "basting": "baste",
    "pasted": "paste", "pasting": "paste",
    "wasted": "waste", "wasting": "waste",
    "changed": "change", "changing": "change", "changes": "change",
    "arranged": "arrange", "arranging": "arrange",
    "managed": "manage", "managing": "manage",
    "damaged": "damage", "damaging": "damage",
    "marinated": "marinate", "marinating": "marinate",
    "separated": "separate", "separating": "separate",
    "decorated": "decorate", "decorating": "decorate",
    "generated": "generate", "generating": "generate",
    "created": "create", "creating": "create", "creates": "create",
    "grated": "grate", "grating": "grate",
    "rotated": "rotate", "rotating": "rotate",
    "heated": "heat", "heating": "heat", "heats": "heat",
    "repeated": "repeat", "repeating": "repeat",
    "exited": "exit", "edited": "edit", "editing": "edit",
    "visited": "visit", "visiting": "visit",
    "limited": "limit", "limiting": "limit",
    "invited": "invite", "inviting": "invite",
    "united": "unite", "ignited": "ignite",
    "deleted": "delete", "completed": "complete", "completing": "complete",
    "competed": "compete", "competing": "compete",
    # -ing words that are base forms in their own right
    "pudding": "pudding", "morning": "morning", "evening": "evening",
    "ceiling": "ceiling", "darling": "darling", "dumpling": "dumpling",
    # irregular plurals
    "men": "man", "women": "woman", "children": "child",
    "feet": "foot", "teeth": "tooth", "geese": "goose", "mice": "mouse",
    "people": "person", "knives": "knife", "wives": "wife",
    "lives": "life", "loaves": "loaf", "leaves": "leaf",
    "halves": "half", "shelves": "shelf", "calves": "calf",
    "wolves": "wolf", "scarves": "scarf", "thieves": "thief",
    # -ie plurals the -ies rule would turn into -y
    "cookies": "cookie", "brownies": "brownie", "smoothies": "smoothie",
    "veggies": "veggie", "movies": "movie", "calories": "calorie",
    "pinkies": "pinkie", "series": "series", "species": "species",
    # assorted nouns
    "buses": "bus", "gases": "gas", "lenses": "lens",
    "molasses": "molasses", "scissors": "scissors",
    # words the -s or -ed rules would clip
    "this": "this", "his": "his", "hummus": "hummus",
    "focused": "focus", "focusing": "focus",
}


def _measure(stem: str) -> int:
    # Number of vowel-consonant alternations, Porter style. "tr|ee" -> 1,
    # "simmer" -> 2. Used to tell short stems (need an "e" back) from
    # longer ones that stand alone.
    m = 0
    prev_vowel = False
    for i, ch in enumerate(stem):
        is_vowel = ch in "aeiou" or (ch == "y" and i > 0 and stem[i - 1] not in "aeiou")
        if prev_vowel and not is_vowel:
            m += 1
        prev_vowel = is_vowel
    return m


def _ends_cvc(stem: str) -> bool:
    if len(stem) < 3:
        return False
    a, b, c = stem[-3], stem[-2], stem[-1]
    return (
        a not in _VOWELS
        and b in _VOWELS
        and c not in _VOWELS
        and c not in "wxy"
    )


def _has_vowel(stem: str) -> bool:
    return any(ch in _VOWELS for ch in stem)


def _restore(stem: str) -> str:
    # Undo the orthographic damage of stripping -ed / -ing.
    if (
        len(stem) >= 3
        and stem[-1] == stem[-2]
        and stem[-1] not in "aeiou"
        and stem[-1] not in "lszf"
    ):
        return stem[:-1]  # chopp -> chop, stirr -> stir
    if stem.endswith(("ll", "ss", "zz", "ff")):
        return stem  # grill, toss, stuff stay as they are
    if stem[-1] in "vcuz":
        return stem + "e"  # serv -> serve, slic -> slice, freez -> freeze
    if stem[-1] == "l" and len(stem) >= 2 and stem[-2] not in _VOWELS + "l":
        return stem + "e"  # drizzl -> drizzle, crumbl -> crumble
    if stem[-1] == "s" and len(stem) >= 2:
        return stem + "e"  # rins -> rinse, greas -> grease
    if stem.endswith("in") and len(stem) >= 3 and stem[-3] not in _VOWELS and _measure(stem) >= 2:
        return stem + "e"  # combin -> combine, determin -> determine
    if _measure(stem) == 1 and _ends_cvc(stem):
        return stem + "e"  # bak -> bake, stor -> store
    return stem


def lemmatize(token: str) -> str:
    """Reduce a lowercase token to its base form.

    Handles plural nouns, third-person -s, regular -ed and -ing verb
    forms, and a table of irregulars. Anything unrecognized comes back
    unchanged, so out-of-vocabulary tokens are safe to pass through.
    """
    if token in _EXCEPTIONS:
        return _EXCEPTIONS[token]
    if "'" in token:
        # strip possessive clitics; contraction forms are stoplisted whole
        if token.endswith("'s"):
            return token[:-2]
        if token.endswith("'"):
            return token[:-1]
        return token

    n = len(token)
    if token.endswith("ies") and n >= 5:
        return token[:-3] + "y"
    if token.endswith("ied") and n >= 5:
        return token[:-3] + "y"
    if token.endswith("s") and not token.endswith(("ss", "us")) and n >= 4:
        if token.endswith("es"):
            stem = token[:-2]
            if stem.endswith(("ss", "sh", "ch", "x", "o", "zz")):
                return stem  # dishes, boxes, tomatoes
        stem = token[:-1]  # onions, slices, olives
        if len(stem) >= 3 and _has_vowel(stem):
            return stem
        return token
    for suffix in ("ing", "ed"):
        if token.endswith(suffix) and n >= len(suffix) + 2:
            stem = token[: -len(suffix)]
            if len(stem) >= 3 and _has_vowel(stem):
                return _restore(stem)
    return token


# ---------------------------------------------------------------------------
# Stoplists and content words
# ---------------------------------------------------------------------------

TokenSet = frozenset[str]

# Replaceable policy for deciding whether a lemma carries content. The
# default is stoplist subtraction; a POS tagger can be dropped in instead.
ContentFilter = Callable[[str, str], bool]


def _read_word_file(path: Path) -> frozenset[str]:
    words = set()
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            words.add(line.casefold())
    return frozenset(words)


@dataclass(frozen=True)
class Stoplist:
    """Words excluded from content-word sets.

    Two layers: closed-class function words, and generic recipe words
    such as "make" or "bake" that appear in nearly every title. Both are
    checked against the raw token and against its lemma.
    """

    function_words: frozenset[str] = frozenset()
    generic_recipe_words: frozenset[str] = frozenset()
    _all: frozenset[str] = field(init=False, repr=False, default=frozenset())

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_all", self.function_words | self.generic_recipe_words
        )

    def __contains__(self, word: str) -> bool:
        return word in self._all

    def __len__(self) -> int:
        return len(self._all)

    @classmethod
    def from_files(cls, function_words: Path | str, generic_recipe_words: Path | str) -> "Stoplist":
        return cls(
            function_words=_read_word_file(Path(function_words)),
            generic_recipe_words=_read_word_file(Path(generic_recipe_words)),
        )

    @classmethod
    def default(cls) -> "Stoplist":
        base = resources.files("procurate").joinpath("data")
        with resources.as_file(base.joinpath("function_words.txt")) as fw, resources.as_file(
            base.joinpath("generic_recipe_words.txt")
        ) as gw:
            return cls.from_files(fw, gw)


def stoplist_filter(stoplist: Stoplist) -> ContentFilter:
    """Content policy that keeps a lemma unless token or lemma is stoplisted."""

    def keep(token: str, lemma: str) -> bool:
        return token not in stoplist and lemma not in stoplist

    return keep


def content_lemmas(
    text: str,
    stoplist: Stoplist,
    *,
    content_filter: ContentFilter | None = None,
) -> list[str]:
    """Ordered content lemmas of a text, duplicates preserved.

    Tokenize, lemmatize, then drop everything the filter rejects. Used
    directly for frequency counting; `content_words` wraps it when only
    the set matters.
    """
    keep = content_filter or stoplist_filter(stoplist)
    out = []
    for token in tokenize(text):
        lemma = lemmatize(token)
        if keep(token, lemma):
            out.append(lemma)
    return out


def content_words(
    text: str,
    stoplist: Stoplist,
    *,
    content_filter: ContentFilter | None = None,
) -> TokenSet:
    """Set of content lemmas of a text."""
    return frozenset(content_lemmas(text, stoplist, content_filter=content_filter))
