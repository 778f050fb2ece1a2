"""Deterministic text normalization: cleaning, tokenization, hashtag
segmentation, suffix stemming, stopword and rare-token removal.

Every stage is a pure function of its inputs and the pipeline
configuration, so corpora can be processed concurrently and reprocessing
is byte-stable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Optional, Sequence

from .base import ConfigurationError, ParamsMixin

__all__ = [
    "RawDocument",
    "TokenizedDocument",
    "SuffixRuleTable",
    "HashtagLexicon",
    "PipelineConfig",
    "TextPipeline",
    "clean_text",
    "tokenize",
    "normalize_hashtag",
    "stem_token",
    "apply_pipeline",
    "prune_infrequent",
    "preprocess_corpus",
    "load_raw_documents",
    "save_tokenized_documents",
    "load_tokenized_documents",
]

# Characters stripped by the cleaning stage. '#' is deliberately kept so
# hashtag segmentation still sees it; the hashtag stage removes it.
_SPECIAL_CHARS = (
    "!\"$%&'()*+,-./:;<=>?@[\\]^_`{|}~"
    "।॥"  # danda, double danda
    "‘’“”–—…«»¡¿•·"
)
_DIGITS = "0-9০-৯"  # ASCII digits plus the Bengali digit block

_MARKUP_RE = re.compile(r"<[^<>]*>")
_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_DIGIT_SPECIAL_RE = re.compile("[%s%s]" % (_DIGITS, re.escape(_SPECIAL_CHARS)))
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class RawDocument:
    """A single unprocessed document with an opaque id and optional label."""

    id: str
    text: str
    label: Optional[str] = None


@dataclass(frozen=True)
class TokenizedDocument:
    """Normalized token sequence, carrying the source id and label."""

    id: str
    tokens: tuple[str, ...]
    label: Optional[str] = None


class SuffixRuleTable:
    """Ordered (suffix, replacement) pairs, longest suffix first.

    A token is stemmed by applying the single longest matching rule at
    most once; the match must leave a non-empty stem.
    """

    def __init__(self, rules: Sequence[tuple[str, str]]):
        suffixes = [s for s, _ in rules]
        if len(set(suffixes)) != len(suffixes):
            dupes = sorted({s for s in suffixes if suffixes.count(s) > 1})
            raise ConfigurationError(f"duplicate suffix rules: {dupes}")
        if any(not s for s in suffixes):
            raise ConfigurationError("empty suffix in rule table")
        self.rules = tuple(sorted(rules, key=lambda r: (-len(r[0]), r[0])))

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    @classmethod
    def from_file(cls, path) -> "SuffixRuleTable":
        rules = []
        for line in _read_lines(path):
            parts = line.split("\t")
            suffix = parts[0]
            replacement = parts[1] if len(parts) > 1 else ""
            rules.append((suffix, replacement))
        return cls(rules)


class HashtagLexicon:
    """Known words for greedy longest-prefix hashtag segmentation."""

    def __init__(self, words):
        normalized = {w.lower() for w in words if w}
        if not normalized:
            raise ConfigurationError("hashtag lexicon is empty")
        self.words = frozenset(normalized)
        self._max_len = max(len(w) for w in self.words)

    def __contains__(self, word):
        return word in self.words

    def __len__(self):
        return len(self.words)

    @classmethod
    def from_file(cls, path) -> "HashtagLexicon":
        return cls(_read_lines(path))


def _read_lines(path) -> list[str]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read resource {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigurationError(f"resource {path} is not valid UTF-8: {exc}") from exc
    return [line for line in raw.splitlines() if line.strip()]


def _default_resource(name: str) -> Path:
    return Path(importlib_resources.files("textclf") / "resources" / name)


@dataclass
class PipelineConfig:
    """Pipeline switches plus the resource tables, loaded eagerly.

    Paths left as None fall back to the packaged defaults (small,
    documented stand-ins for real lexica).  All referenced files must be
    readable when the config is constructed.
    """

    strip_markup: bool = True
    remove_digits_and_specials: bool = True
    hashtag_lexicon_path: Optional[str] = None
    suffix_rules_path: Optional[str] = None
    stopword_path: Optional[str] = None
    min_doc_frequency: int = 5
    use_lemmas: bool = False

    hashtag_lexicon: HashtagLexicon = field(init=False, repr=False)
    suffix_rules: SuffixRuleTable = field(init=False, repr=False)
    stopwords: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        if self.min_doc_frequency < 1:
            raise ConfigurationError(
                f"min_doc_frequency must be >= 1, got {self.min_doc_frequency}"
            )
        lex_path = self.hashtag_lexicon_path or _default_resource("hashtag_lexicon.txt")
        self.hashtag_lexicon = HashtagLexicon.from_file(lex_path)
        if self.suffix_rules_path is not None:
            rules_path = self.suffix_rules_path
        elif self.use_lemmas:
            rules_path = _default_resource("lemma_rules.tsv")
        else:
            rules_path = _default_resource("suffix_rules.tsv")
        self.suffix_rules = SuffixRuleTable.from_file(rules_path)
        stop_path = self.stopword_path or _default_resource("stopwords.txt")
        self.stopwords = frozenset(_read_lines(stop_path))


def clean_text(raw: RawDocument, cfg: PipelineConfig) -> str:
    """Strip markup, URLs, digits, and special characters; collapse whitespace."""
    text = raw.text
    if not isinstance(text, str):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValueError(
                f"document {raw.id!r}: invalid UTF-8 at byte {exc.start}"
            ) from exc
    if cfg.strip_markup:
        text = _MARKUP_RE.sub(" ", text)
        text = _URL_RE.sub(" ", text)
    if cfg.remove_digits_and_specials:
        text = _DIGIT_SPECIAL_RE.sub("", text)
    # a '#' always starts its own token so hashtag segmentation sees it
    text = text.replace("#", " #")
    return _WS_RE.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Split on Unicode whitespace, dropping empty tokens."""
    return text.split()


def normalize_hashtag(token: str, lex: HashtagLexicon) -> list[str]:
    """Segment a '#'-prefixed token by greedy longest lexicon prefix.

    If segmentation fails at any position the whole de-hashed token is
    returned as a single token.
    """
    if not token.startswith("#"):
        raise ValueError(f"normalize_hashtag expects a '#'-prefixed token, got {token!r}")
    body = token[1:].replace("#", "")
    if not body:
        return []
    remainder = body.lower()
    parts: list[str] = []
    while remainder:
        match = None
        for end in range(min(len(remainder), lex._max_len), 0, -1):
            if remainder[:end] in lex:
                match = remainder[:end]
                break
        if match is None:
            return [body]
        parts.append(match)
        remainder = remainder[len(match):]
    return parts


def stem_token(token: str, rules: SuffixRuleTable) -> str:
    """Apply the single longest matching suffix rule, at most once."""
    for suffix, replacement in rules:
        if len(token) > len(suffix) and token.endswith(suffix):
            return token[: -len(suffix)] + replacement
    return token


def apply_pipeline(
    docs: Sequence[RawDocument], cfg: PipelineConfig, token_hook=None
) -> list[TokenizedDocument]:
    """Run clean -> tokenize -> hashtag-normalize -> stem -> stopword-remove.

    ``token_hook``, when given, receives each document's token list right
    after tokenization and returns the list to continue with; it is the
    attachment point for external steps such as tagging or proper-noun
    removal, and defaults to a pass-through.  Documents whose tokens are
    all filtered away are retained with an empty token sequence so labels
    and dataset counts stay stable.
    """
    out = []
    for doc in docs:
        raw_tokens = tokenize(clean_text(doc, cfg))
        if token_hook is not None:
            raw_tokens = list(token_hook(raw_tokens))
        tokens: list[str] = []
        for token in raw_tokens:
            if token.startswith("#"):
                pieces = normalize_hashtag(token, cfg.hashtag_lexicon)
            else:
                pieces = [token]
            for piece in pieces:
                stemmed = stem_token(piece, cfg.suffix_rules)
                if stemmed and stemmed not in cfg.stopwords:
                    tokens.append(stemmed)
        out.append(TokenizedDocument(id=doc.id, tokens=tuple(tokens), label=doc.label))
    return out


def prune_infrequent(
    docs: Sequence[TokenizedDocument], min_df: int
) -> list[TokenizedDocument]:
    """Drop tokens whose document frequency over ``docs`` is below ``min_df``."""
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    df: dict[str, int] = {}
    for doc in docs:
        for token in set(doc.tokens):
            df[token] = df.get(token, 0) + 1
    keep = {t for t, n in df.items() if n >= min_df}
    return [
        TokenizedDocument(
            id=doc.id,
            tokens=tuple(t for t in doc.tokens if t in keep),
            label=doc.label,
        )
        for doc in docs
    ]


def preprocess_corpus(
    docs: Sequence[RawDocument], cfg: PipelineConfig
) -> list[TokenizedDocument]:
    """Full preprocessing: normalization stages then rare-token pruning."""
    return prune_infrequent(apply_pipeline(docs, cfg), cfg.min_doc_frequency)


class TextPipeline(ParamsMixin):
    """Estimator facade over the normalization pipeline.

    ``transform`` maps RawDocuments to TokenizedDocuments; ``fit`` only
    validates the configured resources (the pipeline learns nothing).
    """

    def __init__(
        self,
        strip_markup=True,
        remove_digits_and_specials=True,
        hashtag_lexicon_path=None,
        suffix_rules_path=None,
        stopword_path=None,
        min_doc_frequency=5,
        use_lemmas=False,
    ):
        self.strip_markup = strip_markup
        self.remove_digits_and_specials = remove_digits_and_specials
        self.hashtag_lexicon_path = hashtag_lexicon_path
        self.suffix_rules_path = suffix_rules_path
        self.stopword_path = stopword_path
        self.min_doc_frequency = min_doc_frequency
        self.use_lemmas = use_lemmas

    def _config(self) -> PipelineConfig:
        return PipelineConfig(**self.get_params())

    def fit(self, docs=None, y=None):
        self.config_ = self._config()
        return self

    def transform(self, docs: Sequence[RawDocument]) -> list[TokenizedDocument]:
        cfg = getattr(self, "config_", None) or self._config()
        return preprocess_corpus(docs, cfg)

    def fit_transform(self, docs, y=None):
        return self.fit(docs).transform(docs)


def load_raw_documents(path) -> list[RawDocument]:
    """Read a corpus file: one document per line, optionally "label<TAB>text"."""
    docs = []
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ValueError(f"{path} is not valid UTF-8 at byte {exc.start}") from exc
    for i, line in enumerate(raw.splitlines()):
        if not line.strip():
            continue
        if "\t" in line:
            label, text = line.split("\t", 1)
            docs.append(RawDocument(id=str(i), text=text, label=label))
        else:
            docs.append(RawDocument(id=str(i), text=line))
    return docs


def save_tokenized_documents(docs: Sequence[TokenizedDocument], path) -> None:
    """Write "label<TAB>tokens" (or just tokens) one document per line."""
    lines = []
    for doc in docs:
        joined = " ".join(doc.tokens)
        lines.append(f"{doc.label}\t{joined}" if doc.label is not None else joined)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_tokenized_documents(path) -> list[TokenizedDocument]:
    docs = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        if "\t" in line:
            label, body = line.split("\t", 1)
        else:
            label, body = None, line
        docs.append(TokenizedDocument(id=str(i), tokens=tuple(body.split()), label=label))
    return docs
