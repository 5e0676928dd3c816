"""Language identification.

Built-in classifier: character n-gram naive Bayes with additive smoothing,
trained on sanitized text. Scores are normalized into a posterior whose top
value doubles as the confidence; anything under 0.25 is reported as "und".
External labels carried on the wire can be passed through instead of, or in
addition to, the built-in prediction.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Union

from .sanitize import SanitizedText, sanitize

UND = "und"
BUCKETS = ("und", "low", "mid", "high")
UND_THRESHOLD = 0.25

_LANG_RE = re.compile(r"[a-z-]{2,7}")

_MAGIC = "contagion-lid"
_VERSION = 1


def normalize_language(code: Optional[str]) -> str:
    """Map a wire language label onto a valid code, or "und"."""
    if not code:
        return UND
    code = code.strip().lower().replace("_", "-")
    return code if _LANG_RE.fullmatch(code) else UND


def bucket_confidence(confidence: float) -> str:
    """Band a confidence value: und < .25 <= low < .5 <= mid < .75 <= high."""
    if not 0.0 <= confidence <= 1.0:
        raise ValueError("confidence outside [0, 1]: %r" % (confidence,))
    if confidence < 0.25:
        return "und"
    if confidence < 0.5:
        return "low"
    if confidence < 0.75:
        return "mid"
    return "high"


@dataclass(frozen=True)
class LidPrediction:
    language: str
    confidence: float
    bucket: str


@dataclass(frozen=True)
class NgramModel:
    """Naive Bayes over character n-grams.

    ``gram_log_liks`` stores per-language log-likelihoods for grams seen in
    training; grams absent there (vocabulary zeros and true unknowns alike)
    fall back on that language's ``unseen_log_lik``, the smoothed mass of
    one extra vocabulary slot. Likelihoods therefore sum to one over the
    vocabulary plus the unseen slot.
    """

    n_lo: int
    n_hi: int
    smoothing: float
    class_log_priors: dict
    gram_log_liks: dict
    unseen_log_liks: dict
    vocab_size: int

    @property
    def languages(self) -> list[str]:
        return sorted(self.class_log_priors)


def _grams(text: str, n_lo: int, n_hi: int) -> Counter:
    counts: Counter = Counter()
    size = len(text)
    for n in range(n_lo, n_hi + 1):
        for i in range(size - n + 1):
            counts[text[i : i + n]] += 1
    return counts


def count_grams(corpus: Iterable[tuple[str, str]], n_range: tuple[int, int] = (1, 3)):
    """Sanitize each (language, text) pair and count its n-grams.

    Returns (gram counts per language, example counts per language). Counts
    commute, so the result is independent of corpus order.
    """
    n_lo, n_hi = n_range
    gram_counts: dict[str, Counter] = {}
    example_counts: Counter = Counter()
    for lang, text in corpus:
        lang = lang.strip().lower()
        if not _LANG_RE.fullmatch(lang):
            raise ValueError("invalid training language code: %r" % (lang,))
        cleaned = sanitize(text).text
        gram_counts.setdefault(lang, Counter()).update(_grams(cleaned, n_lo, n_hi))
        example_counts[lang] += 1
    return gram_counts, example_counts


def model_from_counts(
    gram_counts: dict,
    example_counts: dict,
    n_range: tuple[int, int] = (1, 3),
    smoothing: float = 1.0,
) -> NgramModel:
    """Normalize count tables into an NgramModel."""
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    n_lo, n_hi = n_range
    if not (1 <= n_lo <= n_hi):
        raise ValueError("invalid n-gram range: %r" % ((n_lo, n_hi),))
    languages = sorted(example_counts)
    if len(languages) < 2:
        raise ValueError("need at least two languages, got %r" % (languages,))
    vocab = set()
    for lang in languages:
        vocab.update(gram_counts.get(lang, ()))
    v1 = len(vocab) + 1  # one extra slot carries the unseen mass
    total_examples = sum(example_counts.values())
    priors = {}
    log_liks = {}
    unseen = {}
    for lang in languages:
        if example_counts[lang] < 1:
            raise ValueError("language without examples: %r" % (lang,))
        priors[lang] = math.log(example_counts[lang] / total_examples)
        counts = gram_counts.get(lang, Counter())
        denom = sum(counts.values()) + smoothing * v1
        log_liks[lang] = {g: math.log((c + smoothing) / denom) for g, c in counts.items()}
        unseen[lang] = math.log(smoothing / denom)
    return NgramModel(
        n_lo=n_lo,
        n_hi=n_hi,
        smoothing=smoothing,
        class_log_priors=priors,
        gram_log_liks=log_liks,
        unseen_log_liks=unseen,
        vocab_size=len(vocab),
    )


def train(
    corpus: Iterable[tuple[str, str]],
    n_range: tuple[int, int] = (1, 3),
    smoothing: float = 1.0,
) -> NgramModel:
    """Train the built-in classifier on (language, text) pairs."""
    gram_counts, example_counts = count_grams(corpus, n_range)
    if not example_counts:
        raise ValueError("empty training corpus")
    return model_from_counts(gram_counts, example_counts, n_range, smoothing)


def classify(model: NgramModel, text: Union[str, SanitizedText]) -> LidPrediction:
    """Predict the language of sanitized text.

    Empty text and posteriors under 0.25 come back as "und"; ties go to the
    lexicographically smallest code.
    """
    if isinstance(text, SanitizedText):
        text = text.text
    if not model.class_log_priors:
        raise ValueError("model has no trained languages")
    if not text:
        return LidPrediction(UND, 0.0, "und")
    grams = _grams(text, model.n_lo, model.n_hi)
    if not grams:
        return LidPrediction(UND, 0.0, "und")
    best_lang = None
    best_score = -math.inf
    scores = []
    for lang in model.languages:
        table = model.gram_log_liks[lang]
        fallback = model.unseen_log_liks[lang]
        score = model.class_log_priors[lang]
        for gram, count in grams.items():
            score += count * table.get(gram, fallback)
        scores.append(score)
        if score > best_score:  # strict: first (smallest) code wins ties
            best_score = score
            best_lang = lang
    lse = best_score + math.log(sum(math.exp(s - best_score) for s in scores))
    confidence = math.exp(best_score - lse)
    language = best_lang if confidence >= UND_THRESHOLD else UND
    return LidPrediction(language, confidence, bucket_confidence(confidence))


def resolve_label(record, prediction: Optional[LidPrediction] = None, source: str = "builtin"):
    """Pick the label for a message from the configured source.

    "builtin" returns the classifier prediction, "external" the wire label
    (absent or invalid labels map to "und", as does a wire confidence
    below the und threshold), "both" the (builtin, external) pair for
    comparison work.
    """
    if source == "builtin":
        if prediction is None:
            raise ValueError("source=builtin requires a prediction")
        return prediction.language
    if source == "external":
        return _external_label(record)
    if source == "both":
        if prediction is None:
            raise ValueError("source=both requires a prediction")
        return prediction.language, _external_label(record)
    raise ValueError("unknown label source: %r" % (source,))


def _external_label(record) -> str:
    conf = getattr(record, "external_confidence", None)
    if conf is not None and conf < UND_THRESHOLD:
        return UND
    return normalize_language(getattr(record, "external_label", None))


# -- serialization: versioned sorted text table, bit-exact round trips ------


def dumps_model(model: NgramModel) -> str:
    lines = ["%s %d" % (_MAGIC, _VERSION)]
    lines.append("n_range\t%d\t%d" % (model.n_lo, model.n_hi))
    lines.append("smoothing\t%.17g" % model.smoothing)
    lines.append("vocab_size\t%d" % model.vocab_size)
    for lang in model.languages:
        lines.append("prior\t%s\t%.17g" % (lang, model.class_log_priors[lang]))
    for lang in model.languages:
        lines.append("unseen\t%s\t%.17g" % (lang, model.unseen_log_liks[lang]))
    for lang in model.languages:
        table = model.gram_log_liks[lang]
        for gram in sorted(table):
            if "\t" in gram or "\n" in gram or "\r" in gram:
                raise ValueError("gram not serializable: %r" % (gram,))
            lines.append("gram\t%s\t%s\t%.17g" % (lang, gram, table[gram]))
    return "\n".join(lines) + "\n"


def loads_model(data: str) -> NgramModel:
    lines = data.splitlines()
    if not lines:
        raise ValueError("empty model file")
    header = lines[0].split()
    if len(header) != 2 or header[0] != _MAGIC or header[1] != str(_VERSION):
        raise ValueError("unsupported model header: %r" % (lines[0],))
    n_lo = n_hi = None
    smoothing = None
    vocab_size = None
    priors: dict = {}
    unseen: dict = {}
    tables: dict = {}
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split("\t")
        tag = parts[0]
        if tag == "n_range" and len(parts) == 3:
            n_lo, n_hi = int(parts[1]), int(parts[2])
        elif tag == "smoothing" and len(parts) == 2:
            smoothing = float(parts[1])
        elif tag == "vocab_size" and len(parts) == 2:
            vocab_size = int(parts[1])
        elif tag == "prior" and len(parts) == 3:
            priors[parts[1]] = float(parts[2])
        elif tag == "unseen" and len(parts) == 3:
            unseen[parts[1]] = float(parts[2])
        elif tag == "gram" and len(parts) == 4:
            tables.setdefault(parts[1], {})[parts[2]] = float(parts[3])
        else:
            raise ValueError("bad model line: %r" % (line,))
    if n_lo is None or smoothing is None or vocab_size is None or not priors:
        raise ValueError("incomplete model file")
    for lang in priors:
        tables.setdefault(lang, {})
    return NgramModel(
        n_lo=n_lo,
        n_hi=n_hi,
        smoothing=smoothing,
        class_log_priors=priors,
        gram_log_liks=tables,
        unseen_log_liks=unseen,
        vocab_size=vocab_size,
    )


def save_model(model: NgramModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path) -> NgramModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))


# -- bundled corpus ----------------------------------------------------------


def _data_path(name: str) -> Path:
    return Path(__file__).parent / "data" / name


def read_corpus(path) -> list[tuple[str, str]]:
    """Read a labeled corpus: one ``language<TAB>sentence`` per line."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError("line %d: expected language<TAB>text" % lineno)
            lang, text = line.split("\t", 1)
            pairs.append((lang, text))
    return pairs


def bundled_corpus(split: str = "train") -> list[tuple[str, str]]:
    """The multilingual sentence corpus shipped with the package.

    ``split`` is "train" or "heldout"; each line of the underlying TSV is
    ``language<TAB>sentence``.
    """
    if split not in ("train", "heldout"):
        raise ValueError("split must be 'train' or 'heldout'")
    return read_corpus(_data_path("lid_corpus_%s.tsv" % split))


@lru_cache(maxsize=1)
def default_model() -> NgramModel:
    """Classifier trained on the bundled corpus (cached per process)."""
    return train(bundled_corpus("train"))


def evaluate(model: NgramModel, corpus: Iterable[tuple[str, str]]) -> dict:
    """Accuracy report for a labeled corpus against a trained model."""
    per_language: dict[str, dict] = {}
    buckets = dict.fromkeys(BUCKETS, 0)
    correct = 0
    total = 0
    confidence_sum = 0.0
    for lang, text in corpus:
        pred = classify(model, sanitize(text))
        stats = per_language.setdefault(lang, {"n": 0, "correct": 0})
        stats["n"] += 1
        total += 1
        confidence_sum += pred.confidence
        buckets[pred.bucket] += 1
        if pred.language == lang:
            stats["correct"] += 1
            correct += 1
    for stats in per_language.values():
        stats["accuracy"] = stats["correct"] / stats["n"]
    return {
        "total": total,
        "correct": correct,
        "accuracy": correct / total if total else 0.0,
        "mean_confidence": confidence_sum / total if total else 0.0,
        "bucket_counts": buckets,
        "per_language": dict(sorted(per_language.items())),
    }
