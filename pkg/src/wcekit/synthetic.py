"""Synthetic quintuplet corpus with controlled corruption.

Builds utterances from a small bilingual lexicon: the source reference is
sampled, the recognition hypothesis substitutes words at a configurable
rate, and the two translation hypotheses add translation noise on top of
the clean source (text translation) or the corrupted one (speech
translation).  Confusion-network posteriors and sidecar columns are drawn
so that they correlate with corruption, giving a labeler real signal.

Also provides a small count-based ARPA emitter so demos and end-to-end runs
have source/target language models to query.  The models are toy artifacts
of the generator, not a general estimator.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import parse_pharaoh, write_corpus
from .ngram import UNK, BackoffLm
from .types import ConfusionNetwork, QuintupletRecord, Sentence, Side, Slot, Token

# (source word, target word, POS); stems strip a trailing plural "s"
LEXICON = [
    ("le", "the", "D"), ("un", "a", "D"), ("notre", "our", "D"), ("ce", "this", "D"),
    ("chat", "cat", "N"), ("chien", "dog", "N"), ("cerveau", "brain", "N"),
    ("maison", "house", "N"), ("voiture", "car", "N"), ("homme", "man", "N"),
    ("femme", "woman", "N"), ("livre", "book", "N"), ("arbre", "tree", "N"),
    ("mange", "eats", "V"), ("dort", "sleeps", "V"), ("chauffe", "heats", "V"),
    ("court", "runs", "V"), ("parle", "talks", "V"), ("voit", "sees", "V"),
    ("grand", "big", "A"), ("petit", "small", "A"), ("rouge", "red", "A"),
    ("vieux", "old", "A"), ("quand", "when", "C"), ("et", "and", "C"), ("mais", "but", "C"),
    ("42", "42", "NUM"), ("7", "7", "NUM"), (".", ".", "PUNCT"),
]

SRC_WORDS = [src for src, _, _ in LEXICON]
TRANSLATE = {src: tgt for src, tgt, _ in LEXICON}
SRC_POS = {src: pos for src, _, pos in LEXICON}
TGT_POS = {tgt: pos for _, tgt, pos in LEXICON}
TGT_WORDS = [tgt for _, tgt, _ in LEXICON]

STOPWORDS_TARGET = ("the", "a", "our", "this", "and", "but", "when")


def _stem(word: str) -> str:
    return word[:-1] if len(word) > 3 and word.endswith("s") else word


@dataclass(frozen=True)
class SynthConfig:
    n_records: int = 200
    seed: int = 0
    asr_sub_rate: float = 0.25
    mt_sub_rate: float = 0.15
    min_len: int = 4
    max_len: int = 10


def _sentence(words, pos_map, side) -> Sentence:
    return Sentence(
        tuple(Token(w, pos_map[w], _stem(w)) for w in words), side
    )


def _confusions(rng, words, correct_flags, base_time=True) -> ConfusionNetwork:
    slots = []
    t = 0.0
    for w, ok in zip(words, correct_flags):
        dur = rng.uniform(0.08, 0.4) if base_time else 0.0
        post = rng.uniform(0.65, 0.95) if ok else rng.uniform(0.25, 0.6)
        competitors = rng.sample([x for x in (SRC_WORDS if base_time else TGT_WORDS) if x != w],
                                 rng.randint(1, 3))
        rest = 1.0 - post
        raw = [rng.uniform(0.2, 1.0) for _ in competitors]
        scale = rest / sum(raw)
        alts = [(w, post)] + [(c, r * scale) for c, r in zip(competitors, raw)]
        slots.append(Slot(t, dur, tuple(alts)))
        t += dur
    return ConfusionNetwork(tuple(slots))


def _corrupt(rng, words, rate, vocabulary):
    out, flags = [], []
    for w in words:
        if rng.random() < rate:
            out.append(rng.choice([x for x in vocabulary if x != w and x != "."]))
            flags.append(False)
        else:
            out.append(w)
            flags.append(True)
    return out, flags


def make_record(rng: random.Random, rec_id: str, cfg: SynthConfig) -> QuintupletRecord:
    n = rng.randint(cfg.min_len, cfg.max_len)
    body = [w for w in SRC_WORDS if w not in (".",)]
    f_ref = [rng.choice(body) for _ in range(n)]
    if rng.random() < 0.6:
        f_ref.append(".")
    f_hyp, asr_ok = _corrupt(rng, f_ref, cfg.asr_sub_rate, SRC_WORDS)

    e_ref = [TRANSLATE[w] for w in f_ref]
    e_mt, mt_ok = _corrupt(rng, e_ref, cfg.mt_sub_rate, TGT_WORDS)
    slt_base = [TRANSLATE[w] for w in f_hyp]
    e_slt, slt_mt_ok = _corrupt(rng, slt_base, cfg.mt_sub_rate, TGT_WORDS)
    slt_ok = [a and b for a, b in zip(asr_ok, slt_mt_ok)]

    links = set()
    m = len(f_hyp)
    for i in range(m):
        if rng.random() < 0.08 and i > 0:
            continue  # leave this target word unaligned
        links.add((i, i))
        if rng.random() < 0.12 and i + 1 < m:
            links.add((i + 1, i))
    align = " ".join(f"{i}-{j}" for i, j in sorted(links))

    def occurrence_flags(ok_flags):
        return [int(ok if rng.random() < 0.85 else not ok) for ok in ok_flags]

    def parser_columns(words):
        labels = []
        for w in words:
            pos = TGT_POS[w]
            labels.append("NP" if pos in ("D", "N", "A", "NUM") else "VP" if pos == "V" else "S")
        return labels

    sidecar = {
        "f_ref_pos": [SRC_POS[w] for w in f_ref],
        "f_ref_stem": [_stem(w) for w in f_ref],
        "f_hyp_pos": [SRC_POS[w] for w in f_hyp],
        "f_hyp_stem": [_stem(w) for w in f_hyp],
        "e_ref_pos": [TGT_POS[w] for w in e_ref],
        "e_ref_stem": [_stem(w) for w in e_ref],
        "e_hyp_mt_pos": [TGT_POS[w] for w in e_mt],
        "e_hyp_mt_stem": [_stem(w) for w in e_mt],
        "e_hyp_slt_pos": [TGT_POS[w] for w in e_slt],
        "e_hyp_slt_stem": [_stem(w) for w in e_slt],
        "e_hyp_slt_occur_google": occurrence_flags(slt_ok),
        "e_hyp_slt_occur_bing": occurrence_flags(slt_ok),
        "e_hyp_slt_polysemy_count": [rng.randint(1, 5) for _ in e_slt],
        "e_hyp_slt_constituent_label": parser_columns(e_slt),
        "e_hyp_slt_dist_to_root": [rng.randint(1, 4) for _ in e_slt],
        "e_hyp_mt_occur_google": occurrence_flags(mt_ok),
        "e_hyp_mt_occur_bing": occurrence_flags(mt_ok),
        "e_hyp_mt_polysemy_count": [rng.randint(1, 5) for _ in e_mt],
        "e_hyp_mt_constituent_label": parser_columns(e_mt),
        "e_hyp_mt_dist_to_root": [rng.randint(1, 4) for _ in e_mt],
    }

    return QuintupletRecord(
        id=rec_id,
        f_ref=_sentence(f_ref, SRC_POS, Side.SOURCE),
        f_hyp=_sentence(f_hyp, SRC_POS, Side.SOURCE),
        e_hyp_mt=_sentence(e_mt, TGT_POS, Side.TARGET),
        e_hyp_slt=_sentence(e_slt, TGT_POS, Side.TARGET),
        e_ref=_sentence(e_ref, TGT_POS, Side.TARGET),
        cn_asr=_confusions(rng, f_hyp, asr_ok, base_time=True),
        cn_mt=_confusions(rng, e_slt, slt_ok, base_time=False),
        align_src_tgt=parse_pharaoh(align) if links else None,
        sidecar={k: tuple(v) for k, v in sidecar.items()},
    )


def make_corpus(cfg: SynthConfig = SynthConfig()) -> list[QuintupletRecord]:
    rng = random.Random(cfg.seed)
    return [make_record(rng, f"synth-{k:04d}", cfg) for k in range(cfg.n_records)]


# --- toy count-based back-off model ----------------------------------------


def lm_from_sentences(token_lists, order: int = 3, discount: float = 0.4) -> BackoffLm:
    """Absolute-discounting back-off model over the given token sequences."""
    vocab = sorted({w for toks in token_lists for w in toks} | {UNK})
    counts = [dict() for _ in range(order + 1)]
    for toks in token_lists:
        for n in range(1, order + 1):
            for i in range(len(toks) - n + 1):
                gram = tuple(toks[i:i + n])
                counts[n][gram] = counts[n].get(gram, 0) + 1
    for w in vocab:  # add-half smoothing keeps every word listed
        counts[1][(w,)] = counts[1].get((w,), 0) + 0.5

    entries: list[dict] = [dict() for _ in range(order + 1)]
    uni_total = sum(counts[1].values())
    probs1 = {g: c / uni_total for g, c in counts[1].items()}
    for g, p in probs1.items():
        entries[1][g] = [math.log10(p), None]

    def lower_prob(gram):
        for k in range(len(gram), 0, -1):
            tail = gram[len(gram) - k:]
            if tail in entries[k]:
                acc = 0.0
                ctx = gram[:-1]
                while len(ctx) + 1 > k:
                    e = entries[len(ctx)].get(ctx)
                    if e is not None and e[1] is not None:
                        acc += e[1]
                    ctx = ctx[1:]
                return 10.0 ** (acc + entries[k][tail][0])
        raise AssertionError("unigram coverage is guaranteed")

    for n in range(2, order + 1):
        by_context: dict[tuple, list] = {}
        for gram, c in counts[n].items():
            by_context.setdefault(gram[:-1], []).append((gram, c))
        for ctx, grams in sorted(by_context.items()):
            if ctx not in entries[n - 1]:
                continue
            total = sum(c for _, c in grams)
            seen = {g[-1] for g, _ in grams}
            unseen_lower = sum(lower_prob(ctx[1:] + (w,)) if n > 2 else probs1[(w,)]
                               for w in vocab if w not in seen)
            if unseen_lower <= 0:
                for gram, c in grams:
                    entries[n][gram] = [math.log10(c / total), None]
                continue
            reserved = discount * len(grams) / total
            entries[n - 1][ctx][1] = math.log10(reserved / unseen_lower)
            for gram, c in grams:
                entries[n][gram] = [math.log10((c - discount) / total), None]

    final = [dict() for _ in range(order + 1)]
    for n in range(1, order + 1):
        for gram, (logp, bo) in entries[n].items():
            final[n][gram] = (logp, bo)
    return BackoffLm(order, tuple(final), frozenset(vocab))


def arpa_text(lm: BackoffLm) -> str:
    lines = ["\\data\\"]
    for n in range(1, lm.order + 1):
        lines.append(f"ngram {n}={len(lm.entries[n])}")
    for n in range(1, lm.order + 1):
        lines += ["", f"\\{n}-grams:"]
        for gram, (logp, bo) in sorted(lm.entries[n].items()):
            suffix = "" if bo is None else f" {bo!r}"
            lines.append(f"{logp!r} {' '.join(gram)}{suffix}")
    lines += ["", "\\end\\", ""]
    return "\n".join(lines)


def source_lm(records, order: int = 3) -> BackoffLm:
    return lm_from_sentences([r.f_ref.surfaces() for r in records], order)


def target_lm(records, order: int = 3) -> BackoffLm:
    return lm_from_sentences([r.e_ref.surfaces() for r in records], order)


def write_experiment(directory, cfg: SynthConfig = SynthConfig()) -> dict:
    """Generate a corpus plus LM/stoplist resource files; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = make_corpus(cfg)
    paths = {
        "corpus": directory / "corpus.jsonl",
        "src_lm": directory / "src.arpa",
        "tgt_lm": directory / "tgt.arpa",
        "stoplist": directory / "stop.txt",
    }
    write_corpus(records, paths["corpus"])
    paths["src_lm"].write_text(arpa_text(source_lm(records)), encoding="utf-8")
    paths["tgt_lm"].write_text(arpa_text(target_lm(records)), encoding="utf-8")
    paths["stoplist"].write_text("\n".join(STOPWORDS_TARGET) + "\n", encoding="utf-8")
    return {k: str(v) for k, v in paths.items()}


def main(argv=None):
    import argparse

    ap = argparse.ArgumentParser(description="generate a synthetic quintuplet corpus")
    ap.add_argument("directory")
    ap.add_argument("--records", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--asr-noise", type=float, default=0.25)
    ap.add_argument("--mt-noise", type=float, default=0.15)
    args = ap.parse_args(argv)
    paths = write_experiment(
        args.directory,
        SynthConfig(args.records, args.seed, args.asr_noise, args.mt_noise),
    )
    for k, v in paths.items():
        print(f"{k}\t{v}")


if __name__ == "__main__":
    main()
