"""Synthetic corpus generator sanity checks."""

import pytest

from wcekit.corpus import read_corpus
from wcekit.ngram import load_arpa, probability
from wcekit.pipeline import label_corpus
from wcekit.synthetic import SynthConfig, make_corpus, source_lm, target_lm, write_experiment
from wcekit.types import Label


@pytest.fixture(scope="module")
def corpus():
    return make_corpus(SynthConfig(n_records=40, seed=9))


class TestGenerator:
    def test_records_validate_and_are_deterministic(self, corpus):
        assert len(corpus) == 40
        again = make_corpus(SynthConfig(n_records=40, seed=9))
        assert corpus == again

    def test_lengths_are_consistent(self, corpus):
        for rec in corpus:
            assert len(rec.f_hyp) == len(rec.f_ref)
            assert len(rec.e_hyp_slt) == len(rec.f_hyp)
            assert len(rec.cn_asr) == len(rec.f_hyp)
            assert len(rec.cn_mt) == len(rec.e_hyp_slt)

    def test_annotations_present_everywhere(self, corpus):
        for rec in corpus:
            for name in ("f_ref", "f_hyp", "e_hyp_mt", "e_hyp_slt", "e_ref"):
                assert rec.sentence(name).has_annotations

    def test_speech_translation_is_noisier_than_text_translation(self, corpus):
        mt = [l for ls in label_corpus(corpus, "mt") for l in ls]
        slt = [l for ls in label_corpus(corpus, "slt") for l in ls]
        pct = lambda ls: sum(1 for l in ls if l is Label.B) / len(ls)
        assert pct(slt) > pct(mt)

    def test_posteriors_track_corruption(self, corpus):
        # hypothesis words that differ from the reference got low posteriors
        lows, highs = [], []
        for rec in corpus:
            for tok_h, tok_r, slot in zip(rec.f_hyp, rec.f_ref, rec.cn_asr):
                p = slot.posterior_of(tok_h.surface)
                (highs if tok_h.surface == tok_r.surface else lows).append(p)
        assert max(lows) < min(0.65, min(highs))


class TestExperimentFiles:
    def test_write_experiment_round_trips(self, tmp_path):
        paths = write_experiment(tmp_path / "exp", SynthConfig(n_records=10, seed=2))
        records = read_corpus(paths["corpus"])
        assert len(records) == 10
        lm = load_arpa(paths["src_lm"])
        vocab = sorted(lm.vocab)
        for ctx in [(), ("chat",), ("notre", "cerveau")]:
            s = sum(probability(lm, list(ctx), w) for w in vocab)
            assert s == pytest.approx(1.0, abs=1e-6)

    def test_target_lm_covers_target_vocab(self, tmp_path):
        records = make_corpus(SynthConfig(n_records=10, seed=5))
        lm = target_lm(records)
        for rec in records:
            for tok in rec.e_ref:
                assert tok.surface in lm.vocab
