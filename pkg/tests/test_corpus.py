"""Corpus containers and file-format round-trip tests."""

import json
import random

import pytest

from wcekit.corpus import (
    format_pharaoh,
    parse_pharaoh,
    read_alignments,
    read_confusion_networks,
    read_corpus,
    read_feature_table,
    record_from_json,
    record_to_json,
    write_confusion_networks,
    write_corpus,
    write_feature_table,
)
from wcekit.types import (
    CATEGORICAL,
    NUMERIC,
    ConfusionNetwork,
    FeatureTable,
    Label,
    Sentence,
    Slot,
    Token,
    ValidationError,
    WordAlignment,
    concat_tables,
)

QUINTUPLET = {
    "id": "utt-1",
    "f_ref": "quand notre cerveau chauffe",
    "f_hyp": "comme notre cerveau chauffe",
    "e_hyp_mt": "when our brains chauffe",
    "e_hyp_slt": "as our brains chauffe",
    "e_ref": "when our brain heats up",
    "cn_asr": [
        [0.00, 0.21, [["comme", 0.6], ["quand", 0.3], ["qu'", 0.1]]],
        [0.21, 0.15, [["notre", 0.9], ["votre", 0.1]]],
        [0.36, 0.30, [["cerveau", 1.0]]],
        [0.66, 0.25, [["chauffe", 0.8], ["chauffer", 0.2]]],
    ],
    "align_src_tgt": "0-0 1-1 2-2 3-3",
    "sidecar": {"e_hyp_slt_stop_word": [0, 1, 0, 0]},
}


class TestTypes:
    def test_token_validation(self):
        with pytest.raises(ValidationError):
            Token("")
        with pytest.raises(ValidationError):
            Token("two words")

    def test_sentence_annotations_all_or_nothing(self):
        Sentence((Token("a", "D", "a"), Token("b", "N", "b")))
        with pytest.raises(ValidationError):
            Sentence((Token("a", "D", "a"), Token("b")))
        with pytest.raises(ValidationError):
            Sentence.from_string("a b", pos=["D", "N"])

    def test_alignment_duplicates_rejected(self):
        with pytest.raises(ValidationError):
            WordAlignment.from_pairs([(0, 0), (0, 0)])

    def test_alignment_lookup(self):
        a = WordAlignment.from_pairs([(0, 1), (2, 1), (1, 0)])
        assert a.sources_of(1) == [0, 2]
        assert a.targets_of(1) == [0]

    def test_slot_posterior_sum(self):
        with pytest.raises(ValidationError, match="slot 0"):
            ConfusionNetwork((Slot(0.0, 0.1, (("a", 0.5), ("b", 0.3))),))

    def test_slot_ordering(self):
        with pytest.raises(ValidationError):
            ConfusionNetwork((
                Slot(1.0, 0.1, (("a", 1.0),)),
                Slot(0.5, 0.1, (("b", 1.0),)),
            ))

    def test_record_checks_cn_length(self):
        obj = dict(QUINTUPLET)
        obj["cn_asr"] = QUINTUPLET["cn_asr"][:2]
        with pytest.raises(ValidationError, match="slots"):
            record_from_json(obj)

    def test_record_checks_alignment_bounds(self):
        obj = dict(QUINTUPLET)
        obj["align_src_tgt"] = "0-9"
        with pytest.raises(ValidationError, match="out of bounds"):
            record_from_json(obj)

    def test_feature_table_rejects_ragged_rows(self):
        with pytest.raises(ValidationError):
            FeatureTable((("w", CATEGORICAL),), (("a", "b"),), (1,))

    def test_feature_table_rejects_nan(self):
        with pytest.raises(ValidationError):
            FeatureTable((("x", NUMERIC),), ((float("nan"),),), (1,))


class TestPharaoh:
    def test_round_trip(self):
        a = parse_pharaoh("0-0 1-2 3-1")
        assert format_pharaoh(a) == "0-0 1-2 3-1"

    def test_bad_pair(self):
        with pytest.raises(ValidationError):
            parse_pharaoh("0-0 nope")

    def test_alignment_file(self, tmp_path):
        p = tmp_path / "al.txt"
        p.write_text("0-0 1-1\n\n2-0\n", encoding="utf-8")
        al = read_alignments(p)
        assert len(al) == 3
        assert al[1] == WordAlignment(frozenset())
        assert (2, 0) in al[2].links


class TestCorpusJsonl:
    def test_read_single_record(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text(json.dumps(QUINTUPLET) + "\n", encoding="utf-8")
        records = read_corpus(p, "jsonl")
        assert len(records) == 1
        rec = records[0]
        assert len(rec.f_hyp) == 4
        assert rec.f_hyp.surfaces() == ["comme", "notre", "cerveau", "chauffe"]
        assert rec.cn_asr[0].posterior_of("comme") == 0.6
        assert rec.sidecar_column("e_hyp_slt", "stop_word") == (0, 1, 0, 0)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text("", encoding="utf-8")
        assert read_corpus(p, "jsonl") == []

    def test_bad_posterior_sum_names_slot(self, tmp_path):
        obj = dict(QUINTUPLET)
        obj["cn_asr"] = [[0.0, 0.1, [["comme", 0.6], ["quand", 0.2]]]] + QUINTUPLET["cn_asr"][1:]
        p = tmp_path / "c.jsonl"
        p.write_text(json.dumps(obj) + "\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="slot 0"):
            read_corpus(p, "jsonl")

    def test_malformed_line_names_line_and_field(self, tmp_path):
        good = json.dumps(QUINTUPLET)
        bad = json.dumps({k: v for k, v in QUINTUPLET.items() if k != "e_ref"})
        p = tmp_path / "c.jsonl"
        p.write_text(good + "\n" + bad + "\n", encoding="utf-8")
        with pytest.raises(ValidationError, match=r":2.*e_ref"):
            read_corpus(p, "jsonl")

    def test_round_trip(self, tmp_path):
        rec = record_from_json(QUINTUPLET)
        p = tmp_path / "c.jsonl"
        write_corpus([rec], p)
        again = read_corpus(p, "jsonl")
        assert again == [rec]

    def test_annotations_via_sidecar(self, tmp_path):
        obj = dict(QUINTUPLET)
        obj["sidecar"] = {
            "f_hyp_pos": ["C", "D", "N", "V"],
            "f_hyp_stem": ["comme", "notre", "cerveau", "chauff"],
        }
        rec = record_from_json(obj)
        assert rec.f_hyp[2].pos == "N"
        assert rec.f_hyp[3].stem == "chauff"
        assert record_to_json(rec)["sidecar"]["f_hyp_pos"] == ["C", "D", "N", "V"]

    def test_determinism(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text(json.dumps(QUINTUPLET) + "\n", encoding="utf-8")
        assert read_corpus(p, "jsonl") == read_corpus(p, "jsonl")


class TestCorpusColumns:
    def test_read(self, tmp_path):
        p = tmp_path / "c.tsv"
        line = "\t".join([
            "utt-1",
            QUINTUPLET["f_ref"], QUINTUPLET["f_hyp"], QUINTUPLET["e_hyp_mt"],
            QUINTUPLET["e_hyp_slt"], QUINTUPLET["e_ref"],
        ])
        p.write_text(line + "\n", encoding="utf-8")
        records = read_corpus(p, "columns")
        assert len(records) == 1
        assert records[0].e_ref.text() == "when our brain heats up"
        assert records[0].cn_asr is None

    def test_wrong_column_count(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("a\tb\tc\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="6 tab-separated"):
            read_corpus(p, "columns")


class TestConfusionNetworkText:
    def test_round_trip(self, tmp_path):
        rec = record_from_json(QUINTUPLET)
        p = tmp_path / "cn.txt"
        write_confusion_networks([rec.cn_asr, rec.cn_asr], p)
        back = read_confusion_networks(p)
        assert back == [rec.cn_asr, rec.cn_asr]

    def test_format(self, tmp_path):
        p = tmp_path / "cn.txt"
        p.write_text("0.0 0.5 yes:0.75 no:0.25\n\n", encoding="utf-8")
        (cn,) = read_confusion_networks(p)
        assert cn[0].best() == ("yes", 0.75)

    def test_malformed_slot(self, tmp_path):
        p = tmp_path / "cn.txt"
        p.write_text("0.0 0.5 yes\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="line 1"):
            read_confusion_networks(p)


def random_table(rng, max_tokens=50, max_cols=10):
    n_cols = rng.randint(1, max_cols)
    cols = []
    for c in range(n_cols):
        kind = rng.choice([CATEGORICAL, NUMERIC])
        cols.append((f"col{c}", kind))
    n_rows = rng.randint(1, max_tokens)
    rows = []
    for _ in range(n_rows):
        row = []
        for _, kind in cols:
            if kind == NUMERIC:
                row.append(rng.choice([0.25, -1.5, 3.0, rng.random(), float(rng.randint(0, 9))]))
            else:
                row.append(rng.choice(["the", "très", "x|y", "N_V", "__null__"]))
        rows.append(tuple(row))
    breaks, at = [], 0
    while at < n_rows:
        at = min(n_rows, at + rng.randint(1, 8))
        breaks.append(at)
    return FeatureTable(tuple(cols), tuple(rows), tuple(breaks))


class TestFeatureTableIO:
    def test_small_layout(self, tmp_path):
        table = FeatureTable(
            (("w", CATEGORICAL), ("p", NUMERIC)),
            (("hello", 0.25), ("world", 1.0)),
            (2,),
        )
        path = tmp_path / "t.tsv"
        write_feature_table(table, [Label.G, Label.B], path)
        lines = path.read_text(encoding="utf-8").split("\n")
        assert lines[1] == "hello\t0.25\tG"
        assert lines[2] == "world\t1.0\tB"
        assert lines[3] == ""
        back, labels = read_feature_table(path)
        assert back == table
        assert labels == [Label.G, Label.B]
        assert back.rows[0][1] == 0.25

    def test_label_count_mismatch(self, tmp_path):
        table = FeatureTable((("w", CATEGORICAL),), (("a",),), (1,))
        with pytest.raises(ValidationError):
            write_feature_table(table, [Label.G, Label.B], tmp_path / "t.tsv")

    def test_round_trip_random_tables(self, tmp_path):
        rng = random.Random(42)
        for k in range(50):
            table = random_table(rng)
            labels = None
            if rng.random() < 0.5:
                labels = [rng.choice([Label.G, Label.B]) for _ in range(table.n_rows)]
            path = tmp_path / f"t{k}.tsv"
            write_feature_table(table, labels, path)
            back, back_labels = read_feature_table(path)
            assert back == table
            assert back_labels == labels

    def test_concat_tables(self):
        rng = random.Random(1)
        t = random_table(rng, max_tokens=6, max_cols=3)
        both = concat_tables([t, t])
        assert both.n_rows == 2 * t.n_rows
        assert both.n_sentences == 2 * t.n_sentences
        assert both.rows[: t.n_rows] == t.rows
