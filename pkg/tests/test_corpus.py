import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uidtk.corpus import (
    AcceptabilityRecord,
    CorpusError,
    NoFixationsError,
    ReadingRecord,
    build_corpus,
    build_sentence_rt_table,
    detokenize,
    load_acceptability_tsv,
    load_readings_tsv,
    load_tokens_tsv,
    remove_outliers,
    rescale_graded,
    sentence_rt,
    tokenize,
    write_acceptability_tsv,
    write_readings_tsv,
    write_tokens_tsv,
)

FIXTURE_TEXT = """The dog ran fast. A cat sat down! Did the bird sing? The sun rose early.
Rain fell all day. The child laughed loudly. We walked home together. Night came quickly.

Books filled the shelf. She read every page. Stories came alive then. The lamp glowed warmly.
He wrote a letter. Words flowed like water. The ink dried slowly. Morning brought new light.

Ships crossed the sea. Waves struck the hull. Sailors watched the sky. The storm passed overnight.
"""

# Hand segmentation of the fixture above: 20 sentences across 3 documents.
FIXTURE_SENTENCES = [
    ["The", "dog", "ran", "fast", "."],
    ["A", "cat", "sat", "down", "!"],
    ["Did", "the", "bird", "sing", "?"],
    ["The", "sun", "rose", "early", "."],
    ["Rain", "fell", "all", "day", "."],
    ["The", "child", "laughed", "loudly", "."],
    ["We", "walked", "home", "together", "."],
    ["Night", "came", "quickly", "."],
    ["Books", "filled", "the", "shelf", "."],
    ["She", "read", "every", "page", "."],
    ["Stories", "came", "alive", "then", "."],
    ["The", "lamp", "glowed", "warmly", "."],
    ["He", "wrote", "a", "letter", "."],
    ["Words", "flowed", "like", "water", "."],
    ["The", "ink", "dried", "slowly", "."],
    ["Morning", "brought", "new", "light", "."],
    ["Ships", "crossed", "the", "sea", "."],
    ["Waves", "struck", "the", "hull", "."],
    ["Sailors", "watched", "the", "sky", "."],
    ["The", "storm", "passed", "overnight", "."],
]


class TestTokenize:
    def test_two_sentences_with_case(self):
        c = tokenize("A b. C d!")
        sents = list(c.iter_sentences())
        assert [s.surfaces() for s in sents] == [["A", "b", "."], ["C", "d", "!"]]
        assert [[t.lowercased for t in s.tokens] for s in sents] == [
            ["a", "b", "."],
            ["c", "d", "!"],
        ]

    def test_empty_input(self):
        assert tokenize("").n_documents == 0
        assert tokenize("  \n \n ").n_documents == 0

    def test_pretokenized_line_is_kept(self):
        c = tokenize("the dog ran .")
        (sent,) = c.iter_sentences()
        assert sent.surfaces() == ["the", "dog", "ran", "."]
        assert sent.N == 4

    def test_fixture_matches_hand_segmentation(self):
        c = tokenize(FIXTURE_TEXT)
        assert c.n_documents == 3
        assert [s.surfaces() for s in c.iter_sentences()] == FIXTURE_SENTENCES

    def test_char_len_invariant(self):
        c = tokenize(FIXTURE_TEXT)
        for tok in c.iter_tokens():
            assert tok.char_len == len(tok.surface)

    def test_token_ids_unique(self):
        c = tokenize(FIXTURE_TEXT)
        refs = [t.ref for t in c.iter_tokens()]
        assert len(refs) == len(set(refs))

    def test_detached_punctuation(self):
        c = tokenize('He said "stop" (twice). Then he left.')
        first = next(c.iter_sentences())
        assert first.surfaces() == ["He", "said", '"', "stop", '"', "(", "twice", ")", "."]

    def test_roundtrip_on_fixture(self):
        c = tokenize(FIXTURE_TEXT)
        again = tokenize(detokenize(c))
        assert [s.surfaces() for s in again.iter_sentences()] == [
            s.surfaces() for s in c.iter_sentences()
        ]

    @given(
        st.lists(
            st.lists(
                st.text(alphabet="abcdefg", min_size=1, max_size=6),
                min_size=1,
                max_size=8,
            ),
            min_size=1,
            max_size=5,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_roundtrip_property(self, sents):
        # Capitalized sentence starts and a terminal mark make segmentation
        # unambiguous; the token sequence must then survive a round trip.
        sents = [[w.capitalize() for w in sent] + ["."] for sent in sents]
        c = build_corpus([sents])
        again = tokenize(detokenize(c))
        assert [s.surfaces() for s in again.iter_sentences()] == sents


class TestTsvRoundTrips:
    def test_tokens_tsv(self, tmp_path):
        c = tokenize(FIXTURE_TEXT)
        path = str(tmp_path / "tokens.tsv")
        write_tokens_tsv(c, path)
        again = load_tokens_tsv(path)
        assert [s.surfaces() for s in again.iter_sentences()] == [
            s.surfaces() for s in c.iter_sentences()
        ]

    def test_tokens_tsv_rejects_gaps(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("doc_id\tsent_idx\ttok_idx\ttoken\nd0\t0\t1\tword\n")
        with pytest.raises(CorpusError):
            load_tokens_tsv(str(path))

    def test_readings_tsv(self, tmp_path):
        records = [
            ReadingRecord("s1", "d0", 0, 0, 210.0, True),
            ReadingRecord("s1", "d0", 0, 1, 0.0, False),
        ]
        path = str(tmp_path / "rt.tsv")
        write_readings_tsv(records, path)
        assert load_readings_tsv(path) == records

    def test_acceptability_tsv(self, tmp_path):
        records = [
            AcceptabilityRecord("d0", 0, 1.0, "binary"),
            AcceptabilityRecord("d0", 1, 2.5, "graded"),
        ]
        path = str(tmp_path / "acc.tsv")
        write_acceptability_tsv(records, path)
        assert load_acceptability_tsv(path) == records

    def test_binary_label_validated(self):
        with pytest.raises(CorpusError):
            AcceptabilityRecord("d0", 0, 0.5, "binary")

    def test_rescale_graded(self):
        records = [AcceptabilityRecord("d0", i, x, "graded") for i, x in enumerate([1, 2, 4])]
        assert rescale_graded(records) == [0.0, pytest.approx(1 / 3), 1.0]


def _record(subject, sent, tok, rt, fixated=True, doc="d0"):
    return ReadingRecord(subject, doc, sent, tok, rt, fixated)


class TestRemoveOutliers:
    def test_all_equal_nothing_dropped(self):
        records = [_record("s1", 0, i, 200.0) for i in range(10)]
        kept, dropped = remove_outliers(records)
        assert kept == records
        assert dropped == set()

    def test_single_record_unchanged(self):
        records = [_record("s1", 0, 0, 150.0)]
        kept, dropped = remove_outliers(records)
        assert kept == records and dropped == set()

    def test_extreme_record_drops_its_pair(self):
        # 99 words at 200 ms spread over many sentences, one word at 20 s:
        # hand-computed log-RT z-score of the outlier is ~9.95 > 3.
        records = [_record("s1", i // 4, i % 4, 200.0) for i in range(99)]
        records.append(_record("s1", 24, 3, 20000.0))
        records.append(_record("s1", 24, 2, 200.0))  # same sentence, normal word
        kept, dropped = remove_outliers(records)
        assert dropped == {("s1", "d0", 24)}
        assert all(r.pair != ("s1", "d0", 24) for r in kept)
        # the whole pair went, including its normal word
        assert len(kept) == 99 - 3

    def test_hand_computed_zscores(self):
        rts = [100.0, 110.0, 95.0, 2000.0]
        logs = [math.log(v) for v in rts]
        mean = sum(logs) / 4
        sd = math.sqrt(sum((x - mean) ** 2 for x in logs) / 4)
        z = [(x - mean) / sd for x in logs]
        records = [_record("s1", i, 0, v) for i, v in enumerate(rts)]
        kept, dropped = remove_outliers(records)
        expected_dropped = {("s1", "d0", i) for i, zz in enumerate(z) if abs(zz) > 3}
        assert dropped == expected_dropped

    def test_order_independence(self):
        rng_orders = [
            [0, 1, 2, 3, 4, 5],
            [5, 4, 3, 2, 1, 0],
            [2, 0, 5, 1, 4, 3],
        ]
        base = [
            _record("s1", 0, 0, 180.0),
            _record("s1", 0, 1, 200.0),
            _record("s2", 1, 0, 150.0),
            _record("s2", 1, 1, 9000.0),
            _record("s1", 2, 0, 210.0),
            _record("s2", 2, 0, 190.0),
        ]
        results = []
        for order in rng_orders:
            kept, dropped = remove_outliers([base[i] for i in order])
            results.append((frozenset(kept), frozenset(dropped)))
        assert results[0] == results[1] == results[2]

    def test_skips_do_not_enter_zscores(self):
        records = [_record("s1", 0, i, 200.0) for i in range(5)]
        records.append(_record("s1", 1, 0, 0.0, fixated=False))
        kept, dropped = remove_outliers(records)
        assert dropped == set()
        assert len(kept) == 6


class TestSentenceRt:
    def test_direct_sum(self):
        records = [_record("s1", 0, i, v) for i, v in enumerate([100.0, 200.0, 150.0])]
        assert sentence_rt(records) == (450.0, 3)

    def test_skip_excluded(self):
        records = [
            _record("s1", 0, 0, 100.0),
            _record("s1", 0, 1, 0.0, fixated=False),
            _record("s1", 0, 2, 150.0),
        ]
        assert sentence_rt(records) == (250.0, 2)

    def test_no_fixations_signalled(self):
        records = [_record("s1", 0, 0, 0.0, fixated=False)]
        with pytest.raises(NoFixationsError):
            sentence_rt(records)

    def test_table_against_spreadsheet(self):
        # 5 subjects x 3 sentences, rt of word w for subject s in sentence t
        # is 100*(s+1) + 10*t + w; expected sums computed independently below.
        corpus = build_corpus([[["a", "b", "c"], ["d", "e", "f"], ["g", "h", "i"]]])
        records = []
        expected = {}
        for s in range(5):
            for t in range(3):
                total = 0.0
                for w in range(3):
                    rt = 100.0 * (s + 1) + 10.0 * t + w
                    total += rt
                    records.append(_record(f"subj{s}", t, w, rt))
                expected[(f"subj{s}", "d0", t)] = total
        rows, excluded = build_sentence_rt_table(corpus, records)
        assert excluded == []
        assert len(rows) == 15
        for row in rows:
            key = (row["subject_id"], row["doc_id"], row["sent_idx"])
            assert row["rt_ms"] == pytest.approx(expected[key])
            assert row["n_fixated"] == 3
            assert row["n_tokens"] == 3

    def test_additivity_across_subjects(self):
        corpus = build_corpus([[["a", "b"], ["c", "d"]]])
        records = [
            _record("s1", 0, 0, 100.0),
            _record("s1", 0, 1, 120.0),
            _record("s2", 0, 0, 90.0),
            _record("s2", 0, 1, 0.0, fixated=False),
        ]
        rows, _ = build_sentence_rt_table(corpus, records)
        by_subject = {}
        for subj in ("s1", "s2"):
            sub_rows, _ = build_sentence_rt_table(
                corpus, [r for r in records if r.subject_id == subj]
            )
            by_subject[subj] = sub_rows
        merged = by_subject["s1"] + by_subject["s2"]
        assert sorted(map(str, merged)) == sorted(map(str, rows))

    def test_pair_with_no_fixations_is_excluded_not_zero(self):
        corpus = build_corpus([[["a", "b"]]])
        records = [
            _record("s1", 0, 0, 0.0, fixated=False),
            _record("s1", 0, 1, 0.0, fixated=False),
            _record("s2", 0, 0, 100.0),
        ]
        rows, excluded = build_sentence_rt_table(corpus, records)
        assert excluded == [("s1", "d0", 0)]
        assert [r["subject_id"] for r in rows] == ["s2"]
