import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import match_topics, three_topic_corpus
from profilematch import nlp
from profilematch.datamodel import Post


def test_tokenizer_drops_stopwords_and_short_tokens():
    assert nlp.tokenize("The cat sat on a Mat, isn't it GREAT?") == ["cat", "sat", "mat", "great"]


def test_lda_single_word_corpus():
    model = nlp.train_lda(["solo"] * 10, K=3, iterations=20, seed=1)
    np.testing.assert_allclose(model.topic_word.sum(axis=1), 1.0, atol=1e-12)
    assert model.topic_word.shape == (3, 1)
    assert np.all(model.topic_word[:, 0] == 1.0)


def test_lda_recovers_disjoint_topics():
    texts, labels, vocab = three_topic_corpus()
    model = nlp.train_lda(texts, K=3, seed=0)
    mapping = match_topics(model.topic_word, model.vocabulary, vocab)
    theta = nlp.infer_post_topics(model, texts)
    mass = theta[np.arange(len(texts)), [mapping[k] for k in labels]]
    assert (mass >= 0.8).mean() >= 0.9


def test_lda_is_bit_reproducible():
    texts, _, _ = three_topic_corpus(n_docs=40, length=50)
    a = nlp.train_lda(texts, K=3, iterations=50, seed=7)
    b = nlp.train_lda(texts, K=3, iterations=50, seed=7)
    assert a.topic_word.tobytes() == b.topic_word.tobytes()
    assert nlp.infer_post_topics(a, texts[:5]).tobytes() == nlp.infer_post_topics(b, texts[:5]).tobytes()


def test_lda_rejects_empty_corpus():
    with pytest.raises(ValueError):
        nlp.train_lda(["the a of"], K=2)


def test_lda_round_trip(tmp_path):
    texts, _, _ = three_topic_corpus(n_docs=20, length=20)
    model = nlp.train_lda(texts, K=3, iterations=10, seed=2)
    nlp.save_lda(model, tmp_path / "m.json")
    again = nlp.load_lda(tmp_path / "m.json")
    assert again.vocabulary == model.vocabulary
    np.testing.assert_array_equal(again.topic_word, model.topic_word)


@pytest.fixture(scope="module")
def small_lda():
    texts, _, _ = three_topic_corpus(n_docs=60, length=60, seed=4)
    return nlp.train_lda(texts, K=3, iterations=100, seed=4)


def test_infer_topics_contract(small_lda):
    assert nlp.infer_topics(small_lda, []) is None
    assert nlp.infer_topics(small_lda, ["nothing known here"]) is None
    one = nlp.infer_topics(small_lda, ["pword01 pword02 pword03"])
    np.testing.assert_array_equal(one, nlp.infer_post_topics(small_lda, ["pword01 pword02 pword03"])[0])
    both = nlp.infer_topics(small_lda, ["pword01 pword02", "rword05 rword06", "unknown words"])
    assert abs(both.sum() - 1.0) < 1e-9
    per = nlp.infer_post_topics(small_lda, ["pword01 pword02", "rword05 rword06"])
    np.testing.assert_allclose(both, per.mean(axis=0) / per.mean(axis=0).sum())


def test_interest_similarity_examples():
    assert nlp.interest_similarity(np.array([0.2, 0.8]), np.array([0.2, 0.8])) == pytest.approx(1.0)
    assert nlp.interest_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0)
    # mixture of (0.5, 0.5) and (1, 0) is (0.75, 0.25)
    kl_p = 0.5 * math.log2(0.5 / 0.75) + 0.5 * math.log2(0.5 / 0.25)
    kl_q = math.log2(1 / 0.75)
    expected = 1 - 0.5 * (kl_p + kl_q)
    assert expected == pytest.approx(0.6887, abs=1e-4)
    assert nlp.interest_similarity(np.array([0.5, 0.5]), np.array([1.0, 0.0])) == pytest.approx(expected)


dists = st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3).filter(lambda v: sum(v) > 1e-6).map(
    lambda v: np.array(v) / sum(v))


@given(dists, dists)
def test_interest_similarity_properties(p, q):
    s = nlp.interest_similarity(p, q)
    assert 0.0 <= s <= 1.0
    assert s == pytest.approx(nlp.interest_similarity(q, p), abs=1e-12)
    if np.array_equal(p, q):
        assert s == pytest.approx(1.0)


def test_sentiment_examples():
    model = nlp.train_sentiment([("good", "pos"), ("bad", "neg")])
    assert model.score("good") > 0.5 > model.score("bad")
    assert model.score("") == pytest.approx(0.5)
    with pytest.raises(ValueError):
        nlp.train_sentiment([("good", "pos")])


def test_duplicated_corpus_keeps_decisions():
    corpus = [("great lovely fun", "pos"), ("awful sad bad", "neg"), ("fun day", "pos"), ("bad day", "neg"),
              ("lovely sad", "pos")]
    a = nlp.train_sentiment(corpus)
    b = nlp.train_sentiment(corpus * 2)
    assert [a.classify(t) for t, _ in corpus] == [b.classify(t) for t, _ in corpus]


@given(st.text(max_size=40))
def test_sentiment_score_bounded(text):
    model = nlp.train_sentiment([("good nice", "pos"), ("bad poor", "neg")])
    assert 0.0 <= model.score(text) <= 1.0


def test_sentiment_corpus_file(tmp_path):
    (tmp_path / "s.tsv").write_text("pos\tnice one\nneg\tterrible\n")
    assert nlp.load_sentiment_corpus(tmp_path / "s.tsv") == [("nice one", "pos"), ("terrible", "neg")]
    (tmp_path / "bad.tsv").write_text("maybe\tx\n")
    with pytest.raises(ValueError):
        nlp.load_sentiment_corpus(tmp_path / "bad.tsv")


class _FixedScores:
    def __init__(self, table):
        self.table = table

    def score(self, text):
        return self.table[text]


def test_daily_profile_examples():
    model = _FixedScores({"a": 0.2, "b": 0.8, "c": 0.6})
    assert nlp.daily_profile(model, []) == {}
    assert nlp.daily_profile(model, [Post(0, "c")]) == {"1970-01-01": 0.6}
    assert nlp.daily_profile(model, [Post(10, "a"), Post(20, "b")]) == {"1970-01-01": pytest.approx(0.5)}
    two_days = nlp.daily_profile(model, [Post(10, "a"), Post(86400 + 5, "b")])
    assert list(two_days) == ["1970-01-01", "1970-01-02"]


def test_sentiment_similarity_examples():
    s = {"d1": 0.9, "d2": 0.5}
    assert nlp.sentiment_similarity(s, s) == 1.0
    assert nlp.sentiment_similarity({"d1": 0.3}, {"d2": 0.3}) is None
    assert nlp.sentiment_similarity(s, {"d1": 0.1, "d2": 0.5, "d3": 0.0}) == pytest.approx(0.6)


def _vec(**counts):
    return [counts.get(c, 0) for c in nlp.ENTITY_CATEGORIES]


def test_entity_examples():
    gaz = nlp.EntityGazetteers(locations=frozenset({"cleveland", "new york"}), given_names=frozenset({"mary"}),
                               organizations=frozenset({"acme corp"}))
    assert list(nlp.extract_entities("", gaz)) == _vec()
    assert list(nlp.extract_entities("$5 is 10% off", gaz)) == _vec(money=1, percent=1)
    assert list(nlp.extract_entities("born 1990 in Cleveland", gaz)) == _vec(date=1, location=1)
    assert list(nlp.extract_entities("Mary joined Acme Corp in New York at 9:30 am", gaz)) == \
        _vec(person=1, organization=1, location=1, time=1)
    assert list(nlp.extract_entities("mary lowercase is not a name", gaz)) == _vec()


@given(st.text(max_size=60))
def test_entities_nonnegative(text):
    v = nlp.extract_entities(text, nlp.EntityGazetteers(locations=frozenset({"paris"})))
    assert v.shape == (7,) and (v >= 0).all()
