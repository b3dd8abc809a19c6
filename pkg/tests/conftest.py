import itertools

import pytest


def brute_force_max(Z):
    """Largest total over every permutation; the assignment oracle."""
    n = len(Z)
    return max(sum(Z[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def edit_distance(a, b):
    """Plain two-row dynamic programme, kept separate from the package code."""
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@pytest.fixture
def tmp_jsonl(tmp_path):
    def write(lines, name="p.jsonl"):
        path = tmp_path / name
        path.write_text("".join(line + "\n" for line in lines))
        return path
    return write


def three_topic_corpus(n_docs=150, length=200, words_per_topic=12, seed=0):
    """Documents drawn from one of three topics with disjoint vocabularies.

    Returns (texts, generating topic per doc, vocabulary per topic)."""
    import numpy as np

    rng = np.random.default_rng(seed)
    vocab = [[f"{'pqr'[k]}word{n:02d}" for n in range(words_per_topic)] for k in range(3)]
    labels = rng.integers(0, 3, n_docs)
    texts = [" ".join(rng.choice(vocab[k], length)) for k in labels]
    return texts, labels, vocab


def match_topics(topic_word, vocabulary, true_vocab, top=10):
    """Greedy learned-to-true topic matching by overlap of top words."""
    import numpy as np

    inv = {i: w for w, i in vocabulary.items()}
    tops = [{inv[i] for i in np.argsort(-row)[:top]} for row in topic_word]
    scores = sorted(
        ((len(tops[l] & set(v)), t, l) for t, v in enumerate(true_vocab) for l in range(len(tops))),
        reverse=True,
    )
    mapping, used = {}, set()
    for _, t, l in scores:
        if t not in mapping and l not in used:
            mapping[t] = l
            used.add(l)
    return mapping


VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; printed in the summary."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
