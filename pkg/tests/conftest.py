import numpy as np
import pytest

from textclf.pipeline import TokenizedDocument


@pytest.fixture
def resource_dir(tmp_path):
    """Write pipeline resource files and return their paths as a dict."""
    stop = tmp_path / "stopwords.txt"
    stop.write_text("the\nis\na\n", encoding="utf-8")
    rules = tmp_path / "rules.tsv"
    rules.write_text("er\n", encoding="utf-8")
    lex = tmp_path / "lexicon.txt"
    lex.write_text("good\nmorning\nnews\nday\n", encoding="utf-8")
    return {
        "stopword_path": str(stop),
        "suffix_rules_path": str(rules),
        "hashtag_lexicon_path": str(lex),
    }


@pytest.fixture
def two_cluster_docs():
    """Tokens co-occur only within their own cluster."""
    rng = np.random.default_rng(0)
    cluster_a = [f"alpha{c}" for c in "abcdefghij"]
    cluster_b = [f"beta{c}" for c in "abcdefghij"]
    docs = []
    for i in range(40):
        pool = cluster_a if i % 2 == 0 else cluster_b
        docs.append(
            TokenizedDocument(id=str(i), tokens=tuple(rng.choice(pool, size=20)), label=None)
        )
    return docs, cluster_a, cluster_b
