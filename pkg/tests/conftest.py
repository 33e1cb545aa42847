import pytest

import reference
import synthcorpus
from termrank.corpus import AnnotatedDocument, AnnotatedToken, PosTag
from termrank.pipeline import annotate_corpus
from termrank.preprocess import builtin_annotator, load_stopwords
from termrank.stats import build_corpus_stats

CODE_TO_TAG = {
    "N": PosTag.NOUN,
    "A": PosTag.ADJ,
    "R": PosTag.ADV,
    "V": PosTag.VERB,
    "O": PosTag.OTHER,
}


def make_sentence(spec: str):
    """Build a sentence from 'lemma/CODE' tokens; a trailing '/s' marks
    a stopword, e.g. 'the/N/s normal/A fault/N'."""
    tokens = []
    for part in spec.split():
        bits = part.split("/")
        lemma, code = bits[0], bits[1]
        tokens.append(
            AnnotatedToken(
                surface=lemma,
                lemma=lemma,
                pos=CODE_TO_TAG[code],
                is_stopword=len(bits) > 2 and bits[2] == "s",
            )
        )
    return tuple(tokens)


def make_doc(doc_id: str, *sentence_specs: str) -> AnnotatedDocument:
    return AnnotatedDocument(doc_id, tuple(make_sentence(s) for s in sentence_specs))


@pytest.fixture(scope="session")
def lexicon_path(tmp_path_factory):
    return synthcorpus.write_lexicon(tmp_path_factory.mktemp("lex") / "lexicon.tsv")


@pytest.fixture(scope="session")
def annotator(lexicon_path):
    return builtin_annotator(lexicon_path)


@pytest.fixture(scope="session")
def stopwords():
    return load_stopwords()


@pytest.fixture(scope="session")
def raw_docs():
    return synthcorpus.build_raw_docs()


@pytest.fixture(scope="session")
def annotated_docs(raw_docs, annotator, stopwords):
    return annotate_corpus(raw_docs, annotator, stopwords)


@pytest.fixture(scope="session")
def corpus_stats(annotated_docs):
    return build_corpus_stats(annotated_docs, window=5)


@pytest.fixture(scope="session")
def oracle(annotated_docs):
    return reference.ref_all(annotated_docs, window=5)
