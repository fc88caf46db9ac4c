import json

import numpy as np
import pytest

from suggestmine.corpus import oversample
from suggestmine.neural import EmbeddingTable, LSTMHyperparameters
from suggestmine.normalize import default_config
from suggestmine.persistence import FingerprintError, ModelFileError, dumps, load_model, loads, save_model
from suggestmine.pipeline import LSTMOptions, normalize_dataset, score, train

from synthetic import make_dataset


@pytest.fixture(scope="module")
def data():
    return oversample(normalize_dataset(make_dataset(150, seed=21, split_tag="train")), seed=1)


@pytest.fixture(scope="module")
def embeddings(data):
    rng = np.random.default_rng(0)
    words = sorted({t for text in data.texts for t in text.split()})
    return EmbeddingTable.from_dict({w: rng.normal(scale=0.3, size=8) for w in words}, 8)


@pytest.mark.parametrize("kind", ["nb", "logreg", "svm"])
def test_round_trip_sparse_models(tmp_path, data, kind):
    bundle, vocab = train(kind, data)
    save_model(bundle, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json", vocab.fingerprint())
    assert back.kind == kind and back.features == ("tfidf" if kind == "svm" else "count")
    assert dumps(back) == dumps(bundle)
    texts = make_dataset(30, seed=99).texts
    assert np.array_equal(score(back, texts, vocab), score(bundle, texts, vocab))


def test_round_trip_lstm(tmp_path, data, embeddings):
    opts = LSTMOptions(hidden_units=4, max_seq_len=16, hp=LSTMHyperparameters(epochs=2, seed=5))
    bundle, vocab = train("lstm", data, embeddings=embeddings, lstm=opts)
    assert vocab is None
    save_model(bundle, tmp_path / "l.json")
    back = load_model(tmp_path / "l.json", embeddings.fingerprint())
    assert back.hyperparameters == opts.hp.to_dict()
    assert np.array_equal(score(back, data.texts[:20], embeddings=embeddings),
                          score(bundle, data.texts[:20], embeddings=embeddings))


def test_fingerprint_mismatch(tmp_path, data):
    bundle, vocab = train("nb", data)
    save_model(bundle, tmp_path / "m.json")
    _, other = train("nb", make_dataset(40, seed=3, split_tag="train"))
    with pytest.raises(FingerprintError, match="fingerprint"):
        load_model(tmp_path / "m.json", other.fingerprint())
    with pytest.raises(FingerprintError):
        score(bundle, ["x"], other)
    with pytest.raises(FingerprintError, match="normalizer"):
        bundle.check_normalizer(default_config().with_options(keep_terminal_punct=True))


def test_corrupt_files(data):
    bundle, _ = train("nb", data)
    doc = json.loads(dumps(bundle))
    with pytest.raises(ModelFileError, match="not a model file"):
        loads("{nope")
    with pytest.raises(ModelFileError, match="version"):
        loads(json.dumps({**doc, "version": 99}))
    with pytest.raises(FingerprintError, match="embedded normalizer"):
        loads(json.dumps({**doc, "normalizer_fingerprint": "0" * 64}))
    bad = json.loads(dumps(bundle))
    bad["arrays"]["log_prior"]["shape"] = [3]
    with pytest.raises(ModelFileError, match="size"):
        loads(json.dumps(bad))


def test_serialization_is_byte_stable(data):
    a, _ = train("svm", data)
    b, _ = train("svm", data)
    assert dumps(a) == dumps(b)


def test_unknown_kind_and_missing_embeddings(data):
    with pytest.raises(ValueError, match="unknown model kind"):
        train("cnn", data)
    with pytest.raises(ValueError, match="embeddings"):
        train("lstm", data)


def test_normalize_dataset_keeps_raw_text_when_empty():
    from suggestmine.corpus import Dataset, Label, LabeledSentence
    d = Dataset([LabeledSentence("a", ' "" ; ', Label.NON_SUGGESTION), LabeledSentence("b", "r u ok", Label.SUGGESTION)])
    out = normalize_dataset(d)
    assert out.texts == ['"" ;', "are you ok"]
