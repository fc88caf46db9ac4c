"""Acceptance criteria, one test per criterion (plus dataset-gated variants).

Each test records a single PASS/FAIL/SKIP line, listed again at the end of
the pytest run under "acceptance criteria". Criteria that need the official
Sub Task A files run only when ``SUGGESTMINE_DATA_DIR`` points at a directory
holding ``train.csv`` and ``test.csv``; the LSTM comparison additionally needs
``SUGGESTMINE_EMBEDDINGS`` (300-d fastText vectors).
"""

import os
import time
import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from suggestmine.corpus import (
    Dataset,
    Label,
    LabeledSentence,
    class_distribution,
    load_dataset,
    oversample,
    save_dataset,
)
from suggestmine.eval_report import evaluate, keyword_analysis
from suggestmine.linear_models import decision_values, hinge_objective, logistic_objective, nb_fit
from suggestmine.neural import EmbeddingTable, _batch, init_lstm, load_embeddings, lstm_loss_and_grads
from suggestmine.normalize import MASKS, preprocess, preprocess_tokens
from suggestmine.pipeline import labels_of, normalize_dataset, score, train
from suggestmine.reference import DISTRIBUTION, FP_KEYWORD_FRACTION, REFERENCE_F1

from acceptance_log import criterion
from conftest import EMBEDDINGS
from goldens import NORMALIZATION_GOLDENS
from oracles import central_differences, f1_direct, max_relative_error, nb_brute_force, small_corpora
from runs import full_run, write_embeddings
from synthetic import make_dataset

S, N = Label.SUGGESTION, Label.NON_SUGGESTION


# -- 1 ---------------------------------------------------------------------------

def test_criterion_1_normalization_goldens():
    with criterion("1", "normalization goldens reproduce byte-exact, < 1 s") as info:
        start = time.perf_counter()
        outputs = [preprocess(raw) for raw, _ in NORMALIZATION_GOLDENS]
        elapsed = time.perf_counter() - start
        for (raw, expected), got in zip(NORMALIZATION_GOLDENS, outputs):
            assert got.encode("utf-8") == expected.encode("utf-8"), got
        assert elapsed < 1.0, f"took {elapsed:.3f}s"
        info.append(f"{len(NORMALIZATION_GOLDENS)} rows in {elapsed * 1000:.1f} ms")


# -- 2 ---------------------------------------------------------------------------

def test_criterion_2_oversampling_official(official):
    with criterion("2", "official train 2085/6415 -> 4170/6415") as info:
        d = load_dataset(official("train"), split_tag="train")
        before = class_distribution(d)
        ref = DISTRIBUTION["train"]
        assert (before[S], before[N]) == (ref["suggestion"], ref["non_suggestion"])
        after = class_distribution(oversample(d, seed=42))
        assert (after[S], after[N]) == (2 * ref["suggestion"], ref["non_suggestion"])
        info.append(f"{before[S]}/{before[N]} -> {after[S]}/{after[N]}")


def test_criterion_2_oversampling_property_suite():
    with criterion("2", "doubling on 200 random synthetic datasets (substitute when the official file is absent)") as info:
        rng = np.random.default_rng(2019)
        for k in range(200):
            n = int(rng.integers(1, 400))
            d = make_dataset(n, pos_rate=float(rng.uniform(0.02, 0.9)), seed=k, split_tag="train")
            before = class_distribution(d)
            if before[S] == 0:
                with pytest.raises(ValueError, match="no positive instances"):
                    oversample(d, seed=k)
                continue
            o = oversample(d, seed=k)
            after = class_distribution(o)
            assert after[S] == 2 * before[S] and after[N] == before[N]
            # every positive appears exactly twice, every negative once
            texts = {}
            for r in o:
                texts.setdefault(r.id.removesuffix("-dup"), []).append(r)
            for rid, recs in texts.items():
                assert len(recs) == (2 if d[rid].label is S else 1)
                assert all(r.text == d[rid].text and r.label == d[rid].label for r in recs)
        info.append("200 datasets")


# -- 3 ---------------------------------------------------------------------------

def _official_models(official):
    train_d = load_dataset(official("train"), split_tag="train")
    test_d = load_dataset(official("test"), split_tag="test")
    prepared = oversample(normalize_dataset(train_d), seed=42)
    results = {}
    for kind in ("nb", "logreg", "svm"):
        bundle, vocab = train(kind, prepared)
        values = score(bundle, test_d.texts, vocab)
        report = evaluate(test_d, zip(test_d.ids, labels_of(values)), dict(zip(test_d.ids, values.tolist())))
        results[kind] = (bundle, vocab, report)
    return train_d, test_d, prepared, results


def test_criterion_3_classical_reproduction(official):
    with criterion("3", "NB/LR/SVM test F1 within +-0.05 of 0.517/0.572/0.576, < 5 min") as info:
        start = time.perf_counter()
        train_d, test_d, prepared, results = _official_models(official)
        elapsed = time.perf_counter() - start
        failures = []
        for kind, (_, _, report) in results.items():
            ref = REFERENCE_F1[kind]["test"]
            info.append(f"{kind} {report.f1:.3f} (ref {ref:.3f})")
            if abs(report.f1 - ref) > 0.05:
                failures.append(kind)
        info.append(f"{elapsed:.0f}s")
        assert elapsed < 300
        assert not failures, f"outside tolerance: {failures}"

        nb_f1 = results["nb"][2].f1
        if EMBEDDINGS and os.path.isfile(EMBEDDINGS):
            emb = load_embeddings(EMBEDDINGS, 300)
            bundle, _ = train("lstm", prepared, embeddings=emb)
            values = score(bundle, test_d.texts, embeddings=emb)
            lstm = evaluate(test_d, zip(test_d.ids, labels_of(values))).f1
            verdict = "beats NB" if lstm > nb_f1 else "GAP: does not beat NB"
            info.append(f"lstm {lstm:.3f} {verdict}")
        else:
            info.append("lstm not run: no embeddings (documented gap)")


def test_criterion_3_runtime_on_synthetic_corpus():
    with criterion("3", "runtime proxy: classical models on a synthetic corpus of official size, < 5 min") as info:
        start = time.perf_counter()
        prepared = oversample(normalize_dataset(make_dataset(8500, pos_rate=0.245, seed=1, split_tag="train")), seed=42)
        test_d = make_dataset(833, seed=2, split_tag="test")
        for kind in ("nb", "logreg", "svm"):
            bundle, vocab = train(kind, prepared)
            score(bundle, test_d.texts, vocab)
        elapsed = time.perf_counter() - start
        assert elapsed < 300
        info.append(f"{len(prepared)} training rows")


# -- 4 ---------------------------------------------------------------------------

def test_criterion_4_nb_oracle_equivalence():
    with criterion("4", "NB equals brute-force oracle (<= 1e-12) on all small corpora, < 10 s") as info:
        start = time.perf_counter()
        worst, corpora = 0.0, 0
        for X, y in small_corpora():
            m = nb_fit(X, y, alpha=1.0)
            queries = np.vstack([X, np.eye(X.shape[1])])
            joint = queries @ m.log_likelihood.T + m.log_prior
            post = joint - np.logaddexp(joint[:, :1], joint[:, 1:])
            dv = decision_values(m, queries)
            for q, p, v in zip(queries, post, dv):
                oracle = nb_brute_force(X.tolist(), y, 1.0, q.tolist())
                worst = max(worst, abs(p[0] - oracle[0]), abs(p[1] - oracle[1]))
                margin = oracle[1] - oracle[0]
                if abs(margin) > 1e-12:
                    assert (v > 0) == (margin > 0)
                else:  # a tie up to roundoff: the model's margin must be a tie too
                    assert abs(v) <= 1e-12
            corpora += 1
        elapsed = time.perf_counter() - start
        assert worst <= 1e-12, worst
        assert elapsed < 10, f"{elapsed:.1f}s"
        info.append(f"{corpora} corpora, max |diff| {worst:.1e}")


# -- 5 ---------------------------------------------------------------------------

def test_criterion_5_gradient_checks():
    with criterion("5", "logistic < 1e-4, LSTM < 1e-3, hinge off-kink < 1e-4 over >= 20 seeds, < 60 s") as info:
        start = time.perf_counter()
        worst = {"logistic": 0.0, "hinge": 0.0, "lstm": 0.0}
        for seed in range(20):
            rng = np.random.default_rng(seed)
            X = sp.csr_matrix(rng.normal(size=(8, 5)))
            y = rng.integers(0, 2, size=8).astype(float)
            theta = rng.normal(size=6)
            _, gw, gb = logistic_objective(theta[:5], theta[5], X, y, 0.1)
            num = central_differences(lambda t: logistic_objective(t[:5], t[5], X, y, 0.1)[0], theta, 1e-5)
            worst["logistic"] = max(worst["logistic"], max_relative_error(np.append(gw, gb), num))

            s = 2 * y - 1
            while True:
                theta = rng.normal(size=6)
                if np.min(np.abs(s * (X @ theta[:5] + theta[5]) - 1.0)) > 1e-3:
                    break
            _, gw, gb = hinge_objective(theta[:5], theta[5], X, y, 0.1)
            num = central_differences(lambda t: hinge_objective(t[:5], t[5], X, y, 0.1)[0], theta, 1e-5)
            worst["hinge"] = max(worst["hinge"], max_relative_error(np.append(gw, gb), num))

            words = [f"w{i}" for i in range(6)]
            emb = EmbeddingTable.from_dict({w: rng.normal(size=4) for w in words}, 4)
            params = {k: v + rng.normal(scale=0.3, size=np.shape(v)) for k, v in init_lstm(4, 3, 64, seed).copy_params().items()}
            Xs, M = _batch([[emb.index(w) for w in rng.choice(words, size=n)] for n in range(1, 6)], emb)
            ys = rng.integers(0, 2, size=5).astype(float)
            _, grads = lstm_loss_and_grads(params, Xs, M, ys)
            for name, value in params.items():
                theta = np.asarray(value, dtype=float)

                def f(t, name=name, shape=theta.shape):
                    return lstm_loss_and_grads({**params, name: t.reshape(shape)}, Xs, M, ys)[0]

                num = central_differences(f, theta.ravel().copy(), 1e-4)
                worst["lstm"] = max(worst["lstm"], max_relative_error(grads[name], num))
        elapsed = time.perf_counter() - start
        info.append(", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
        assert worst["logistic"] < 1e-4 and worst["hinge"] < 1e-4 and worst["lstm"] < 1e-3, worst
        assert elapsed < 60


# -- 6 ---------------------------------------------------------------------------

def _dataset(bits):
    return Dataset([LabeledSentence(f"r{i}", "x", S if b else N) for i, b in enumerate(bits)], "test")


def test_criterion_6_metric_identities():
    with criterion("6", "F1 equals direct formula on 1000 random vectors (1e-12); 2/3 fixture") as info:
        gold = [1, 1, 1, 0] + [0] * 6
        pred = [1, 1, 0, 1] + [0] * 6
        r = evaluate(_dataset(gold), [(f"r{i}", S if p else N) for i, p in enumerate(pred)])
        m = r.matrix
        assert (m.tp, m.fp, m.fn, m.tn) == (2, 1, 1, 6)
        assert abs(r.precision - 2 / 3) <= 1e-12 and abs(r.recall - 2 / 3) <= 1e-12 and abs(r.f1 - 2 / 3) <= 1e-12
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(1, 50))
            g, p = rng.integers(0, 2, n).tolist(), rng.integers(0, 2, n).tolist()
            rep = evaluate(_dataset(g), [(f"r{i}", S if b else N) for i, b in enumerate(p)])
            worst = max(worst, abs(rep.f1 - f1_direct(g, p)))
        assert worst <= 1e-12
        info.append(f"max |diff| {worst:.1e}")


# -- 7 ---------------------------------------------------------------------------

def test_criterion_7_keyword_fixture():
    with criterion("7", "keyword fractions exact on constructed fixtures") as info:
        texts = ["It would be nice.", "I WOULD never do that.", "That would have been fine.", "The app crashed.",
                 "Please add tabs.", "Works fine."]
        d = Dataset([LabeledSentence(f"k{i}", t, S if i == 4 else N) for i, t in enumerate(texts)], "test")
        r = evaluate(d, [(rid, N if rid == "k5" else S) for rid in d.ids])
        k = keyword_analysis(r, d)
        assert k.n_false_positives == 4
        assert k.per_keyword_fraction["would"] == 0.75
        assert k.fraction_fp_with_any_keyword == 0.75
        empty = keyword_analysis(r, d, [])
        assert empty.fraction_fp_with_any_keyword == 0.0 and empty.per_keyword_fraction == {}
        info.append("4 FPs, 3 with 'would' -> 0.75")


def test_criterion_7_keyword_fraction_official(official):
    with criterion("7", "official training-set FP keyword fraction vs 0.77 (band +-0.15, warning only)") as info:
        train_d, test_d, prepared, results = _official_models(official)
        best = max(results, key=lambda k: results[k][2].f1)
        bundle, vocab, _ = results[best]
        values = score(bundle, train_d.texts, vocab)
        report = evaluate(train_d, zip(train_d.ids, labels_of(values)), dict(zip(train_d.ids, values.tolist())))
        k = keyword_analysis(report, train_d, cfg=bundle.normalizer)
        frac = k.fraction_fp_with_any_keyword
        assert frac is not None and 0.0 <= frac <= 1.0
        info.append(f"model {best}: {frac:.3f} over {k.n_false_positives} FPs (reference {FP_KEYWORD_FRACTION})")
        if abs(frac - FP_KEYWORD_FRACTION) > 0.15:
            warnings.warn(f"FP keyword fraction {frac:.3f} outside 0.77 +- 0.15 (different model family)")
            info.append("outside band (warning)")


# -- 8 ---------------------------------------------------------------------------

FRAGMENTS = ["http://", "www.", ".com/", "#", "@", ":(", ":)", ";-)", "$", "%", "12/03/2019", "5pm", "n't", "'s",
             "*", "\"", "`", ";", "...", "!?", "’", "“", "\U0001F600", "́", "﻿", "\x00", "\r\n"]


def random_strings(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        parts = []
        for _ in range(int(rng.integers(0, 12))):
            r = rng.random()
            if r < 0.3:
                parts.append(FRAGMENTS[rng.integers(len(FRAGMENTS))])
            else:
                k = int(rng.integers(1, 8))
                if r < 0.7:
                    cps = rng.integers(0x20, 0x7F, size=k)
                elif r < 0.9:
                    cps = rng.integers(0x80, 0xD800, size=k)
                else:
                    cps = rng.integers(0xE000, 0x110000, size=k)
                parts.append("".join(chr(int(c)) for c in cps))
            if rng.random() < 0.5:
                parts.append(" ")
        out.append("".join(parts))
    return out


def test_criterion_8_totality_fuzz():
    with criterion("8", "10,000 random UTF-8 strings through preprocess without failure") as info:
        strings = random_strings(10_000, seed=8)
        masks = 0
        for s in strings:
            s.encode("utf-8")
            out = preprocess_tokens(s)
            for tok in out:
                if len(tok) > 2 and tok[0] == "<" and tok[-1] == ">":
                    assert tok in MASKS, tok
                    masks += 1
            assert preprocess(s) == preprocess(s)
        info.append(f"{masks} mask tokens emitted")


def test_criterion_8_pipeline_determinism(tmp_path, tmp_path_factory):
    with criterion("8", "repeated full pipeline runs give bit-identical model and report files") as info:
        root = tmp_path_factory.mktemp("det")
        files = {}
        for name, n, seed in (("train", 400, 11), ("trial", 60, 12), ("test", 120, 13)):
            files[name] = str(root / f"{name}.csv")
            save_dataset(make_dataset(n, seed=seed, split_tag=name), files[name])
        lstm_config = write_embeddings(files["train"], root)
        a = full_run(files, tmp_path / "a", lstm_config)
        b = full_run(files, tmp_path / "b", lstm_config)
        assert a.keys() == b.keys()
        differing = [name for name in a if a[name] != b[name]]
        assert not differing, differing
        info.append(f"{len(a)} files compared")
