"""Drive the command-line pipeline end to end (shared by CLI and acceptance tests)."""

import json
import os

import numpy as np

from suggestmine.cli import main


def prepare(files, out):
    return main(["prepare", "--train", files["train"], "--trial", files["trial"], "--test", files["test"],
                 "--out-dir", str(out)])


def snapshot(directory):
    return {name: (directory / name).read_bytes() for name in sorted(os.listdir(directory))}


def write_embeddings(train_path, directory, dim=6, seed=0):
    """Random vectors for the training words plus a run config using them (small LSTM)."""
    rng = np.random.default_rng(seed)
    with open(train_path, encoding="utf-8") as fh:
        words = sorted({w.lower() for w in fh.read().split()})[:200]
    emb = os.path.join(directory, "vec.txt")
    with open(emb, "w", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {dim}\n")
        for w in words:
            fh.write(w + " " + " ".join(f"{x:.4f}" for x in rng.normal(size=dim)) + "\n")
    config = os.path.join(directory, "lstm.json")
    with open(config, "w", encoding="utf-8") as fh:
        json.dump({"version": 1, "embeddings": emb, "embedding_dim": dim,
                   "lstm": {"hidden_units": 4, "hyperparameters": {"epochs": 2}}}, fh)
    return config


def full_run(files, out, lstm_config=None):
    assert prepare(files, out) == 0
    kinds = [("nb", []), ("logreg", []), ("svm", [])]
    if lstm_config:
        kinds.append(("lstm", ["--config", lstm_config]))
    for kind, extra in kinds:
        assert main(["train", "--kind", kind, "--out-dir", str(out)] + extra) == 0
        model = str(out / f"model-{kind}.json")
        assert main(["evaluate", "--model", model, "--input", files["test"]] + extra) == 0
        assert main(["analyze", "--model", model, "--input", files["train"]] + extra) == 0
    return snapshot(out)
