import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# Official SemEval-2019 Task 9 Sub Task A files, if available locally:
#   $SUGGESTMINE_DATA_DIR/{train,trial,test}.csv  (id, sentence, label)
#   $SUGGESTMINE_EMBEDDINGS  fastText .vec file, 300 dimensions
DATA_DIR = os.environ.get("SUGGESTMINE_DATA_DIR")
EMBEDDINGS = os.environ.get("SUGGESTMINE_EMBEDDINGS")

def official_path(split):
    if not DATA_DIR:
        return None
    path = os.path.join(DATA_DIR, f"{split}.csv")
    return path if os.path.isfile(path) else None


@pytest.fixture
def official():
    def get(split):
        path = official_path(split)
        if path is None:
            pytest.skip(f"official {split} file unavailable (set SUGGESTMINE_DATA_DIR)")
        return path

    return get


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
