"""Published reference numbers, kept for side-by-side reporting only."""

from types import MappingProxyType

# F1 on the official training and test splits.
REFERENCE_F1 = MappingProxyType(
    {
        "nb": MappingProxyType({"train": 0.641, "test": 0.517}),
        "logreg": MappingProxyType({"train": 0.679, "test": 0.572}),
        "svm": MappingProxyType({"train": 0.695, "test": 0.576}),
        "lstm": MappingProxyType({"train": 0.731, "test": 0.591}),
        "baseline": MappingProxyType({"train": 0.720, "test": 0.267}),
        "ulmfit": MappingProxyType({"train": 0.861, "test": 0.701}),
    }
)

# (rank, team, test F1)
LEADERBOARD = (
    (1, "OleNet", 0.7812),
    (2, "ThisIsCompetition", 0.7778),
    (3, "m_y", 0.7761),
    (4, "yimmon", 0.7629),
    (5, "NTUA-ISLab", 0.7488),
    (10, "(rank-10 entry)", 0.7011),
)

# Official Sub Task A label counts.
DISTRIBUTION = MappingProxyType(
    {
        "train": MappingProxyType({"suggestion": 2085, "non_suggestion": 6415}),
        "trial": MappingProxyType({"suggestion": 296, "non_suggestion": 296}),
    }
)

# Share of training-set false positives containing a suggestion keyword, and of "would" alone.
FP_KEYWORD_FRACTION = 0.77
FP_WOULD_FRACTION = 0.30

# Transfer-learning configuration of the best published system (no training path here).
ULMFIT_CONFIG = MappingProxyType(
    {"bptt": 70, "batch_size": 48, "embedding_size": 400, "hidden_size": 1150, "num_layers": 3}
)
