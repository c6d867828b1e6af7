"""Python bindings for the erkit entity resolution toolkit."""

import json

from ._erkit import (  # noqa: F401
    ConfigError,
    ErkitError,
    __version__,
    adjusted_rand_index,
    jaccard_tokens,
    jaro_winkler,
    levenshtein_norm,
    make_reference_id,
    numeric_closeness,
    pairwise_metrics,
    soundex,
)
from ._erkit import run_batch as _run_batch


def run_batch(config_path):
    """Run a batch job; returns (profiles, report) as parsed objects."""
    raw = _run_batch(str(config_path))
    profiles = [json.loads(line) for line in raw["profiles_jsonl"].splitlines() if line]
    return profiles, json.loads(raw["report_json"])
