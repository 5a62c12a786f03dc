"""Python access to the obfuskit core."""

import json

from ._obfuskit import (
    ObfuskitError,
    classify,
    fitness,
    format_percent,
    levenshtein,
    obfuscation_degree,
    similarity,
    tree_string,
    word_levenshtein,
)
from . import _obfuskit

__all__ = [
    "ObfuskitError",
    "aggregate",
    "classify",
    "evolve",
    "fitness",
    "format_percent",
    "levenshtein",
    "obfuscation_degree",
    "run_campaign",
    "sim_respond",
    "similarity",
    "tree_string",
    "word_levenshtein",
]


def sim_respond(query, tau=3.0, theta=0.5, rho=0.5, filler_length=0):
    """Simulator reply to ``query`` as a dict (text, branch, parts, ...)."""
    return json.loads(_obfuskit._sim_respond(query, tau, theta, rho, filler_length))


def aggregate(classes):
    """Metrics over outcome class names (SUCCESS, REJECTED, HALLUCINATION)."""
    return json.loads(_obfuskit._aggregate(list(classes)))


def evolve(seeds, population_size=20, max_iterations=30, retain_per_seed=10, rng_seed=0, tau=3.0, delta_edit=0.5):
    return json.loads(
        _obfuskit._evolve(list(seeds), population_size, max_iterations, retain_per_seed, rng_seed, tau, delta_edit)
    )


def run_campaign(config_path, resume=False, target=None, output_dir=None):
    """Runs a campaign config and returns report.json as a dict."""
    return json.loads(_obfuskit._run_campaign(str(config_path), resume, target, output_dir))
