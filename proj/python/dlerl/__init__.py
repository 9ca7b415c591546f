"""Structured-output rewards, GSPO tooling and evaluation for deepfake RL."""

import json

from . import _dlerl

Error = _dlerl.Error

__all__ = [
    "Error",
    "error_code",
    "check_format",
    "parse_response",
    "composite_reward",
    "score_batch",
    "evaluate_files",
    "build_stage_plans",
]


def error_code(exc):
    """Code name of a dlerl.Error, e.g. "IoError"."""
    return str(exc).split(":", 1)[0]


def _record(truth):
    return truth if isinstance(truth, str) else json.dumps(truth)


def _config(config):
    if config is None or isinstance(config, str):
        return config
    return json.dumps(config)


def check_format(text, modality=None, duration=None):
    return json.loads(_dlerl.check_format(text, modality, duration))


def parse_response(text, modality=None, duration=None):
    """Parsed response as a dict; raises dlerl.Error on malformed text."""
    return json.loads(_dlerl.parse_response(text, modality, duration))


def composite_reward(text, truth, config=None):
    """Reward breakdown for one response; `truth` is a manifest record."""
    return json.loads(_dlerl.composite_reward(text, _record(truth), _config(config)))


def score_batch(texts, truths, config=None):
    """Composite totals for parallel lists; the GIL is released while scoring."""
    return _dlerl.score_batch(list(texts), [_record(t) for t in truths],
                              _config(config))


def evaluate_files(responses, manifest, tau=0.5):
    return json.loads(_dlerl.evaluate_files(str(responses), str(manifest), tau))


def build_stage_plans(manifests, replay_ratio=0.15, seed=0):
    if isinstance(manifests, (str, bytes)) or hasattr(manifests, "__fspath__"):
        manifests = [manifests]
    return json.loads(_dlerl.build_stage_plans([str(m) for m in manifests],
                                               replay_ratio, seed))
