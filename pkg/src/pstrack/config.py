"""JSON run configuration. Unknown keys are rejected at every level."""

from __future__ import annotations

import json
from pathlib import Path

from .bandit import BanditConfig
from .harness import ESTIMATORS, ExperimentConfig
from .model import MeanProfile, ParamSet
from .sequence import RewardFamily

TOP_KEYS = {"profile", "params", "family", "estimator", "trials", "seed", "bandit"}
PROFILE_KEYS = {"horizon", "transitions", "means"}
PARAM_KEYS = {"gamma0", "gamma", "beta", "delta", "b", "mu0"}
FAMILY_KEYS = {"kind", "concentration"}
BANDIT_KEYS = {"horizon", "arms", "beta", "delta", "gamma", "family"}
ARM_KEYS = {"transitions", "means"}


class ConfigFormatError(ValueError):
    """The configuration document is malformed."""


def _keys(d, allowed, where, required=()):
    if not isinstance(d, dict):
        raise ConfigFormatError(f"{where} must be an object")
    unknown = set(d) - allowed
    if unknown:
        raise ConfigFormatError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    missing = [k for k in required if k not in d]
    if missing:
        raise ConfigFormatError(f"missing key(s) in {where}: {', '.join(missing)}")


def _int(v, where):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigFormatError(f"{where} must be an integer")
    return v


def parse_family(d) -> RewardFamily:
    if d is None:
        return RewardFamily()
    _keys(d, FAMILY_KEYS, "family", ("kind",))
    try:
        return RewardFamily(d["kind"], float(d.get("concentration", 2.0)))
    except (TypeError, ValueError) as e:
        raise ConfigFormatError(str(e)) from e


def parse_profile(d) -> MeanProfile:
    _keys(d, PROFILE_KEYS, "profile", ("horizon", "transitions", "means"))
    try:
        return MeanProfile(_int(d["horizon"], "profile.horizon"), tuple(d["transitions"]),
                           tuple(d["means"]))
    except (TypeError, ValueError) as e:
        raise ConfigFormatError(f"profile: {e}") from e


def parse_params(d) -> ParamSet:
    _keys(d, PARAM_KEYS, "params", tuple(sorted(PARAM_KEYS)))
    try:
        return ParamSet(**d)
    except (TypeError, ValueError) as e:
        raise ConfigFormatError(f"params: {e}") from e


def parse_experiment(doc: dict) -> ExperimentConfig:
    _keys(doc, TOP_KEYS, "config", ("profile", "params"))
    estimator = doc.get("estimator", "recursive")
    if estimator not in ESTIMATORS:
        raise ConfigFormatError(f"estimator must be one of {ESTIMATORS}")
    return ExperimentConfig(
        profile=parse_profile(doc["profile"]),
        params=parse_params(doc["params"]),
        family=parse_family(doc.get("family")),
        estimator=estimator,
        trials=_int(doc.get("trials", 100), "trials"),
        seed=_int(doc.get("seed", 0), "seed"),
    )


def parse_bandit(doc: dict) -> BanditConfig:
    _keys(doc, TOP_KEYS, "config", ("bandit",))
    d = doc["bandit"]
    _keys(d, BANDIT_KEYS, "bandit", ("horizon", "arms", "beta", "delta"))
    t = _int(d["horizon"], "bandit.horizon")
    if not isinstance(d["arms"], list) or not d["arms"]:
        raise ConfigFormatError("bandit.arms must be a non-empty list")
    arms = []
    for i, arm in enumerate(d["arms"]):
        _keys(arm, ARM_KEYS, f"bandit.arms[{i}]", ("transitions", "means"))
        try:
            arms.append(MeanProfile(t, tuple(arm["transitions"]), tuple(arm["means"])))
        except (TypeError, ValueError) as e:
            raise ConfigFormatError(f"bandit.arms[{i}]: {e}") from e
    family = parse_family(d.get("family", doc.get("family")))
    try:
        return BanditConfig(tuple(arms), float(d["beta"]), float(d["delta"]),
                            _int(doc.get("seed", 0), "seed"), family, float(d.get("gamma", 0.5)))
    except (TypeError, ValueError) as e:
        raise ConfigFormatError(f"bandit: {e}") from e


def load(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigFormatError(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigFormatError("config must be a JSON object")
    return doc
