"""JSON run-configuration parsing and validation.

The config file mirrors SimConfig section by section; every field is
optional and falls back to the built-in default.  Unknown keys are
rejected, and all diagnostics carry the dotted path of the offending
field so CLI errors can name it precisely.
"""

from __future__ import annotations

import json
from typing import Optional

from .adversary import (AdversaryError, AdversarySpec, PROPOSER_KINDS,
                        VOTER_KINDS)
from .engine import EngineError, ProtocolParams
from .harness import GRID_AXES, HarnessError, SimConfig
from .task import TaskError, TaskSpec

SCHEMA_VERSION = "flocksim-config/1"


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _require_dict(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    return obj


def _check_keys(obj: dict, allowed: set, path: str) -> None:
    for key in obj:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ConfigError(where, "unknown key")


def _get_int(obj: dict, key: str, default: int, path: str) -> int:
    if key not in obj:
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {val!r}")
    return val


def _get_float(obj: dict, key: str, default: float, path: str) -> float:
    if key not in obj:
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {val!r}")
    return float(val)


def _get_bool(obj: dict, key: str, default: bool, path: str) -> bool:
    if key not in obj:
        return default
    val = obj[key]
    if not isinstance(val, bool):
        raise ConfigError(f"{path}.{key}", f"expected a boolean, got {val!r}")
    return val


def _parse_strategy(obj, kinds: dict, path: str):
    _require_dict(obj, path)
    if "kind" not in obj:
        raise ConfigError(path, "strategy requires a 'kind' field")
    kind = obj["kind"]
    if kind not in kinds:
        raise ConfigError(f"{path}.kind",
                          f"unknown strategy {kind!r}; known: {sorted(kinds)}")
    cls = kinds[kind]
    params = {k: v for k, v in obj.items() if k != "kind"}
    if kind == "gaussian_noise":
        _check_keys(params, {"sigma_a"}, path)
        sigma = _get_float(params, "sigma_a", 1.0, path)
        return cls(sigma_a=sigma)
    if kind == "sign_flip":
        _check_keys(params, {"lam"}, path)
        lam = _get_float(params, "lam", 1.0, path)
        return cls(lam=lam)
    _check_keys(params, set(), path)
    return cls()


def _parse_overrides(obj, kinds: dict, path: str) -> dict:
    _require_dict(obj, path)
    out = {}
    for nid, strat in obj.items():
        if not isinstance(nid, str):
            raise ConfigError(path, f"override key must be a node id string")
        out[nid] = _parse_strategy(strat, kinds, f"{path}.{nid}")
    return out


def _parse_adversary(obj: dict, path: str) -> AdversarySpec:
    allowed = {"l_p", "l_v", "proposer_strategy", "voter_strategy",
               "proposer_overrides", "voter_overrides", "collusion_groups"}
    _check_keys(obj, allowed, path)
    default = AdversarySpec()
    try:
        proposer = (_parse_strategy(obj["proposer_strategy"], PROPOSER_KINDS,
                                    f"{path}.proposer_strategy")
                    if "proposer_strategy" in obj else default.proposer_strategy)
        voter = (_parse_strategy(obj["voter_strategy"], VOTER_KINDS,
                                 f"{path}.voter_strategy")
                 if "voter_strategy" in obj else default.voter_strategy)
        p_over = (_parse_overrides(obj["proposer_overrides"], PROPOSER_KINDS,
                                   f"{path}.proposer_overrides")
                  if "proposer_overrides" in obj else {})
        v_over = (_parse_overrides(obj["voter_overrides"], VOTER_KINDS,
                                   f"{path}.voter_overrides")
                  if "voter_overrides" in obj else {})
    except AdversaryError as exc:
        raise ConfigError(path, str(exc)) from exc
    groups = []
    raw_groups = obj.get("collusion_groups", [])
    if not isinstance(raw_groups, list):
        raise ConfigError(f"{path}.collusion_groups", "expected a list of lists")
    for i, group in enumerate(raw_groups):
        if (not isinstance(group, list)
                or not all(isinstance(g, str) for g in group)):
            raise ConfigError(f"{path}.collusion_groups[{i}]",
                              "expected a list of node id strings")
        groups.append(frozenset(group))
    return AdversarySpec(
        l_p=_get_float(obj, "l_p", 0.3, path),
        l_v=_get_float(obj, "l_v", 0.3, path),
        proposer_strategy=proposer,
        voter_strategy=voter,
        proposer_overrides=p_over,
        voter_overrides=v_over,
        collusion_groups=tuple(groups),
    )


# Best-effort mapping from invariant messages to config field paths.
_FIELD_SECTIONS = {
    "alpha": "protocol.alpha", "beta": "protocol.beta", "T": "protocol.T",
    "N_p": "protocol.N_p", "N_v": "protocol.N_v",
    "min_stake": "protocol.min_stake",
    "kappa_timeout": "protocol.kappa_timeout", "rho": "protocol.rho",
    "n_miners": "protocol.n_miners", "dim": "task.dim",
    "noise_sigma": "task.noise_sigma", "n_train": "task.n_train",
    "n_test": "task.n_test", "lr": "task.lr",
    "local_steps": "task.local_steps", "l_p": "adversary.l_p",
    "l_v": "adversary.l_v", "n_nodes": "population.n_nodes",
    "initial_stake": "population.initial_stake", "rounds": "run.rounds",
    "n_seeds": "run.n_seeds", "seed_base": "run.seed_base",
}


def _path_for_message(message: str) -> str:
    first = message.split()[0] if message else ""
    return _FIELD_SECTIONS.get(first, "")


def parse_config_obj(obj) -> SimConfig:
    """Build a validated SimConfig from a parsed JSON document."""
    _require_dict(obj, "")
    _check_keys(obj, {"schema", "population", "run", "protocol", "task",
                      "adversary"}, "")
    schema = obj.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError("schema",
                          f"expected {SCHEMA_VERSION!r}, got {schema!r}")

    pop = _require_dict(obj.get("population", {}), "population")
    _check_keys(pop, {"n_nodes", "initial_stake"}, "population")
    run = _require_dict(obj.get("run", {}), "run")
    _check_keys(run, {"rounds", "n_seeds", "seed_base"}, "run")

    proto = _require_dict(obj.get("protocol", {}), "protocol")
    _check_keys(proto, {"alpha", "beta", "T", "N_p", "N_v", "min_stake",
                        "kappa_timeout", "rho", "n_miners", "voting_enabled"},
                "protocol")
    defaults_p = ProtocolParams()
    protocol = ProtocolParams(
        alpha=_get_float(proto, "alpha", defaults_p.alpha, "protocol"),
        beta=_get_float(proto, "beta", defaults_p.beta, "protocol"),
        T=_get_int(proto, "T", defaults_p.T, "protocol"),
        N_p=_get_int(proto, "N_p", defaults_p.N_p, "protocol"),
        N_v=_get_int(proto, "N_v", defaults_p.N_v, "protocol"),
        min_stake=_get_int(proto, "min_stake", defaults_p.min_stake, "protocol"),
        kappa_timeout=_get_float(proto, "kappa_timeout",
                                 defaults_p.kappa_timeout, "protocol"),
        rho=_get_float(proto, "rho", defaults_p.rho, "protocol"),
        n_miners=_get_int(proto, "n_miners", defaults_p.n_miners, "protocol"),
        voting_enabled=_get_bool(proto, "voting_enabled",
                                 defaults_p.voting_enabled, "protocol"),
    )

    tsk = _require_dict(obj.get("task", {}), "task")
    _check_keys(tsk, {"dim", "noise_sigma", "n_train", "n_test", "lr",
                      "local_steps", "true_weights"}, "task")
    defaults_t = TaskSpec()
    task = TaskSpec(
        dim=_get_int(tsk, "dim", defaults_t.dim, "task"),
        noise_sigma=_get_float(tsk, "noise_sigma", defaults_t.noise_sigma,
                               "task"),
        n_train=_get_int(tsk, "n_train", defaults_t.n_train, "task"),
        n_test=_get_int(tsk, "n_test", defaults_t.n_test, "task"),
        lr=_get_float(tsk, "lr", defaults_t.lr, "task"),
        local_steps=_get_int(tsk, "local_steps", defaults_t.local_steps,
                             "task"),
    )
    true_weights = None
    if tsk.get("true_weights") is not None:
        tw = tsk["true_weights"]
        if (not isinstance(tw, list)
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                           for x in tw)):
            raise ConfigError("task.true_weights", "expected a list of numbers")
        true_weights = tuple(float(x) for x in tw)

    adversary = (_parse_adversary(obj["adversary"], "adversary")
                 if "adversary" in obj else AdversarySpec(l_p=0.3, l_v=0.3))

    config = SimConfig(
        n_nodes=_get_int(pop, "n_nodes", 100, "population"),
        initial_stake=_get_int(pop, "initial_stake", 600, "population"),
        rounds=_get_int(run, "rounds", 200, "run"),
        n_seeds=_get_int(run, "n_seeds", 20, "run"),
        seed_base=_get_int(run, "seed_base", 42, "run"),
        protocol=protocol,
        task=task,
        adversary=adversary,
        true_weights=true_weights,
    )
    try:
        config.validate()
    except (EngineError, TaskError, AdversaryError, HarnessError) as exc:
        raise ConfigError(_path_for_message(str(exc)), str(exc)) from exc
    return config


def default_config() -> SimConfig:
    """The built-in headline configuration."""
    return parse_config_obj({})


def config_to_obj(config: SimConfig) -> dict:
    """Round-trip a SimConfig back to its JSON document form."""
    def strategy_obj(strategy):
        out = {"kind": strategy.kind}
        if strategy.kind == "gaussian_noise":
            out["sigma_a"] = strategy.sigma_a
        elif strategy.kind == "sign_flip":
            out["lam"] = strategy.lam
        return out

    adv = config.adversary
    return {
        "schema": SCHEMA_VERSION,
        "population": {"n_nodes": config.n_nodes,
                       "initial_stake": config.initial_stake},
        "run": {"rounds": config.rounds, "n_seeds": config.n_seeds,
                "seed_base": config.seed_base},
        "protocol": {
            "alpha": config.protocol.alpha, "beta": config.protocol.beta,
            "T": config.protocol.T, "N_p": config.protocol.N_p,
            "N_v": config.protocol.N_v,
            "min_stake": config.protocol.min_stake,
            "kappa_timeout": config.protocol.kappa_timeout,
            "rho": config.protocol.rho, "n_miners": config.protocol.n_miners,
            "voting_enabled": config.protocol.voting_enabled,
        },
        "task": {
            "dim": config.task.dim, "noise_sigma": config.task.noise_sigma,
            "n_train": config.task.n_train, "n_test": config.task.n_test,
            "lr": config.task.lr, "local_steps": config.task.local_steps,
            "true_weights": (list(config.true_weights)
                             if config.true_weights else None),
        },
        "adversary": {
            "l_p": adv.l_p, "l_v": adv.l_v,
            "proposer_strategy": strategy_obj(adv.proposer_strategy),
            "voter_strategy": strategy_obj(adv.voter_strategy),
            "proposer_overrides": {nid: strategy_obj(s) for nid, s in
                                   sorted(adv.proposer_overrides.items())},
            "voter_overrides": {nid: strategy_obj(s) for nid, s in
                                sorted(adv.voter_overrides.items())},
            "collusion_groups": [sorted(g) for g in adv.collusion_groups],
        },
    }


def load_config_file(path: str) -> SimConfig:
    """Read and validate a config file.  OSError on IO trouble."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    return parse_config_obj(obj)


def load_grid_file(path: str) -> dict:
    """Read a sweep grid: axis name -> nonempty list of values."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    _require_dict(obj, "grid")
    if not obj:
        raise ConfigError("grid", "grid must define at least one axis")
    grid = {}
    for name, values in obj.items():
        if name not in GRID_AXES:
            raise ConfigError(f"grid.{name}",
                              f"unknown axis; known: {list(GRID_AXES)}")
        if not isinstance(values, list) or not values:
            raise ConfigError(f"grid.{name}", "expected a nonempty list")
        parsed = []
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"grid.{name}", f"non-numeric value {v!r}")
            parsed.append(int(v) if name == "T" else float(v))
        grid[name] = parsed
    return grid
