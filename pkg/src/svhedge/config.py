"""Run configuration: TOML or JSON files validated against the shipped schema."""
from __future__ import annotations

import copy
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import ConfigError, ConfigurationError, DomainError, RhoRuleError
from .experiments import ExperimentConfig
from .quantile import QuantileConfig
from .models import make_model

DEFAULT_MODEL = dict(kind="hull_white", s0=1.0, y0=2.0, corr=0.05, sigma_min=2.0, a=-2.0, b=1.0)

DEFAULTS = {
    "seed": 0,
    "threads": 1,
    "schedule": {"n": [10, 50, 100, 500, 1000], "mu": 1.0, "substeps": 5},
    "profile": {"mode": "new", "rho": 2.0, "alpha": 0.0},
    "cost": {"kind": "dollar", "kappa": 0.01, "alpha": 0.0},
    "hedge": {"strategy": "lepinette", "correction": "lepinette", "N": 500, "K": 1.0,
              "liquidation": False, "eta0_kappa": False},
    "converge": {"metric": "corrected"},
    "superhedge": {"tol": 0.0},
    "quantile": {"eps": 0.001, "kappa": 0.001, "N": 100_000, "steps": 500, "K": 1.0,
                 "eps_grid": [0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.1],
                 "r_grid": [0.0, 0.02, 0.04, 0.06, 0.08, 0.1]},
    "limits": {"x_grid": [0.2, 0.5, 0.8, 1.0, 1.25, 2.0, 5.0], "sigma_y": 2.0, "rho": 2.0,
               "kappa": 0.01, "K": 1.0},
    "diag": {"lam_floor": 1.0},
}

TEMPLATES = ("table1", "table2", "fig2", "converge", "superhedge", "leland_lott")


def schema() -> dict:
    return json.loads(resources.files("svhedge").joinpath("data/config.schema.json").read_text())


def _stem(name: str) -> str:
    for ext in (".toml", ".cfg"):
        if name.endswith(ext):
            return name[: -len(ext)]
    return name


def template_path(name: str) -> Path:
    stem = _stem(name)
    if stem not in TEMPLATES:
        raise ConfigError(f"no shipped template named {name!r}")
    return Path(str(resources.files("svhedge").joinpath(f"data/{stem}.toml")))


def _read(path) -> dict:
    p = Path(path)
    if not p.exists():
        stem = _stem(p.name)
        if p.parent == Path(".") and stem in TEMPLATES:
            p = template_path(stem)
        else:
            raise ConfigError(f"config file {path} not found")
    text = p.read_text()
    try:
        if p.suffix == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    # a run manifest carries the config it was produced from
    if isinstance(data, dict) and "config" in data and "version" in data:
        data = data["config"]
    if not isinstance(data, dict):
        raise ConfigError("top level must be a table")
    return data


def _key_path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        if extra:
            parts.append(extra[0])
    elif err.validator == "required":
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            parts.append(missing[0])
    return ".".join(parts) or "<root>"


def validate(data: dict) -> dict:
    """Schema-check ``data`` and return it merged over the defaults."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, _key_path(err))
    out = copy.deepcopy(DEFAULTS)
    for key, val in data.items():
        if isinstance(val, dict) and key in out:
            out[key].update(copy.deepcopy(val))
        else:
            out[key] = copy.deepcopy(val)
    out.setdefault("model", dict(DEFAULT_MODEL))
    return out


def parse_config(path, seed: Optional[int] = None, threads: Optional[int] = None) -> dict:
    """Load, validate and default a config file; CLI overrides applied last."""
    cfg = validate(_read(path))
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", "seed")
        cfg["seed"] = int(seed)
    if threads is not None:
        cfg["threads"] = int(threads)
    check_model(cfg)
    return cfg


def check_model(cfg: dict) -> None:
    params = dict(cfg["model"])
    try:
        make_model(params.pop("kind"), **params)
    except DomainError as exc:
        raise ConfigError(str(exc), "model") from exc


def experiment_config(cfg: dict) -> ExperimentConfig:
    """Build (and validate) the hedging experiment described by a parsed config."""
    prof = cfg["profile"]
    hedge = cfg["hedge"]
    corr = hedge["correction"]
    try:
        return ExperimentConfig(
            model=dict(cfg["model"]),
            n_values=list(cfg["schedule"]["n"]),
            mu=float(cfg["schedule"]["mu"]),
            substeps=int(cfg["schedule"]["substeps"]),
            profile=prof["mode"],
            rho=float(prof["rho"]),
            rho_rule=dict(prof["rule"]) if "rule" in prof else None,
            profile_alpha=float(prof["alpha"]),
            cost=dict(cfg["cost"]),
            strategy=hedge["strategy"],
            correction=None if corr == "none" else corr,
            N=int(hedge["N"]),
            seed=int(cfg["seed"]),
            K=float(hedge["K"]),
            liquidation=bool(hedge["liquidation"]),
            eta0_kappa=bool(hedge["eta0_kappa"]),
        )
    except RhoRuleError:
        raise
    except ConfigurationError as exc:
        raise ConfigError(str(exc), "hedge.correction") from exc
    except DomainError as exc:
        raise ConfigError(str(exc), "profile") from exc


def quantile_config(cfg: dict) -> QuantileConfig:
    q = cfg["quantile"]
    params = dict(cfg["model"])
    model = make_model(params.pop("kind"), **params)
    try:
        return QuantileConfig(eps=q["eps"], kappa=q["kappa"], N=q["N"], model=model,
                              seed=int(cfg["seed"]), steps=q["steps"], K=q["K"])
    except DomainError as exc:
        raise ConfigError(str(exc), "quantile") from exc
