"""Run configuration: JSON schema, profiles, canonical hashing.

A config file is a single JSON object. Required keys:

  n, k                 ground set size and per-round budget
  fairness             {"explicit": [r_0, ...]} or {"beta": b, "base": [...]}
  oracle               {"kind": "accuracy", "min_error", "scale", "exponent"}
                       | {"kind": "coverage", "item_weights": [...], "covers": [[...], ...]}
                       | {"kind": "modular", "weights": [...]}
  policy               faircg1 | faircg2 | fairdg | dg | roundrobin

Optional keys (profile defaults fill anything left null/absent):

  sample_counts        per-worker L_u (required by the accuracy oracle)
  horizon              rounds T
  master_seed          non-negative int (default 0)
  step_count           continuous-greedy discretization (default n^2)
  estimator            {"mode", "samples", "chunk_size",
                        "common_random_numbers", "exact_threshold"}
  strict_debt          bool, debt rule > 0 instead of >= 0 (default false)
  emit_step_trace      bool, write the per-step greedy trace CSV
  sweep_betas          list of betas for the sweep command
  subset_cap           variable cap for the stationary LP

Profiles: "fast" (step_count 25, samples 1e4, horizon 1e4) for quick runs
and tests; "full" (step_count n^2, samples n^5, horizon 1e5) reproduces the
reference simulation scale. Explicit config values always win over profile
values.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from .multilinear import ExtensionEstimator
from .oracles import AccuracyOracle, CoverageOracle, ModularOracle, UtilityOracle, WorkerPool
from .presets import DEMO_BETAS

POLICIES = ("faircg1", "faircg2", "fairdg", "dg", "roundrobin")

PROFILES: dict[str, dict[str, int | None]] = {
    "fast": {"step_count": 25, "samples": 10_000, "horizon": 10_000},
    "full": {"step_count": None, "samples": None, "horizon": 100_000},
}
DEFAULT_PROFILE = "fast"


@dataclass(frozen=True)
class RunConfig:
    n: int
    k: int
    fairness: tuple[float, ...]
    oracle: dict[str, Any]
    policy: str
    horizon: int
    master_seed: int
    step_count: int | None  # None = n^2
    estimator: dict[str, Any]
    sample_counts: tuple[float, ...] | None = None
    strict_debt: bool = False
    emit_step_trace: bool = False
    sweep_betas: tuple[float, ...] = DEMO_BETAS
    subset_cap: int = 100_000
    profile: str = DEFAULT_PROFILE
    # base profile when fairness was given as beta * base; sweeps rescale it
    fairness_base: tuple[float, ...] | None = None

    def build_pool(self) -> WorkerPool:
        return WorkerPool(
            n=self.n,
            k=self.k,
            fairness=np.asarray(self.fairness),
            sample_counts=(
                np.asarray(self.sample_counts) if self.sample_counts is not None else None
            ),
        )

    def build_oracle(self) -> UtilityOracle:
        params = dict(self.oracle)
        kind = params.pop("kind")
        if kind == "accuracy":
            if self.sample_counts is None:
                raise ValueError("the accuracy oracle needs sample_counts")
            return AccuracyOracle(sample_counts=self.sample_counts, **params)
        if kind == "coverage":
            return CoverageOracle(n=self.n, **params)
        if kind == "modular":
            return ModularOracle(**params)
        raise ValueError(f"unknown oracle kind {kind!r}")

    def build_estimator(self, seed_offset: int = 0) -> ExtensionEstimator:
        return ExtensionEstimator(
            mode=self.estimator.get("mode", "auto"),
            samples=self.estimator.get("samples"),
            exact_threshold=self.estimator.get("exact_threshold", 15),
            chunk_size=self.estimator.get("chunk_size", 4096),
            common_random_numbers=self.estimator.get("common_random_numbers", True),
            seed=self.master_seed + seed_offset,
        )

    def resolved_step_count(self) -> int:
        return self.step_count if self.step_count is not None else self.n**2

    def with_overrides(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def canonical_dict(self) -> dict[str, Any]:
        """Every result-affecting field, JSON-plain, in a stable shape."""
        return {
            "n": self.n,
            "k": self.k,
            "fairness": list(self.fairness),
            "sample_counts": list(self.sample_counts) if self.sample_counts else None,
            "oracle": self.oracle,
            "policy": self.policy,
            "horizon": self.horizon,
            "master_seed": self.master_seed,
            "step_count": self.step_count,
            "estimator": {
                "mode": self.estimator.get("mode", "auto"),
                "samples": self.estimator.get("samples"),
                "exact_threshold": self.estimator.get("exact_threshold", 15),
                "chunk_size": self.estimator.get("chunk_size", 4096),
                "common_random_numbers": self.estimator.get("common_random_numbers", True),
            },
            "strict_debt": self.strict_debt,
            "emit_step_trace": self.emit_step_trace,
            "sweep_betas": list(self.sweep_betas),
            "subset_cap": self.subset_cap,
            "fairness_base": list(self.fairness_base) if self.fairness_base else None,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config(
    path: str | Path,
    profile: str | None = None,
    seed: int | None = None,
) -> RunConfig:
    with open(path) as fh:
        raw = json.load(fh)
    return parse_config(raw, profile=profile, seed=seed)


def parse_config(
    raw: dict[str, Any],
    profile: str | None = None,
    seed: int | None = None,
) -> RunConfig:
    if not isinstance(raw, dict):
        raise ValueError("config root must be a JSON object")
    profile_name = profile or raw.get("profile") or DEFAULT_PROFILE
    if profile_name not in PROFILES:
        raise ValueError(f"unknown profile {profile_name!r}; pick from {sorted(PROFILES)}")
    defaults = PROFILES[profile_name]

    n = _require_int(raw, "n", minimum=1)
    k = _require_int(raw, "k", minimum=1)
    if k > n:
        raise ValueError(f"budget k={k} exceeds n={n}")

    fairness, fairness_base = _parse_fairness(raw.get("fairness"), n)
    oracle = raw.get("oracle")
    if not isinstance(oracle, dict) or "kind" not in oracle:
        raise ValueError('config needs an "oracle" object with a "kind"')

    policy = raw.get("policy")
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}, got {policy!r}")

    horizon = raw.get("horizon")
    if horizon is None:
        horizon = defaults["horizon"]
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError("horizon must be positive")

    master_seed = int(seed if seed is not None else raw.get("master_seed", 0))
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")

    step_count = raw.get("step_count", defaults["step_count"])
    if step_count is not None:
        step_count = int(step_count)
        if step_count < 1:
            raise ValueError("step_count must be positive")

    estimator = dict(raw.get("estimator") or {})
    estimator.setdefault("samples", defaults["samples"])

    sample_counts = raw.get("sample_counts")
    if sample_counts is not None:
        sample_counts = tuple(float(v) for v in sample_counts)
        if len(sample_counts) != n:
            raise ValueError(f"sample_counts must list {n} values")

    sweep = raw.get("sweep_betas")
    sweep_betas = tuple(float(b) for b in sweep) if sweep is not None else DEMO_BETAS

    return RunConfig(
        n=n,
        k=k,
        fairness=fairness,
        oracle=oracle,
        policy=str(policy),
        horizon=horizon,
        master_seed=master_seed,
        step_count=step_count,
        estimator=estimator,
        sample_counts=sample_counts,
        strict_debt=bool(raw.get("strict_debt", False)),
        emit_step_trace=bool(raw.get("emit_step_trace", False)),
        sweep_betas=sweep_betas,
        subset_cap=int(raw.get("subset_cap", 100_000)),
        profile=profile_name,
        fairness_base=fairness_base,
    )


def _require_int(raw: dict, key: str, minimum: int) -> int:
    if key not in raw:
        raise ValueError(f"config is missing required key {key!r}")
    value = int(raw[key])
    if value < minimum:
        raise ValueError(f"{key} must be at least {minimum}, got {value}")
    return value


def _parse_fairness(
    raw: Any, n: int
) -> tuple[tuple[float, ...], tuple[float, ...] | None]:
    base: tuple[float, ...] | None = None
    if isinstance(raw, dict) and "explicit" in raw:
        values = [float(v) for v in raw["explicit"]]
    elif isinstance(raw, dict) and "beta" in raw and "base" in raw:
        beta = float(raw["beta"])
        base = tuple(float(v) for v in raw["base"])
        values = [beta * v for v in base]
    else:
        raise ValueError(
            'config needs "fairness" as {"explicit": [...]} or {"beta": b, "base": [...]}'
        )
    if len(values) != n:
        raise ValueError(f"fairness must resolve to {n} floors")
    if min(values) < 0.0 or max(values) > 1.0:
        raise ValueError("fairness floors must lie in [0, 1]")
    return tuple(values), base
