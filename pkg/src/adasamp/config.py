"""Experiment configuration: file format, validation, and named presets.

Config files are line-oriented ``key = value`` pairs under ``[section]``
headers; ``#`` starts a comment.  Sections are ``[problem]``, ``[training]``,
``[sweep]``, and ``[output]``.  Sweep keys hold comma-separated lists; every
combination of the swept axes becomes one run.  Unknown sections or keys are
rejected rather than ignored so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigParseError, ConfigValidationError
from .problems import DEFAULT_NOISE_SD, SyntheticConfig
from .simulator import REPLACEMENT_MODES, SAMPLER_KINDS, TrainConfig


@dataclass(frozen=True)
class DatasetPaths:
    features: str
    labels: str
    partition: str


@dataclass
class ExperimentConfig:
    """A validated experiment: problem, base training knobs, sweep axes, output.

    Sweep axes left empty mean "use the scalar from the training/problem
    section", collapsing to a single run when none are given.
    """

    name: str
    problem: SyntheticConfig | DatasetPaths
    training: TrainConfig
    samplers: list[str] = field(default_factory=list)
    sigmas: list[float] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    replacements: list[str] = field(default_factory=list)
    out_dir: str = "results"
    formats: list[str] = field(default_factory=lambda: ["csv"])

    def __post_init__(self):
        for s in self.samplers:
            if s not in SAMPLER_KINDS:
                raise ConfigValidationError("sweep.samplers", f"unknown sampler {s!r}")
        for a in self.alphas:
            if not (0.0 < a <= 1.0):
                raise ConfigValidationError("sweep.alphas", f"alpha {a} outside (0, 1]")
        for s in self.sigmas:
            if s < 0:
                raise ConfigValidationError("sweep.sigmas", f"sigma {s} negative")
        for r in self.replacements:
            if r not in REPLACEMENT_MODES:
                raise ConfigValidationError("sweep.replacements", f"unknown mode {r!r}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigValidationError("sweep.seeds", "duplicate seeds")
        if self.sigmas and not isinstance(self.problem, SyntheticConfig):
            raise ConfigValidationError(
                "sweep.sigmas", "sigma sweeps require a synthetic problem"
            )
        for f in self.formats:
            if f != "csv":
                raise ConfigValidationError("output.formats", f"unknown format {f!r}")


_PROBLEM_KEYS = {
    "kind": str,
    "M": int,
    "n_m": int,
    "d": int,
    "kappa": float,
    "sigma": float,
    "noise_sd": float,
    "seed": int,
    "features": str,
    "labels": str,
    "partition": str,
}
_TRAINING_KEYS = {
    "K": int,
    "batch": int,
    "mu_sgd": float,
    "T": int,
    "sampler_kind": str,
    "replacement": str,
    "alpha": float,
    "seed": int,
    "warm_start": bool,
    "osmd_eta": float,
}
_SWEEP_KEYS = {
    "samplers": str,
    "sigmas": float,
    "alphas": float,
    "seeds": int,
    "replacements": str,
}
_OUTPUT_KEYS = {"directory": str, "formats": str}
_SECTIONS = {
    "problem": _PROBLEM_KEYS,
    "training": _TRAINING_KEYS,
    "sweep": _SWEEP_KEYS,
    "output": _OUTPUT_KEYS,
}


def _parse_bool(raw: str, field_name: str) -> bool:
    low = raw.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigValidationError(field_name, f"expected a boolean, got {raw!r}")


def _convert(raw: str, typ, field_name: str):
    if typ is bool:
        return _parse_bool(raw, field_name)
    try:
        return typ(raw)
    except ValueError:
        raise ConfigValidationError(
            field_name, f"expected {typ.__name__}, got {raw!r}"
        ) from None


def _read_sections(path) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if stripped.startswith("["):
                if not stripped.endswith("]"):
                    raise ConfigParseError("unterminated section header", line=lineno)
                name = stripped[1:-1].strip()
                if name not in _SECTIONS:
                    raise ConfigValidationError(name, "unknown section")
                if name in sections:
                    raise ConfigParseError(f"duplicate section [{name}]", line=lineno)
                sections[name] = {}
                current = name
                continue
            if "=" not in stripped:
                raise ConfigParseError(f"expected key = value, got {stripped!r}", line=lineno)
            if current is None:
                raise ConfigParseError("key outside any [section]", line=lineno)
            key, _, value = stripped.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _SECTIONS[current]:
                raise ConfigValidationError(f"{current}.{key}", "unknown key")
            if key in sections[current]:
                raise ConfigParseError(f"duplicate key {key!r}", line=lineno)
            sections[current][key] = value
    return sections


def _split_list(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def parse_config(path, name: str | None = None) -> ExperimentConfig:
    """Parse and validate a config file into an ExperimentConfig."""
    sections = _read_sections(path)
    if "problem" not in sections:
        raise ConfigValidationError("problem", "section is required")

    prob_raw = dict(sections.get("problem", {}))
    kind = prob_raw.pop("kind", "synthetic")
    if kind == "synthetic":
        for k in ("features", "labels", "partition"):
            if k in prob_raw:
                raise ConfigValidationError(f"problem.{k}", "not valid for synthetic problems")
        values = {
            k: _convert(v, _PROBLEM_KEYS[k], f"problem.{k}") for k, v in prob_raw.items()
        }
        try:
            problem = SyntheticConfig(**values)
        except (TypeError, ValueError) as exc:
            raise ConfigValidationError("problem", str(exc)) from None
    elif kind == "dataset":
        missing = [k for k in ("features", "labels", "partition") if k not in prob_raw]
        if missing:
            raise ConfigValidationError(f"problem.{missing[0]}", "required for dataset problems")
        extra = set(prob_raw) - {"features", "labels", "partition"}
        if extra:
            raise ConfigValidationError(
                f"problem.{sorted(extra)[0]}", "not valid for dataset problems"
            )
        problem = DatasetPaths(
            features=prob_raw["features"],
            labels=prob_raw["labels"],
            partition=prob_raw["partition"],
        )
    else:
        raise ConfigValidationError("problem.kind", f"unknown kind {kind!r}")

    train_values = {}
    for k, v in sections.get("training", {}).items():
        train_values[k] = _convert(v, _TRAINING_KEYS[k], f"training.{k}")
    try:
        training = TrainConfig(**train_values)
    except (TypeError, ValueError) as exc:
        raise ConfigValidationError("training", str(exc)) from None

    sweep = sections.get("sweep", {})
    out = sections.get("output", {})
    cfg = ExperimentConfig(
        name=name or str(path),
        problem=problem,
        training=training,
        samplers=_split_list(sweep.get("samplers", "")),
        sigmas=[
            _convert(s, float, "sweep.sigmas") for s in _split_list(sweep.get("sigmas", ""))
        ],
        alphas=[
            _convert(s, float, "sweep.alphas") for s in _split_list(sweep.get("alphas", ""))
        ],
        seeds=[
            _convert(s, int, "sweep.seeds") for s in _split_list(sweep.get("seeds", ""))
        ],
        replacements=_split_list(sweep.get("replacements", "")),
        out_dir=out.get("directory", "results"),
        formats=_split_list(out.get("formats", "csv")),
    )
    return cfg


# Fixed data seed for the preset synthetic problems; runs vary the training
# seed, so all seeds of one preset share a generated problem instance.
_PRESET_DATA_SEED = 723841
_PRESET_SEEDS = list(range(1, 11))


def _synthetic_preset(name: str, sigma: float, **overrides) -> ExperimentConfig:
    base = dict(
        name=name,
        problem=SyntheticConfig(
            M=100, n_m=100, d=10, kappa=25.0, sigma=sigma, seed=_PRESET_DATA_SEED
        ),
        training=TrainConfig(
            K=5,
            batch=10,
            mu_sgd=0.1,
            T=2000,
            sampler_kind="adaptive-osmd",
            replacement="with",
            alpha=0.4,
            seed=1,
        ),
        samplers=["uniform", "adaptive-osmd", "oracle-optimal"],
        seeds=list(_PRESET_SEEDS),
        out_dir="results",
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def presets() -> dict[str, ExperimentConfig]:
    """Named experiment presets covering the standard synthetic comparisons."""
    named = {}
    for sigma in (1.0, 3.0, 10.0):
        key = f"synthetic-sigma{int(sigma)}"
        named[key] = _synthetic_preset(key, sigma)
    named["alpha-robustness"] = _synthetic_preset(
        "alpha-robustness",
        10.0,
        samplers=["adaptive-osmd"],
        alphas=[0.01, 0.1, 0.4, 0.7, 0.9, 1.0],
    )
    named["replacement-compare"] = _synthetic_preset(
        "replacement-compare",
        10.0,
        samplers=["adaptive-osmd"],
        replacements=["with", "without"],
    )
    return named


def preset(name: str) -> ExperimentConfig:
    named = presets()
    if name not in named:
        known = ", ".join(sorted(named))
        raise ConfigValidationError("preset", f"unknown preset {name!r} (known: {known})")
    return named[name]
