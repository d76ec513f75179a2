"""Configuration dataclasses for the model, training runs, and the generator."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


@dataclass
class ModelConfig:
    d_model: int = 64
    n_heads: int = 4
    n_encoder_layers: int = 2
    n_inter_layers: int = 2
    dropout_rate: float = 0.35
    max_sequence_length: int = 256
    vocab_size: int = 0  # filled in once a vocabulary is built
    lambda_entail: float = 3.0
    ffn_dim: int = 0  # 0 means 4 * d_model
    # Mix entailment vectors with softmax-normalized confidence scores instead
    # of raw ones (ablation switch; raw scores are the default behaviour).
    normalized_entail_mix: bool = False

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.lambda_entail <= 0:
            raise ValueError("lambda_entail must be > 0")
        if self.ffn_dim == 0:
            self.ffn_dim = 4 * self.d_model


@dataclass
class TrainingConfig:
    epochs: int = 5
    batch_size: int = 16
    learning_rate: float = 5e-5
    warmup_fraction: float = 0.1
    seed: int = 0
    # "edu" parses rules into clause-level conditions; "sentence" is the
    # segmentation ablation that stays at sentence granularity.
    segmentation: str = "edu"
    task: str = "both"  # decision | span | both
    min_token_freq: int = 1
    # Build the follow-up -> condition match table once per rule text instead
    # of per turn (same labels either way; kept as an experiment switch).
    pool_follow_ups: bool = False

    def __post_init__(self):
        if self.segmentation not in ("edu", "sentence"):
            raise ValueError("segmentation must be 'edu' or 'sentence'")
        if self.task not in ("decision", "span", "both"):
            raise ValueError("task must be 'decision', 'span' or 'both'")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")


@dataclass
class GeneratorConfig:
    n_examples: int = 1000
    max_conditions: int = 3
    # Rules are drawn from a fixed pool (as in the source benchmark, where the
    # same rule texts appear across splits); examples vary in dialog state.
    n_rules: int = 80
    n_outcomes: int = 12
    rule_pool_seed: int = 7
    type_weights: dict[str, float] = field(default_factory=lambda: {
        "simple": 0.30, "conjunction": 0.28, "disjunction": 0.24, "other": 0.18,
    })
    # Scenario paraphrase phenomena and their mixture weights.
    phenomenon_weights: dict[str, float] = field(default_factory=lambda: {
        "numeric": 1.0, "date": 1.0, "hypernym": 1.0, "paraphrase": 1.0,
    })
    bullet_fraction: float = 0.4
    irrelevant_fraction: float = 0.12
    scenario_reveal_prob: float = 0.35
    history_continue_prob: float = 0.55

    def __post_init__(self):
        if self.max_conditions < 1:
            raise ValueError("generator needs at least 1 condition per rule")
        if self.n_examples < 0 or self.n_rules < 1:
            raise ValueError("n_examples must be >= 0 and n_rules >= 1")


@dataclass
class RunConfig:
    """Top-level config file: model + training + data locations."""
    model: ModelConfig = field(default_factory=ModelConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    train_data: str = ""
    dev_data: str = ""
    checkpoint_path: str = "checkpoint.json"
    log_path: str = ""
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)


def _from_dict(cls, data: dict):
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**data)


def load_run_config(path: str | Path) -> RunConfig:
    raw = json.loads(Path(path).read_text())
    cfg = RunConfig()
    if "model" in raw:
        cfg.model = _from_dict(ModelConfig, raw.pop("model"))
    if "training" in raw:
        cfg.training = _from_dict(TrainingConfig, raw.pop("training"))
    if "generator" in raw:
        cfg.generator = _from_dict(GeneratorConfig, raw.pop("generator"))
    for key in ("train_data", "dev_data", "checkpoint_path", "log_path"):
        if key in raw:
            setattr(cfg, key, raw.pop(key))
    if raw:
        raise ValueError(f"unknown config keys: {sorted(raw)}")
    return cfg


def run_config_to_json(cfg: RunConfig) -> str:
    return json.dumps(asdict(cfg), indent=2, sort_keys=True)
