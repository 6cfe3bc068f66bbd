"""Fusion of skin-lesion classifier outputs, with metrics and attributions."""

from ._core import (
    ConfigError,
    Error,
    IoError,
    ParseError,
    TransportError,
    ValidationError,
    brightness_shift,
    center_crop,
    color_enhance,
    contrast_enhance,
    evaluate,
    exact_shapley,
    f1_score,
    hard_vote,
    max_rule,
    preprocess,
    roc_auc,
    run_cli,
    sampled_shapley,
    sharpness_enhance,
    soft_average,
    tanh_weights,
    weighted_average,
)

__all__ = [name for name in dir() if not name.startswith("_")]
