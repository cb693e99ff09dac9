"""Flat key-value experiment configuration (JSON) with command-line overrides."""
from __future__ import annotations

import json
from pathlib import Path

from .errors import ErrpkitError


class ConfigError(ErrpkitError):
    """Bad configuration file or override."""


DEFAULTS: dict = {
    # dataset generation
    "n_trials": 300,
    "n_channels": 32,
    "fs_hz": 256.0,
    "pre_s": 0.5,
    "post_s": 2.0,
    "label_source": "balanced",  # balanced | staircase
    "seed": 0,
    # templates and noise
    "frn_peak_s": 0.15,
    "frn_width_s": 0.05,
    "frn_amp_uv": -10.0,
    "p3a_peak_s": 0.30,
    "p3a_width_s": 0.08,
    "p3a_amp_uv": 4.0,
    "p3a_success_scale": 0.5,
    "topography": None,
    "noise_rms_uv": 10.0,
    "noise_exponent": 1.0,
    "confound_enabled": False,
    "confound_peak_s": 0.1375,
    "confound_width_s": 0.03,
    "confound_amp_success_uv": -1.0,
    "confound_amp_failure_uv": -2.0,
    # staircase observer (used when label_source == "staircase")
    "psy_threshold_alpha": 0.004,
    "psy_slope_beta": 3.5,
    "psy_lapse": 0.02,
    "start_contrast": 0.004,
    "step_factor": 1.15,
    "n_blocks": 5,
    # preprocessing
    "bandpass_lo_hz": 1.0,
    "bandpass_hi_hz": 100.0,
    "notch_hz": [50.0, 100.0],
    "epoch_pre_s": 0.5,
    "epoch_post_s": 2.0,
    "baseline_window_s": [-0.5, 0.0],
    "target_fs_hz": 256.0,
    "event_code": 1,
    "baseline_before_downsample": True,
    # evaluation
    "folds": 10,
    "repeats": 10,
    "shrinkage": 0.01,
    "reg_c": 1.0,
    "clf_tol": 1e-6,
    "clf_max_iter": 500,
    "mean_tol": 1e-8,
    "mean_max_iter": 200,
    "riemann_window_s": [0.1, 0.6],
    "benchmark_windows_s": [[0.1, 0.2], [0.2, 0.3], [0.3, 0.4], [0.4, 0.6]],
    "n_chance_shuffles": 100,
    "n_permutations": 1000,
}


def load_config(path: str | Path | None = None, overrides: list[str] | None = None) -> dict:
    """Defaults, optionally updated from a JSON file and ``key=value`` overrides."""
    cfg = dict(DEFAULTS)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        for key, value in loaded.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config field {key!r} in {path}")
            cfg[key] = value
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config field {key!r} in --set")
        try:
            cfg[key] = json.loads(raw)
        except json.JSONDecodeError:
            cfg[key] = raw
    return cfg
