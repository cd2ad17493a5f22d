# SPDX-FileCopyrightText: Copyright (c) 2026 molflow contributors. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""Multi-modal flow matching and preference fine-tuning for small point-cloud molecules."""

from ._molflow import (
    Model,
    TimeGrid,
    __version__,
    chamfer,
    corrupt_types,
    corruption_dist,
    dpo_distance_term,
    dpo_type_term,
    generate_dataset,
    interpolate_positions,
    jsd,
    load_dataset,
    load_metrics,
    marginal_type_dist,
    pos_loss,
    posterior,
    run_cli,
    sample_train_times,
    synthetic_reward,
    type_loss,
)

__all__ = [
    "Model",
    "TimeGrid",
    "__version__",
    "chamfer",
    "corrupt_types",
    "corruption_dist",
    "dpo_distance_term",
    "dpo_type_term",
    "generate_dataset",
    "interpolate_positions",
    "jsd",
    "load_dataset",
    "load_metrics",
    "marginal_type_dist",
    "pos_loss",
    "posterior",
    "run_cli",
    "sample_train_times",
    "synthetic_reward",
    "type_loss",
]
