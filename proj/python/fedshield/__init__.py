# Copyright 2026 The FedShield Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Private federated next-word prediction simulator.

Thin Python surface over the native core: configs, experiments, privacy
accounting, and the secure aggregation / discrete noise primitives.
"""

from fedshield._core import (
    ExperimentConfig,
    FedshieldError,
    account,
    account_zcdp,
    compare,
    default_corpus_path,
    dequantize_sum,
    expand_mask,
    load_config,
    max_participations,
    parse_config,
    quantize,
    run_experiment,
    secure_sum,
    shamir_reconstruct,
    shamir_share,
    tree_height,
    zcdp_to_eps,
)

__all__ = [
    "ExperimentConfig",
    "FedshieldError",
    "account",
    "account_zcdp",
    "compare",
    "default_corpus_path",
    "dequantize_sum",
    "expand_mask",
    "load_config",
    "max_participations",
    "parse_config",
    "quantize",
    "run_experiment",
    "secure_sum",
    "shamir_reconstruct",
    "shamir_share",
    "tree_height",
    "zcdp_to_eps",
]
