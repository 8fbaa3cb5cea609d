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

"""Smoke tests for the Python surface."""

import math
import os
import random

import pytest

import fedshield

CORPUS = os.environ.get("FEDSHIELD_CORPUS", fedshield.default_corpus_path())


def small_config(tmp_path, extra=""):
    text = f"""
data.corpus = {CORPUS}
data.users = 30
model.vocab_size = 20
model.embed_dim = 4
train.rounds = 3
federation.report_goal = 8
federation.min_aggregation = 4
federation.min_separation = 2
telemetry.record_wall_time = false
output.dir = {tmp_path}
""" + extra
    return fedshield.parse_config(text)


def test_shamir_round_trip():
    shares = fedshield.shamir_share(123456789, n=7, threshold=4, seed=5)
    assert len(shares) == 7
    assert fedshield.shamir_reconstruct(shares[3:], 4) == 123456789
    with pytest.raises(fedshield.FedshieldError, match="INSUFFICIENT_SHARES"):
        fedshield.shamir_reconstruct(shares[:3], 4)


def test_expand_mask_range_and_determinism():
    seed = bytes(range(16))
    a = fedshield.expand_mask(seed, 50, 12)
    assert a == fedshield.expand_mask(seed, 50, 12)
    assert all(0 <= x < 4096 for x in a)


def test_secure_sum_matches_plaintext_with_dropout():
    rng = random.Random(3)
    inputs = [[rng.randrange(1 << 16) for _ in range(5)] for _ in range(6)]
    r = fedshield.secure_sum(inputs, bits=16, threshold=3, dropouts={2: "MASKED_INPUT"}, seed=9)
    assert r["status"] == "DONE"
    assert r["survivors"] == [0, 1, 3, 4, 5]
    expected = [sum(inputs[i][j] for i in r["survivors"]) % (1 << 16) for j in range(5)]
    assert r["sum"] == expected


def test_quantize_dequantize_round_trip():
    v = [0.25, -0.5, 0.0, 0.125]
    q = fedshield.quantize(v, clip_norm=1.0, scale=8, bits=16, seed=1)
    assert fedshield.dequantize_sum(q, 1, clip_norm=1.0, scale=8, bits=16) == v


def test_accounting_functions():
    assert fedshield.account_zcdp(1.0, 2.0, 8, 1) == 0.5
    assert fedshield.zcdp_to_eps(0.25, 1e-10) == pytest.approx(5.048, abs=1e-3)
    assert fedshield.tree_height(8) == 4


def test_config_errors_carry_code():
    with pytest.raises(fedshield.FedshieldError, match="CONFIG"):
        fedshield.parse_config("model.depth = 3\n")


def test_experiment_and_dry_run_ledger_agree(tmp_path):
    cfg = small_config(tmp_path, "mode = DP_ONLY\ndp.noise_multiplier = 1.0\n")
    dry = fedshield.account(cfg)
    result = fedshield.run_experiment(cfg)
    assert result["ledger"] == dry
    assert result["completed_rounds"] == 3
    assert len(result["metrics"]) == 3
    assert result["checkpoint"] is not None and os.path.exists(result["checkpoint"])
    assert all(math.isfinite(r["mean_log_loss"]) for r in result["metrics"])


def test_compare_with_itself_is_zero(tmp_path):
    cfg = small_config(tmp_path, "mode = BASELINE\n")
    report = fedshield.compare(cfg, cfg, str(tmp_path / "cmp"))
    assert report["final_accuracy_delta"] == 0.0
