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
"""Regenerates tests/data/golden_masks.json from independent implementations.

ChaCha20 comes from the `cryptography` package, BLAKE2b from hashlib and the
key agreement is plain Python integer arithmetic.
"""

import hashlib
import json
import pathlib
import struct

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

P = (1 << 61) - 1
G = 37


def seed_from_u64(low, high=0):
    return struct.pack("<QQ", low, high)


def hash128(label, data):
    return hashlib.blake2b(label.encode() + b"\0" + data, digest_size=16).digest()


def expand(seed, dim, bits):
    nonce = struct.pack("<I", 0) + bytes(12)  # counter || 96-bit nonce
    enc = Cipher(algorithms.ChaCha20(seed + seed, nonce), mode=None).encryptor()
    stream = enc.update(bytes(4 * dim))
    mask = (1 << bits) - 1
    return [struct.unpack_from("<I", stream, 4 * i)[0] & mask for i in range(dim)]


def keygen(cid, seed):
    h = hash128("fedshield/keygen", struct.pack("<QI", seed, cid))
    sk = 1 + struct.unpack_from("<Q", h)[0] % (P - 2)
    return sk, pow(G, sk, P)


def pairwise(a, b, seed):
    ska, _ = keygen(a, seed)
    _, pkb = keygen(b, seed)
    shared = pow(pkb, ska, P)
    lo, hi = min(a, b), max(a, b)
    return hash128("fedshield/pairwise", struct.pack("<QII", shared, lo, hi))


def main():
    out = {
        "expand_mask": [
            {"seed_low": 1, "seed_high": 0, "bits": 16, "values": expand(seed_from_u64(1), 4, 16)},
            {"seed_low": 1, "seed_high": 0, "bits": 32, "values": expand(seed_from_u64(1), 8, 32)},
            {"seed_low": 0x0123456789ABCDEF, "seed_high": 42, "bits": 16,
             "values": expand(seed_from_u64(0x0123456789ABCDEF, 42), 20, 16)},
            {"seed_low": 7, "seed_high": 7, "bits": 8, "values": expand(seed_from_u64(7, 7), 40, 8)},
        ],
        "hash128": [
            {"label": "fedshield/test", "data_hex": "000102", "digest": hash128("fedshield/test", bytes([0, 1, 2])).hex()},
        ],
        "keygen": [
            {"client": c, "seed": 99, "secret_key": keygen(c, 99)[0], "public_key": keygen(c, 99)[1]}
            for c in (0, 1, 5)
        ],
        "pairwise": [
            {"a": 1, "b": 5, "seed": 99, "digest": pairwise(1, 5, 99).hex()},
        ],
    }
    path = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "golden_masks.json"
    path.write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main()
