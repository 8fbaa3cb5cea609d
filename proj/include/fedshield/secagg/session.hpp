// Copyright 2026 The FedShield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Honest-but-curious secure aggregation with double masking.
//
// Four phases. ADVERTISE: clients publish a public key. SHARE_KEYS: each
// client Shamir-shares its secret key and its self-mask secret among its
// graph neighbors and itself (holder x = client id + 1); the server only
// routes these shares. MASKED_INPUT: clients upload masked vectors.
// UNMASK: for every client that uploaded, holders reveal self-mask shares;
// for every client that shared keys but did not upload, holders reveal
// secret-key shares so the server can cancel its pairwise masks. The server
// never requests both kinds for one client.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fedshield/secagg/field.hpp"
#include "fedshield/secagg/keys.hpp"
#include "fedshield/secagg/shamir.hpp"
#include "fedshield/secagg/topology.hpp"

namespace fedshield::secagg {

enum class Phase { kAdvertise, kShareKeys, kMaskedInput, kUnmask, kDone, kFailed };

std::string phase_name(Phase phase);

struct SecAggConfig {
  FieldSpec field;
  std::size_t dimension = 0;
  std::size_t threshold = 1;
  CommGraph graph;
  bool self_masks = true;
  PrimeField share_field{PrimeField::kMersenne61};

  // Rejects threshold outside [1, min_degree + 1] and dimension 0.
  void validate() const;
};

struct AdvertiseKeys {
  ClientId sender = 0;
  PublicKey key;
};

// Shares addressed to one holder. In a deployment this payload is encrypted
// to the recipient; the server only forwards it.
struct RoutedShares {
  ClientId recipient = 0;
  std::optional<SecretShare> self_mask_share;
  SecretShare key_share;
};

struct ShareKeysMessage {
  ClientId sender = 0;
  std::vector<RoutedShares> shares;
};

struct MaskedInputMessage {
  ClientId sender = 0;
  QuantizedVector masked;
};

struct UnmaskRequest {
  std::vector<ClientId> survivors;  // uploaded a masked input
  std::vector<ClientId> dropped;    // shared keys, no masked input
};

struct UnmaskResponse {
  ClientId sender = 0;
  std::vector<SecretShare> shares;
};

struct RejectedEvent {
  Phase session_phase;
  std::string message_type;
  ClientId sender;
};

// JSON Lines debugging transcript: phase, sender, message type and payload
// digest. Payloads themselves are never stored.
class Transcript {
 public:
  struct Entry {
    Phase phase;
    ClientId sender;
    std::string message_type;
    std::string digest;
  };

  void record(Phase phase, ClientId sender, std::string message_type,
              std::span<const std::uint8_t> payload);
  const std::vector<Entry>& entries() const { return entries_; }
  void write_jsonl(std::ostream& out) const;

 private:
  std::vector<Entry> entries_;
};

class SecAggClient {
 public:
  SecAggClient(ClientId id, std::shared_ptr<const SecAggConfig> config,
               QuantizedVector input, std::uint64_t seed);

  ClientId id() const { return id_; }
  AdvertiseKeys advertise() const;
  // Returns nullopt when fewer than `threshold` holders are available.
  std::optional<ShareKeysMessage> share_keys(const std::vector<PublicKey>& roster);
  void receive_shares(ClientId from, const RoutedShares& shares);
  // `share_holders` is the set of clients whose shares were delivered (U2).
  MaskedInputMessage masked_input(const std::vector<ClientId>& share_holders);
  UnmaskResponse unmask(const UnmaskRequest& request) const;

 private:
  ClientId id_;
  std::shared_ptr<const SecAggConfig> config_;
  QuantizedVector input_;
  std::uint64_t seed_;
  KeyPair keys_;
  std::uint64_t self_secret_ = 0;
  std::map<ClientId, PublicKey> roster_;
  std::map<ClientId, RoutedShares> held_;  // shares of peers' secrets I hold
};

struct SecAggResult {
  Phase status = Phase::kFailed;
  std::optional<QuantizedVector> sum;
  std::vector<ClientId> input_survivors;
  std::string failure;
};

// Server-side session. Single owner; phases only move forward.
class SecAggServer {
 public:
  SecAggServer(std::shared_ptr<const SecAggConfig> config, std::int64_t round_index,
               Transcript* transcript = nullptr);

  Phase phase() const { return phase_; }
  std::int64_t round_index() const { return round_index_; }
  const std::vector<RejectedEvent>& rejected_events() const { return rejected_; }
  const std::string& failure() const { return failure_; }

  // Each accept() returns false (and logs a RejectedEvent) when the message
  // does not belong to the current phase or the sender is not eligible.
  bool accept(const AdvertiseKeys& msg);
  std::vector<PublicKey> close_advertise();

  bool accept(const ShareKeysMessage& msg);
  // Shares to deliver, keyed by recipient then sender.
  std::map<ClientId, std::map<ClientId, RoutedShares>> close_share_keys();
  std::vector<ClientId> share_holders() const;

  bool accept(MaskedInputMessage msg);
  UnmaskRequest close_masked_input();

  // Records which secret of `owner` is to be reconstructed. Asking for the
  // other kind afterwards throws BOTH_KINDS_REVEALED.
  void request_reveal(ClientId owner, SecretKind kind);

  bool accept(const UnmaskResponse& response);
  // Removes all masks and returns the sum of surviving inputs. Moves the
  // session to DONE or FAILED.
  SecAggResult unmask_and_sum();

 private:
  bool reject(const std::string& type, ClientId sender);
  void fail(std::string reason);

  std::shared_ptr<const SecAggConfig> config_;
  std::int64_t round_index_;
  Transcript* transcript_;
  Phase phase_ = Phase::kAdvertise;
  std::string failure_;
  std::vector<RejectedEvent> rejected_;

  std::map<ClientId, PublicKey> advertised_;                 // U1
  std::map<ClientId, ShareKeysMessage> share_messages_;      // U2
  std::map<ClientId, QuantizedVector> masked_;               // U3
  std::map<ClientId, SecretKind> reveal_kind_;
  std::set<ClientId> responders_;                            // U4
  std::map<ClientId, std::vector<SecretShare>> revealed_;    // by owner
};

// Client-side dropout schedule: a client listed with phase P takes part in
// every phase before P and is silent from P on.
using DropoutSchedule = std::map<ClientId, Phase>;

// Runs one full session in-process. inputs[i] belongs to client i.
SecAggResult run_secure_aggregation(std::shared_ptr<const SecAggConfig> config,
                                    const std::vector<QuantizedVector>& inputs,
                                    const DropoutSchedule& dropouts, std::uint64_t seed,
                                    std::int64_t round_index = 0,
                                    Transcript* transcript = nullptr);

}  // namespace fedshield::secagg
