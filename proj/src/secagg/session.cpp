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

#include "fedshield/secagg/session.hpp"

#include <algorithm>
#include <string>

#include "fedshield/error.hpp"
#include "fedshield/secagg/masking.hpp"
#include "fedshield/seeds.hpp"
#include <nlohmann/json.hpp>

namespace fedshield::secagg {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_share(std::vector<std::uint8_t>& out, const SecretShare& s) {
  put_u32(out, s.holder);
  put_u64(out, s.value);
  put_u32(out, s.owner);
  out.push_back(s.kind == SecretKind::kSelfMaskSeed ? 0 : 1);
}

std::vector<std::uint8_t> serialize(const AdvertiseKeys& m) {
  std::vector<std::uint8_t> out;
  put_u32(out, m.sender);
  put_u64(out, m.key.value);
  return out;
}

std::vector<std::uint8_t> serialize(const ShareKeysMessage& m) {
  std::vector<std::uint8_t> out;
  put_u32(out, m.sender);
  for (const auto& r : m.shares) {
    put_u32(out, r.recipient);
    if (r.self_mask_share) put_share(out, *r.self_mask_share);
    put_share(out, r.key_share);
  }
  return out;
}

std::vector<std::uint8_t> serialize(const MaskedInputMessage& m) {
  std::vector<std::uint8_t> out;
  put_u32(out, m.sender);
  for (auto v : m.masked.values) put_u32(out, v);
  return out;
}

std::vector<std::uint8_t> serialize(const UnmaskResponse& m) {
  std::vector<std::uint8_t> out;
  put_u32(out, m.sender);
  for (const auto& s : m.shares) put_share(out, s);
  return out;
}

template <typename Map>
bool contains(const Map& m, ClientId id) {
  return m.find(id) != m.end();
}

}  // namespace

std::string phase_name(Phase phase) {
  switch (phase) {
    case Phase::kAdvertise: return "ADVERTISE";
    case Phase::kShareKeys: return "SHARE_KEYS";
    case Phase::kMaskedInput: return "MASKED_INPUT";
    case Phase::kUnmask: return "UNMASK";
    case Phase::kDone: return "DONE";
    case Phase::kFailed: return "FAILED";
  }
  return "UNKNOWN";
}

void SecAggConfig::validate() const {
  if (dimension == 0) throw Error(ErrorCode::kInvalidArgument, "secagg dimension must be >= 1");
  if (graph.size() < 1) throw Error(ErrorCode::kInvalidArgument, "secagg graph is empty");
  if (threshold < 1 || threshold > graph.min_degree() + 1)
    throw Error(ErrorCode::kInvalidArgument,
                "threshold " + std::to_string(threshold) + " must be in [1, min_degree + 1]");
  if (graph.size() >= share_field.modulus())
    throw Error(ErrorCode::kInvalidArgument, "too many clients for the share field");
}

void Transcript::record(Phase phase, ClientId sender, std::string message_type,
                        std::span<const std::uint8_t> payload) {
  entries_.push_back(Entry{phase, sender, std::move(message_type), payload_digest(payload)});
}

void Transcript::write_jsonl(std::ostream& out) const {
  for (const auto& e : entries_) {
    nlohmann::json j;
    j["phase"] = phase_name(e.phase);
    j["sender"] = e.sender;
    j["message_type"] = e.message_type;
    j["payload_digest"] = e.digest;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Client

SecAggClient::SecAggClient(ClientId id, std::shared_ptr<const SecAggConfig> config,
                           QuantizedVector input, std::uint64_t seed)
    : id_(id), config_(std::move(config)), input_(std::move(input)), seed_(seed) {
  if (input_.size() != config_->dimension || input_.field != config_->field)
    throw Error(ErrorCode::kInvalidArgument, "client input does not match session field/dimension");
  keys_ = keygen(id_, seed_);
  self_secret_ = self_mask_secret(id_, seed_);
}

AdvertiseKeys SecAggClient::advertise() const { return AdvertiseKeys{id_, keys_.public_part()}; }

std::optional<ShareKeysMessage> SecAggClient::share_keys(const std::vector<PublicKey>& roster) {
  roster_.clear();
  for (const auto& pk : roster) roster_[pk.client_id] = pk;
  std::vector<std::uint32_t> xs;
  std::vector<ClientId> holders;
  for (ClientId j : config_->graph.neighbors(id_))
    if (contains(roster_, j)) holders.push_back(j);
  holders.push_back(id_);
  std::sort(holders.begin(), holders.end());
  if (holders.size() < config_->threshold) return std::nullopt;
  for (ClientId h : holders) xs.push_back(h + 1);

  const auto& field = config_->share_field;
  auto key_shares = shamir_share_at(keys_.secret_key, xs, config_->threshold,
                                    child_seed(seed_, "secagg/share-key", id_), field);
  std::vector<SecretShare> self_shares;
  if (config_->self_masks)
    self_shares = shamir_share_at(self_secret_, xs, config_->threshold,
                                  child_seed(seed_, "secagg/share-self", id_), field);
  ShareKeysMessage msg{id_, {}};
  for (std::size_t h = 0; h < holders.size(); ++h) {
    RoutedShares r;
    r.recipient = holders[h];
    r.key_share = key_shares[h];
    r.key_share.owner = id_;
    r.key_share.kind = SecretKind::kPairwiseKey;
    if (config_->self_masks) {
      r.self_mask_share = self_shares[h];
      r.self_mask_share->owner = id_;
      r.self_mask_share->kind = SecretKind::kSelfMaskSeed;
    }
    msg.shares.push_back(r);
  }
  return msg;
}

void SecAggClient::receive_shares(ClientId from, const RoutedShares& shares) {
  if (shares.recipient != id_) throw Error(ErrorCode::kInvalidArgument, "share routed to wrong client");
  held_[from] = shares;
}

MaskedInputMessage SecAggClient::masked_input(const std::vector<ClientId>& share_holders) {
  std::vector<ClientId> active;
  std::map<ClientId, PairwiseSecret> secrets;
  for (ClientId j : config_->graph.neighbors(id_)) {
    if (!std::binary_search(share_holders.begin(), share_holders.end(), j)) continue;
    auto it = roster_.find(j);
    if (it == roster_.end()) throw Error(ErrorCode::kMissingSecret, "neighbor missing from roster");
    active.push_back(j);
    secrets[j] = derive_pairwise(keys_, it->second);
  }
  std::optional<Seed128> self_mask;
  if (config_->self_masks) self_mask = self_mask_seed(self_secret_);
  return MaskedInputMessage{id_, mask_update(id_, input_, self_mask, secrets, active)};
}

UnmaskResponse SecAggClient::unmask(const UnmaskRequest& request) const {
  std::set<ClientId> survivors(request.survivors.begin(), request.survivors.end());
  for (ClientId d : request.dropped)
    if (survivors.count(d))
      throw Error(ErrorCode::kBothKindsRevealed,
                  "client " + std::to_string(d) + " listed as both survivor and dropped");
  UnmaskResponse response{id_, {}};
  for (ClientId s : request.survivors) {
    auto it = held_.find(s);
    if (it != held_.end() && it->second.self_mask_share)
      response.shares.push_back(*it->second.self_mask_share);
  }
  for (ClientId d : request.dropped) {
    auto it = held_.find(d);
    if (it != held_.end()) response.shares.push_back(it->second.key_share);
  }
  return response;
}

// ---------------------------------------------------------------------------
// Server

SecAggServer::SecAggServer(std::shared_ptr<const SecAggConfig> config,
                           std::int64_t round_index, Transcript* transcript)
    : config_(std::move(config)), round_index_(round_index), transcript_(transcript) {
  config_->validate();
}

bool SecAggServer::reject(const std::string& type, ClientId sender) {
  rejected_.push_back(RejectedEvent{phase_, type, sender});
  return false;
}

void SecAggServer::fail(std::string reason) {
  phase_ = Phase::kFailed;
  failure_ = std::move(reason);
}

bool SecAggServer::accept(const AdvertiseKeys& msg) {
  if (phase_ != Phase::kAdvertise || msg.sender >= config_->graph.size() ||
      msg.key.client_id != msg.sender || contains(advertised_, msg.sender))
    return reject("advertise_keys", msg.sender);
  advertised_[msg.sender] = msg.key;
  if (transcript_) transcript_->record(phase_, msg.sender, "advertise_keys", serialize(msg));
  return true;
}

std::vector<PublicKey> SecAggServer::close_advertise() {
  if (phase_ != Phase::kAdvertise) throw Error(ErrorCode::kInvalidArgument, "not in ADVERTISE");
  if (advertised_.size() < config_->threshold) {
    fail("INSUFFICIENT_SHARES: fewer than t clients advertised keys");
    return {};
  }
  phase_ = Phase::kShareKeys;
  std::vector<PublicKey> roster;
  for (const auto& [id, pk] : advertised_) roster.push_back(pk);
  return roster;
}

bool SecAggServer::accept(const ShareKeysMessage& msg) {
  if (phase_ != Phase::kShareKeys || !contains(advertised_, msg.sender) ||
      contains(share_messages_, msg.sender))
    return reject("share_keys", msg.sender);
  for (const auto& r : msg.shares) {
    const bool holder_ok = r.recipient == msg.sender ||
                           (contains(advertised_, r.recipient) &&
                            config_->graph.has_edge(msg.sender, r.recipient));
    if (!holder_ok) return reject("share_keys", msg.sender);
  }
  share_messages_[msg.sender] = msg;
  if (transcript_) transcript_->record(phase_, msg.sender, "share_keys", serialize(msg));
  return true;
}

std::map<ClientId, std::map<ClientId, RoutedShares>> SecAggServer::close_share_keys() {
  if (phase_ != Phase::kShareKeys) throw Error(ErrorCode::kInvalidArgument, "not in SHARE_KEYS");
  if (share_messages_.size() < config_->threshold) {
    fail("INSUFFICIENT_SHARES: fewer than t clients shared keys");
    return {};
  }
  std::map<ClientId, std::map<ClientId, RoutedShares>> routed;
  for (const auto& [sender, msg] : share_messages_)
    for (const auto& r : msg.shares)
      if (contains(share_messages_, r.recipient)) routed[r.recipient][sender] = r;
  phase_ = Phase::kMaskedInput;
  return routed;
}

std::vector<ClientId> SecAggServer::share_holders() const {
  std::vector<ClientId> out;
  for (const auto& [id, msg] : share_messages_) out.push_back(id);
  return out;
}

bool SecAggServer::accept(MaskedInputMessage msg) {
  if (phase_ != Phase::kMaskedInput || !contains(share_messages_, msg.sender) ||
      contains(masked_, msg.sender) || msg.masked.size() != config_->dimension ||
      msg.masked.field != config_->field)
    return reject("masked_input", msg.sender);
  if (transcript_) transcript_->record(phase_, msg.sender, "masked_input", serialize(msg));
  masked_.emplace(msg.sender, std::move(msg.masked));
  return true;
}

UnmaskRequest SecAggServer::close_masked_input() {
  if (phase_ != Phase::kMaskedInput) throw Error(ErrorCode::kInvalidArgument, "not in MASKED_INPUT");
  if (masked_.size() < config_->threshold) {
    fail("INSUFFICIENT_SHARES: fewer than t masked inputs");
    return {};
  }
  UnmaskRequest req;
  for (const auto& [id, msg] : share_messages_) {
    if (contains(masked_, id)) {
      req.survivors.push_back(id);
      if (config_->self_masks) request_reveal(id, SecretKind::kSelfMaskSeed);
    } else {
      req.dropped.push_back(id);
      request_reveal(id, SecretKind::kPairwiseKey);
    }
  }
  phase_ = Phase::kUnmask;
  return req;
}

void SecAggServer::request_reveal(ClientId owner, SecretKind kind) {
  auto [it, inserted] = reveal_kind_.emplace(owner, kind);
  if (!inserted && it->second != kind)
    throw Error(ErrorCode::kBothKindsRevealed,
                "both secret kinds requested for client " + std::to_string(owner));
}

bool SecAggServer::accept(const UnmaskResponse& response) {
  if (phase_ != Phase::kUnmask || !contains(masked_, response.sender) ||
      responders_.count(response.sender))
    return reject("unmask", response.sender);
  for (const auto& s : response.shares) {
    auto it = reveal_kind_.find(s.owner);
    if (it == reveal_kind_.end() || s.holder != response.sender + 1)
      return reject("unmask", response.sender);
    if (it->second != s.kind)
      throw Error(ErrorCode::kBothKindsRevealed,
                  "share of unrequested kind revealed for client " + std::to_string(s.owner));
  }
  responders_.insert(response.sender);
  for (const auto& s : response.shares) revealed_[s.owner].push_back(s);
  if (transcript_) transcript_->record(phase_, response.sender, "unmask", serialize(response));
  return true;
}

SecAggResult SecAggServer::unmask_and_sum() {
  SecAggResult result;
  for (const auto& [id, v] : masked_) result.input_survivors.push_back(id);
  auto failed = [&](std::string reason) {
    fail(std::move(reason));
    result.status = Phase::kFailed;
    result.failure = failure_;
    return result;
  };
  if (phase_ == Phase::kFailed) {
    result.failure = failure_;
    return result;
  }
  if (phase_ != Phase::kUnmask) throw Error(ErrorCode::kInvalidArgument, "not in UNMASK");
  if (responders_.size() < config_->threshold)
    return failed("INSUFFICIENT_SHARES: fewer than t unmask responses");

  const auto& field = config_->share_field;
  auto reconstruct = [&](ClientId owner) -> std::optional<std::uint64_t> {
    auto it = revealed_.find(owner);
    if (it == revealed_.end() || it->second.size() < config_->threshold) return std::nullopt;
    return shamir_reconstruct(it->second, config_->threshold, field);
  };

  QuantizedVector sum{config_->field, std::vector<std::uint32_t>(config_->dimension, 0)};
  for (const auto& [id, y] : masked_) sum.add_assign(y);

  for (const auto& [owner, kind] : reveal_kind_) {
    const auto secret = reconstruct(owner);
    if (!secret)
      return failed("INSUFFICIENT_SHARES: cannot reconstruct secret of client " +
                    std::to_string(owner));
    if (kind == SecretKind::kSelfMaskSeed) {
      sum.sub_assign(expand_mask(self_mask_seed(*secret), config_->dimension, config_->field));
      continue;
    }
    // Cancel the pairwise masks surviving neighbors added toward `owner`.
    for (ClientId i : config_->graph.neighbors(owner)) {
      if (!contains(masked_, i)) continue;
      const auto ps = derive_pairwise(owner, *secret, advertised_.at(i));
      const auto mask = expand_mask(ps.seed, config_->dimension, config_->field);
      if (i < owner) {
        sum.sub_assign(mask);
      } else {
        sum.add_assign(mask);
      }
    }
  }
  phase_ = Phase::kDone;
  result.status = Phase::kDone;
  result.sum = std::move(sum);
  return result;
}

SecAggResult run_secure_aggregation(std::shared_ptr<const SecAggConfig> config,
                                    const std::vector<QuantizedVector>& inputs,
                                    const DropoutSchedule& dropouts, std::uint64_t seed,
                                    std::int64_t round_index, Transcript* transcript) {
  const std::size_t n = config->graph.size();
  if (inputs.size() != n)
    throw Error(ErrorCode::kInvalidArgument, "need one input per graph node");
  SecAggServer server(config, round_index, transcript);
  std::vector<SecAggClient> clients;
  clients.reserve(n);
  for (ClientId i = 0; i < n; ++i) clients.emplace_back(i, config, inputs[i], seed);

  auto present = [&](ClientId i, Phase phase) {
    auto it = dropouts.find(i);
    return it == dropouts.end() || static_cast<int>(phase) < static_cast<int>(it->second);
  };
  auto finish = [&]() {
    SecAggResult r;
    r.status = server.phase();
    r.failure = server.failure();
    return r;
  };

  for (ClientId i = 0; i < n; ++i)
    if (present(i, Phase::kAdvertise)) server.accept(clients[i].advertise());
  const auto roster = server.close_advertise();
  if (server.phase() == Phase::kFailed) return finish();

  for (const auto& pk : roster) {
    if (!present(pk.client_id, Phase::kShareKeys)) continue;
    if (auto msg = clients[pk.client_id].share_keys(roster)) server.accept(*msg);
  }
  const auto routed = server.close_share_keys();
  if (server.phase() == Phase::kFailed) return finish();
  for (const auto& [recipient, by_sender] : routed)
    for (const auto& [sender, shares] : by_sender) clients[recipient].receive_shares(sender, shares);

  const auto holders = server.share_holders();
  for (ClientId i : holders)
    if (present(i, Phase::kMaskedInput)) server.accept(clients[i].masked_input(holders));
  const auto request = server.close_masked_input();
  if (server.phase() == Phase::kFailed) return finish();

  for (ClientId i : request.survivors)
    if (present(i, Phase::kUnmask)) server.accept(clients[i].unmask(request));
  return server.unmask_and_sum();
}

}  // namespace fedshield::secagg
