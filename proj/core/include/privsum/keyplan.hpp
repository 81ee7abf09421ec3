#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "privsum/crypto.hpp"

namespace privsum {

// 0 is the manager/analyst; 1..N are team members. Nested plans add team
// analysts above N (see KeyPlan::team_analyst).
using PartyIndex = std::uint32_t;

enum class PlanKind : std::uint8_t { kBase, kChain, kGraph, kNested };

std::string_view plan_kind_name(PlanKind kind);
PlanKind plan_kind_from_name(std::string_view name);

// Identifier of one logical key within a plan. Textual forms:
//   member:i    base plan, member i's own key
//   chain:i     chain key k_i
//   edge:i:j    graph edge key k_ij, i > j
//   loop:t:j    nested, team t's closed-loop key j
//   global:p    nested, global chain key p
struct KeyId {
  enum class Kind : std::uint8_t {
    kMember = 0,
    kChain = 1,
    kEdge = 2,
    kTeamLoop = 3,
    kGlobalChain = 4,
  };

  Kind kind = Kind::kMember;
  std::uint32_t a = 0;
  std::uint32_t b = 0;

  static KeyId member(std::uint32_t i) { return {Kind::kMember, i, 0}; }
  static KeyId chain(std::uint32_t i) { return {Kind::kChain, i, 0}; }
  static KeyId edge(std::uint32_t i, std::uint32_t j);  // normalizes i > j
  static KeyId team_loop(std::uint32_t team, std::uint32_t j) {
    return {Kind::kTeamLoop, team, j};
  }
  static KeyId global_chain(std::uint32_t p) {
    return {Kind::kGlobalChain, p, 0};
  }

  std::string str() const;
  static KeyId parse(std::string_view text);

  auto operator<=>(const KeyId&) const = default;
};

// A signed pad term: coefficient is +1 (pad added) or -1 (pad
// subtracted) in a member's encryption formula.
struct PadTerm {
  KeyId key;
  int coefficient = 1;
};

// Structure of a key arrangement: who is entitled to which keys and how
// pads enter each member's ciphertext. Carries no key material.
class KeyPlan {
 public:
  PlanKind kind() const { return kind_; }
  std::uint32_t team_size() const { return n_; }  // N (leaf count if nested)
  std::uint32_t collusion_parameter() const { return s_; }
  const std::vector<std::uint32_t>& team_sizes() const { return team_sizes_; }

  // Encrypting parties: members 1..N.
  std::vector<PartyIndex> members() const;
  // All parties with a ring, including analysts.
  std::vector<PartyIndex> parties() const;
  std::uint32_t team_count() const {
    return static_cast<std::uint32_t>(team_sizes_.size());
  }
  // Party index of team t's analyst (nested plans only; teams 0-based).
  PartyIndex team_analyst(std::uint32_t team) const;
  // Members (leaf parties) of team t, in global order.
  std::vector<PartyIndex> team_members(std::uint32_t team) const;
  // Team of a leaf party (nested plans only).
  std::uint32_t team_of(PartyIndex member) const;

  // Graph plan: unordered neighbor pairs (i, j) with i > j.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;
  // Graph plan: neighbors of node v in the circulant topology.
  std::vector<std::uint32_t> neighbors(std::uint32_t v) const;
  // Sign applied by member i to the pad of edge (i, j): +1 when j is a
  // cyclic predecessor of i, -1 when a successor. The two endpoints of
  // every edge apply opposite signs.
  int edge_sign(std::uint32_t i, std::uint32_t j) const;

  // Exact key entitlement of a party under this plan.
  const std::vector<KeyId>& entitlement(PartyIndex party) const;
  const std::map<PartyIndex, std::vector<KeyId>>& entitlements() const {
    return entitlements_;
  }

  // The signed pads member i applies when encrypting.
  std::vector<PadTerm> member_signature(PartyIndex member) const;
  // Net pad coefficients in the combined ciphertext of a subset of
  // members; keys whose pads cancel are absent.
  std::map<KeyId, int> net_signature(std::span<const PartyIndex> members) const;

  std::string to_json() const;
  static KeyPlan from_json(std::string_view json_text);

  friend struct PlanBuilder;

 private:
  std::vector<std::uint32_t> neighbors_of(std::uint32_t v) const;

  PlanKind kind_ = PlanKind::kBase;
  std::uint32_t n_ = 0;
  std::uint32_t s_ = 0;
  std::vector<std::uint32_t> team_sizes_;
  std::map<PartyIndex, std::vector<KeyId>> entitlements_;
};

// Key material held by one party. Rings are immutable after planning;
// no party ever holds keys outside its plan entitlement.
struct KeyRing {
  PartyIndex owner = 0;
  std::map<KeyId, SecretKey> keys;

  bool holds(const KeyId& id) const { return keys.count(id) != 0; }
  const SecretKey& at(const KeyId& id) const;

  std::string to_json() const;
  static KeyRing from_json(std::string_view json_text);
};

struct PlannedKeys {
  KeyPlan plan;
  std::vector<KeyRing> rings;  // indexed by party

  const KeyRing& ring(PartyIndex party) const;
};

// One independent key per member; the analyst (party 0) optionally holds
// all of them (the full-trust model).
PlannedKeys plan_base(std::uint32_t n, bool analyst_holds_all = true,
                      unsigned security_bits = 128);

// Cycle of N+1 keys k_0..k_N; member i holds {k_{i-1}, k_i}, the manager
// holds {k_0, k_N}. N = 1 is rejected: the manager's entitlement would
// equal the lone member's, exposing the individual value.
PlannedKeys plan_chain(std::uint32_t n, unsigned security_bits = 128);

// Circulant graph on nodes 0..N where i is adjacent to i +- 1..(s+1)/2
// (mod N+1); s odd, N+1 > s+1. Edge key k_ij is generated by party i and
// held by exactly {i, j}.
PlannedKeys plan_graph(std::uint32_t n, std::uint32_t s,
                       unsigned security_bits = 128);

// Two pad layers per leaf: a closed loop inside each team plus one global
// chain across all leaves. Team analysts hold their team's two global
// boundary keys; the org analyst holds the two global endpoints.
PlannedKeys plan_nested(std::span<const std::uint32_t> team_sizes,
                        unsigned security_bits = 128);

// plan.json + ring_<party>.json files under dir.
void save_plan_dir(const std::filesystem::path& dir, const PlannedKeys& pk);
KeyPlan load_plan(const std::filesystem::path& plan_file);
KeyRing load_ring(const std::filesystem::path& ring_file);

}  // namespace privsum
