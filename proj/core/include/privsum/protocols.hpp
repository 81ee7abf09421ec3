#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "privsum/keyplan.hpp"

namespace privsum {

// Whose combined ciphertext a decryption or key audit refers to.
struct GroupTarget {
  enum class Kind : std::uint8_t { kFullGroup, kTeam, kSubset };

  Kind kind = Kind::kFullGroup;
  std::uint32_t team = 0;                // kTeam
  std::vector<PartyIndex> subset;        // kSubset

  static GroupTarget full_group() { return {}; }
  static GroupTarget team_group(std::uint32_t team) {
    return {Kind::kTeam, team, {}};
  }
  static GroupTarget individual(PartyIndex member) {
    return {Kind::kSubset, 0, {member}};
  }
  static GroupTarget subset_of(std::vector<PartyIndex> members) {
    return {Kind::kSubset, 0, std::move(members)};
  }
};

std::vector<PartyIndex> target_members(const KeyPlan& plan,
                                       const GroupTarget& target);

// Encrypts member i's value under the plan's pad structure:
//   base   c = v + r_i
//   chain  c = v + r_{i-1} - r_i
//   graph  c = v + sum over neighbors of the signed edge pads
//   nested c = v + team-loop pads + global-chain pads
// The ring must hold every key the member's signature names.
Ciphertext encrypt_with_plan(const KeyPlan& plan, PartyIndex member,
                             std::uint64_t v, const KeyRing& ring,
                             const Nonce& nonce, const ModulusParams& params);

// Convenience wrappers for the two named schemes.
Ciphertext encrypt_chain(PartyIndex member, std::uint64_t v,
                         const KeyRing& ring, const Nonce& nonce,
                         const ModulusParams& params, std::uint32_t n);
Ciphertext encrypt_graph(const KeyPlan& plan, PartyIndex member,
                         std::uint64_t v, const KeyRing& ring,
                         const Nonce& nonce, const ModulusParams& params);

struct GroupSum {
  std::uint64_t value = 0;
  // Distinct pads evaluated per nonce: 2 for any chain group sum, s+1 for
  // a graph group sum, N for the base plan.
  std::size_t pads_per_nonce = 0;
  std::size_t pads_computed = 0;
};

// Decrypts a ciphertext that is the sum, over every member of `target`,
// of values encrypted at each listed nonce. Refuses (KeyError) when the
// ring provably lacks a required key. Weighted nonces are only valid for
// the base plan; any other plan's pad cancellation breaks under unequal
// weights (CancellationError).
GroupSum decrypt_group(Ciphertext total, const KeyRing& analyst_ring,
                       const KeyPlan& plan, std::span<const Nonce> nonces,
                       const ModulusParams& params,
                       const GroupTarget& target = GroupTarget::full_group());
GroupSum decrypt_group(Ciphertext total, const KeyRing& analyst_ring,
                       const KeyPlan& plan, std::span<const Nonce> nonces,
                       std::span<const std::uint64_t> nonce_weights,
                       const ModulusParams& params,
                       const GroupTarget& target = GroupTarget::full_group());

// Nested-plan entry points: team analysts may decrypt exactly their own
// full-team sums, the org analyst exactly the full-organization sum.
GroupSum decrypt_team_sum(Ciphertext total, const KeyRing& team_ring,
                          const KeyPlan& plan, std::uint32_t team,
                          std::span<const Nonce> nonces,
                          const ModulusParams& params);
GroupSum decrypt_org_sum(Ciphertext total, const KeyRing& org_ring,
                         const KeyPlan& plan, std::span<const Nonce> nonces,
                         const ModulusParams& params);

// The exact keys whose pads appear uncancelled in the combined ciphertext
// of the target; holding all of them is necessary and sufficient to strip
// the pads.
std::set<KeyId> required_keys(const KeyPlan& plan, const GroupTarget& target);

struct CollusionFinding {
  PartyIndex target = 0;
  bool decryptable = false;
  std::vector<KeyId> missing;  // keys the coalition lacks (empty if decryptable)
};

struct CollusionReport {
  std::vector<PartyIndex> coalition;
  std::vector<CollusionFinding> findings;  // one per non-coalition member

  std::vector<PartyIndex> decryptable_members() const;
};

// For every member outside the coalition, reports whether the coalition's
// pooled entitlement covers the keys required to strip that member's pads.
CollusionReport collusion_audit(const KeyPlan& plan,
                                const std::set<PartyIndex>& coalition);

struct Stats {
  double average = 0;
  double variance = 0;
};

// Average from a decrypted sum, and the Boolean-series shortcut
// V = A - A^2 for the variance.
Stats statistics(std::uint64_t sum, std::uint64_t count);

}  // namespace privsum
