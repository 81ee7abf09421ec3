#include "privsum/protocols.hpp"

#include <algorithm>

#include "privsum/errors.hpp"

namespace privsum {

std::vector<PartyIndex> target_members(const KeyPlan& plan,
                                       const GroupTarget& target) {
  switch (target.kind) {
    case GroupTarget::Kind::kFullGroup:
      return plan.members();
    case GroupTarget::Kind::kTeam:
      return plan.team_members(target.team);
    case GroupTarget::Kind::kSubset: {
      for (PartyIndex m : target.subset)
        if (m < 1 || m > plan.team_size())
          throw ValidationError("target member out of range");
      return target.subset;
    }
  }
  throw ValidationError("bad group target");
}

Ciphertext encrypt_with_plan(const KeyPlan& plan, PartyIndex member,
                             std::uint64_t v, const KeyRing& ring,
                             const Nonce& nonce, const ModulusParams& params) {
  if (v != params.reduce(v)) throw ValidationError("plaintext out of range");
  std::uint64_t c = v;
  for (const PadTerm& term : plan.member_signature(member)) {
    const std::uint64_t r = pad(ring.at(term.key), nonce, params).value;
    c = term.coefficient > 0 ? params.add(c, r) : params.sub(c, r);
  }
  return Ciphertext{c};
}

Ciphertext encrypt_chain(PartyIndex member, std::uint64_t v,
                         const KeyRing& ring, const Nonce& nonce,
                         const ModulusParams& params, std::uint32_t n) {
  if (member < 1 || member > n)
    throw ValidationError("chain member index out of range");
  const std::uint64_t r_prev =
      pad(ring.at(KeyId::chain(member - 1)), nonce, params).value;
  const std::uint64_t r_own =
      pad(ring.at(KeyId::chain(member)), nonce, params).value;
  return Ciphertext{
      params.sub(params.add(params.reduce(v), r_prev), r_own)};
}

Ciphertext encrypt_graph(const KeyPlan& plan, PartyIndex member,
                         std::uint64_t v, const KeyRing& ring,
                         const Nonce& nonce, const ModulusParams& params) {
  if (plan.kind() != PlanKind::kGraph)
    throw ValidationError("encrypt_graph requires a graph plan");
  return encrypt_with_plan(plan, member, v, ring, nonce, params);
}

namespace {

GroupSum decrypt_with_net(Ciphertext total, const KeyRing& ring,
                          const std::map<KeyId, int>& net,
                          std::span<const Nonce> nonces,
                          std::span<const std::uint64_t> weights,
                          const ModulusParams& params) {
  for (const auto& [key, coef] : net)
    if (!ring.holds(key))
      throw KeyError("ring of party " + std::to_string(ring.owner) +
                     " cannot decrypt this sum: missing key " + key.str());

  GroupSum out;
  out.pads_per_nonce = net.size();
  std::uint64_t v = total.value;
  for (std::size_t i = 0; i < nonces.size(); ++i) {
    const std::uint64_t w = weights.empty() ? 1 : weights[i];
    for (const auto& [key, coef] : net) {
      const std::uint64_t r =
          params.mul(pad(ring.at(key), nonces[i], params).value, w);
      v = coef > 0 ? params.sub(v, r) : params.add(v, r);
      ++out.pads_computed;
    }
  }
  out.value = v;
  return out;
}

}  // namespace

GroupSum decrypt_group(Ciphertext total, const KeyRing& analyst_ring,
                       const KeyPlan& plan, std::span<const Nonce> nonces,
                       std::span<const std::uint64_t> nonce_weights,
                       const ModulusParams& params,
                       const GroupTarget& target) {
  if (!nonce_weights.empty()) {
    if (nonce_weights.size() != nonces.size())
      throw ValidationError("nonce/weight length mismatch");
    const bool weighted = std::any_of(nonce_weights.begin(),
                                      nonce_weights.end(),
                                      [](std::uint64_t w) { return w != 1; });
    if (weighted && plan.kind() != PlanKind::kBase)
      throw CancellationError(
          "weighted sums are only supported under the base plan; unequal "
          "weights break pad cancellation");
  }
  const auto members = target_members(plan, target);
  const auto net = plan.net_signature(members);
  return decrypt_with_net(total, analyst_ring, net, nonces, nonce_weights,
                          params);
}

GroupSum decrypt_group(Ciphertext total, const KeyRing& analyst_ring,
                       const KeyPlan& plan, std::span<const Nonce> nonces,
                       const ModulusParams& params,
                       const GroupTarget& target) {
  return decrypt_group(total, analyst_ring, plan, nonces, {}, params, target);
}

GroupSum decrypt_team_sum(Ciphertext total, const KeyRing& team_ring,
                          const KeyPlan& plan, std::uint32_t team,
                          std::span<const Nonce> nonces,
                          const ModulusParams& params) {
  if (plan.kind() != PlanKind::kNested)
    throw ValidationError("team sums only exist under nested plans");
  return decrypt_group(total, team_ring, plan, nonces, params,
                       GroupTarget::team_group(team));
}

GroupSum decrypt_org_sum(Ciphertext total, const KeyRing& org_ring,
                         const KeyPlan& plan, std::span<const Nonce> nonces,
                         const ModulusParams& params) {
  if (plan.kind() != PlanKind::kNested)
    throw ValidationError("org sums only exist under nested plans");
  return decrypt_group(total, org_ring, plan, nonces, params,
                       GroupTarget::full_group());
}

std::set<KeyId> required_keys(const KeyPlan& plan, const GroupTarget& target) {
  std::set<KeyId> keys;
  for (const auto& [key, coef] :
       plan.net_signature(target_members(plan, target)))
    keys.insert(key);
  return keys;
}

std::vector<PartyIndex> CollusionReport::decryptable_members() const {
  std::vector<PartyIndex> out;
  for (const CollusionFinding& f : findings)
    if (f.decryptable) out.push_back(f.target);
  return out;
}

CollusionReport collusion_audit(const KeyPlan& plan,
                                const std::set<PartyIndex>& coalition) {
  const auto parties = plan.parties();
  for (PartyIndex p : coalition)
    if (std::find(parties.begin(), parties.end(), p) == parties.end())
      throw ValidationError("coalition party " + std::to_string(p) +
                            " is not in the plan");

  std::set<KeyId> pooled;
  for (PartyIndex p : coalition)
    for (const KeyId& id : plan.entitlement(p)) pooled.insert(id);

  CollusionReport report;
  report.coalition.assign(coalition.begin(), coalition.end());
  for (PartyIndex member : plan.members()) {
    if (coalition.count(member)) continue;
    CollusionFinding finding;
    finding.target = member;
    finding.decryptable = true;
    for (const KeyId& key :
         required_keys(plan, GroupTarget::individual(member))) {
      if (!pooled.count(key)) {
        finding.decryptable = false;
        finding.missing.push_back(key);
      }
    }
    report.findings.push_back(std::move(finding));
  }
  return report;
}

Stats statistics(std::uint64_t sum, std::uint64_t count) {
  if (count == 0) throw ValidationError("statistics require count >= 1");
  Stats s;
  s.average = static_cast<double>(sum) / static_cast<double>(count);
  s.variance = s.average - s.average * s.average;
  return s;
}

}  // namespace privsum
