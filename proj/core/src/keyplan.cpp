#include "privsum/keyplan.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "privsum/errors.hpp"

namespace privsum {

using json = nlohmann::json;

std::string_view plan_kind_name(PlanKind kind) {
  switch (kind) {
    case PlanKind::kBase:
      return "base";
    case PlanKind::kChain:
      return "chain";
    case PlanKind::kGraph:
      return "graph";
    case PlanKind::kNested:
      return "nested";
  }
  throw ValidationError("bad plan kind");
}

PlanKind plan_kind_from_name(std::string_view name) {
  if (name == "base") return PlanKind::kBase;
  if (name == "chain") return PlanKind::kChain;
  if (name == "graph") return PlanKind::kGraph;
  if (name == "nested") return PlanKind::kNested;
  throw ValidationError("unknown plan kind: " + std::string(name));
}

KeyId KeyId::edge(std::uint32_t i, std::uint32_t j) {
  if (i == j) throw ValidationError("edge key endpoints must differ");
  if (i < j) std::swap(i, j);
  return {Kind::kEdge, i, j};
}

std::string KeyId::str() const {
  switch (kind) {
    case Kind::kMember:
      return "member:" + std::to_string(a);
    case Kind::kChain:
      return "chain:" + std::to_string(a);
    case Kind::kEdge:
      return "edge:" + std::to_string(a) + ":" + std::to_string(b);
    case Kind::kTeamLoop:
      return "loop:" + std::to_string(a) + ":" + std::to_string(b);
    case Kind::kGlobalChain:
      return "global:" + std::to_string(a);
  }
  throw ValidationError("bad key id kind");
}

KeyId KeyId::parse(std::string_view text) {
  std::string s(text);
  std::istringstream ss(s);
  std::string head;
  if (!std::getline(ss, head, ':'))
    throw ValidationError("bad key id: " + s);
  auto next_u32 = [&ss, &s]() {
    std::string part;
    if (!std::getline(ss, part, ':'))
      throw ValidationError("bad key id: " + s);
    return static_cast<std::uint32_t>(std::stoul(part));
  };
  if (head == "member") return member(next_u32());
  if (head == "chain") return chain(next_u32());
  if (head == "edge") {
    std::uint32_t i = next_u32();
    std::uint32_t j = next_u32();
    return edge(i, j);
  }
  if (head == "loop") {
    std::uint32_t t = next_u32();
    std::uint32_t j = next_u32();
    return team_loop(t, j);
  }
  if (head == "global") return global_chain(next_u32());
  throw ValidationError("bad key id: " + s);
}

const SecretKey& KeyRing::at(const KeyId& id) const {
  auto it = keys.find(id);
  if (it == keys.end())
    throw KeyError("ring of party " + std::to_string(owner) +
                   " is missing key " + id.str());
  return it->second;
}

const KeyRing& PlannedKeys::ring(PartyIndex party) const {
  for (const KeyRing& r : rings)
    if (r.owner == party) return r;
  throw KeyError("no ring for party " + std::to_string(party));
}

// ---------------------------------------------------------------------------
// Plan construction

struct PlanBuilder {
  static KeyPlan build(PlanKind kind, std::uint32_t n, std::uint32_t s,
                       std::vector<std::uint32_t> team_sizes) {
    KeyPlan plan;
    plan.kind_ = kind;
    plan.s_ = s;
    plan.team_sizes_ = std::move(team_sizes);

    switch (kind) {
      case PlanKind::kBase: {
        if (n < 1) throw ValidationError("base plan requires N >= 1");
        plan.n_ = n;
        std::vector<KeyId> analyst;
        for (std::uint32_t i = 1; i <= n; ++i) {
          plan.entitlements_[i] = {KeyId::member(i)};
          analyst.push_back(KeyId::member(i));
        }
        plan.entitlements_[0] = std::move(analyst);
        break;
      }
      case PlanKind::kChain: {
        if (n < 2)
          throw ValidationError(
              "chain plan requires N >= 2: with N = 1 the manager's keys "
              "equal the lone member's");
        plan.n_ = n;
        plan.entitlements_[0] = {KeyId::chain(0), KeyId::chain(n)};
        for (std::uint32_t i = 1; i <= n; ++i)
          plan.entitlements_[i] = {KeyId::chain(i - 1), KeyId::chain(i)};
        break;
      }
      case PlanKind::kGraph: {
        if (s % 2 == 0 || s < 1)
          throw ValidationError("graph plan requires odd s >= 1");
        if (n + 1 <= s + 1)
          throw ValidationError("graph plan requires N + 1 > s + 1");
        plan.n_ = n;
        for (std::uint32_t v = 0; v <= n; ++v) {
          std::vector<KeyId> keys;
          for (std::uint32_t w : plan.neighbors_of(v))
            keys.push_back(KeyId::edge(v, w));
          std::sort(keys.begin(), keys.end());
          plan.entitlements_[v] = std::move(keys);
        }
        break;
      }
      case PlanKind::kNested: {
        const auto& sizes = plan.team_sizes_;
        if (sizes.size() < 2)
          throw ValidationError("nested plan requires >= 2 teams");
        for (std::uint32_t size : sizes)
          if (size < 3)
            throw ValidationError("nested plan requires team sizes >= 3");
        const std::uint32_t leaves =
            std::accumulate(sizes.begin(), sizes.end(), 0u);
        plan.n_ = leaves;

        // Org analyst: the two global endpoints.
        plan.entitlements_[0] = {KeyId::global_chain(0),
                                 KeyId::global_chain(leaves)};
        std::uint32_t base = 0;  // global index before the team's range
        for (std::uint32_t t = 0; t < sizes.size(); ++t) {
          const std::uint32_t size = sizes[t];
          // Team analyst: the team's global boundary keys.
          plan.entitlements_[plan.team_analyst(t)] = {
              KeyId::global_chain(base), KeyId::global_chain(base + size)};
          for (std::uint32_t j = 0; j < size; ++j) {
            const std::uint32_t leaf = base + j + 1;  // party index
            plan.entitlements_[leaf] = {
                KeyId::team_loop(t, j), KeyId::team_loop(t, (j + 1) % size),
                KeyId::global_chain(leaf - 1), KeyId::global_chain(leaf)};
          }
          base += size;
        }
        break;
      }
    }
    return plan;
  }
};

std::vector<PartyIndex> KeyPlan::members() const {
  std::vector<PartyIndex> out(n_);
  std::iota(out.begin(), out.end(), 1u);
  return out;
}

std::vector<PartyIndex> KeyPlan::parties() const {
  std::vector<PartyIndex> out;
  out.reserve(entitlements_.size());
  for (const auto& [party, keys] : entitlements_) out.push_back(party);
  return out;
}

PartyIndex KeyPlan::team_analyst(std::uint32_t team) const {
  if (kind_ != PlanKind::kNested || team >= team_sizes_.size())
    throw ValidationError("team analyst only defined for nested plan teams");
  return n_ + 1 + team;
}

std::vector<PartyIndex> KeyPlan::team_members(std::uint32_t team) const {
  if (kind_ != PlanKind::kNested || team >= team_sizes_.size())
    throw ValidationError("team members only defined for nested plan teams");
  std::uint32_t base = 0;
  for (std::uint32_t t = 0; t < team; ++t) base += team_sizes_[t];
  std::vector<PartyIndex> out(team_sizes_[team]);
  std::iota(out.begin(), out.end(), base + 1);
  return out;
}

std::uint32_t KeyPlan::team_of(PartyIndex member) const {
  if (kind_ != PlanKind::kNested || member < 1 || member > n_)
    throw ValidationError("team_of expects a nested plan leaf");
  std::uint32_t base = 0;
  for (std::uint32_t t = 0; t < team_sizes_.size(); ++t) {
    if (member <= base + team_sizes_[t]) return t;
    base += team_sizes_[t];
  }
  throw ValidationError("leaf outside all teams");
}

std::vector<std::uint32_t> KeyPlan::neighbors_of(std::uint32_t v) const {
  const std::uint32_t parties = n_ + 1;
  const std::uint32_t half = (s_ + 1) / 2;
  std::vector<std::uint32_t> out;
  out.reserve(s_ + 1);
  for (std::uint32_t d = 1; d <= half; ++d) {
    out.push_back((v + d) % parties);
    out.push_back((v + parties - d) % parties);
  }
  return out;
}

std::vector<std::uint32_t> KeyPlan::neighbors(std::uint32_t v) const {
  if (kind_ != PlanKind::kGraph)
    throw ValidationError("neighbors only defined for graph plans");
  if (v > n_) throw ValidationError("node out of range");
  auto out = neighbors_of(v);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> KeyPlan::edges() const {
  if (kind_ != PlanKind::kGraph)
    throw ValidationError("edges only defined for graph plans");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t v = 0; v <= n_; ++v)
    for (std::uint32_t w : neighbors_of(v))
      if (v > w) out.emplace_back(v, w);
  std::sort(out.begin(), out.end());
  return out;
}

int KeyPlan::edge_sign(std::uint32_t i, std::uint32_t j) const {
  if (kind_ != PlanKind::kGraph)
    throw ValidationError("edge sign only defined for graph plans");
  const std::uint32_t parties = n_ + 1;
  const std::uint32_t half = (s_ + 1) / 2;
  const std::uint32_t behind = (i + parties - j) % parties;
  if (behind >= 1 && behind <= half) return +1;  // j precedes i
  const std::uint32_t ahead = (j + parties - i) % parties;
  if (ahead >= 1 && ahead <= half) return -1;  // j follows i
  throw ValidationError("nodes are not neighbors");
}

const std::vector<KeyId>& KeyPlan::entitlement(PartyIndex party) const {
  auto it = entitlements_.find(party);
  if (it == entitlements_.end())
    throw ValidationError("party " + std::to_string(party) +
                          " is not in the plan");
  return it->second;
}

std::vector<PadTerm> KeyPlan::member_signature(PartyIndex member) const {
  if (member < 1 || member > n_)
    throw ValidationError("member index out of range: " +
                          std::to_string(member));
  switch (kind_) {
    case PlanKind::kBase:
      return {{KeyId::member(member), +1}};
    case PlanKind::kChain:
      return {{KeyId::chain(member - 1), +1}, {KeyId::chain(member), -1}};
    case PlanKind::kGraph: {
      std::vector<PadTerm> terms;
      for (std::uint32_t j : neighbors_of(member))
        terms.push_back({KeyId::edge(member, j), edge_sign(member, j)});
      return terms;
    }
    case PlanKind::kNested: {
      const std::uint32_t t = team_of(member);
      std::uint32_t base = 0;
      for (std::uint32_t k = 0; k < t; ++k) base += team_sizes_[k];
      const std::uint32_t j = member - base - 1;  // local index in the team
      const std::uint32_t size = team_sizes_[t];
      return {{KeyId::team_loop(t, j), +1},
              {KeyId::team_loop(t, (j + 1) % size), -1},
              {KeyId::global_chain(member - 1), +1},
              {KeyId::global_chain(member), -1}};
    }
  }
  throw ValidationError("bad plan kind");
}

std::map<KeyId, int> KeyPlan::net_signature(
    std::span<const PartyIndex> members) const {
  std::map<KeyId, int> net;
  for (PartyIndex m : members)
    for (const PadTerm& term : member_signature(m))
      net[term.key] += term.coefficient;
  std::erase_if(net, [](const auto& kv) { return kv.second == 0; });
  return net;
}

// ---------------------------------------------------------------------------
// Key generation and distribution

namespace {

PlannedKeys distribute(KeyPlan plan, unsigned security_bits) {
  std::map<KeyId, SecretKey> material;
  for (const auto& [party, ids] : plan.entitlements())
    for (const KeyId& id : ids)
      if (!material.count(id)) material[id] = generate_key(security_bits);

  PlannedKeys pk;
  pk.plan = std::move(plan);
  for (const auto& [party, ids] : pk.plan.entitlements()) {
    KeyRing ring;
    ring.owner = party;
    for (const KeyId& id : ids) ring.keys[id] = material.at(id);
    pk.rings.push_back(std::move(ring));
  }
  return pk;
}

}  // namespace

PlannedKeys plan_base(std::uint32_t n, bool analyst_holds_all,
                      unsigned security_bits) {
  KeyPlan plan = PlanBuilder::build(PlanKind::kBase, n, 0, {});
  if (!analyst_holds_all) {
    // The analyst ring exists but is empty; statistics then require the
    // member keys to be shared out of band.
    auto pk = distribute(std::move(plan), security_bits);
    for (KeyRing& ring : pk.rings)
      if (ring.owner == 0) ring.keys.clear();
    return pk;
  }
  return distribute(std::move(plan), security_bits);
}

PlannedKeys plan_chain(std::uint32_t n, unsigned security_bits) {
  return distribute(PlanBuilder::build(PlanKind::kChain, n, 0, {}),
                    security_bits);
}

PlannedKeys plan_graph(std::uint32_t n, std::uint32_t s,
                       unsigned security_bits) {
  return distribute(PlanBuilder::build(PlanKind::kGraph, n, s, {}),
                    security_bits);
}

PlannedKeys plan_nested(std::span<const std::uint32_t> team_sizes,
                        unsigned security_bits) {
  return distribute(
      PlanBuilder::build(PlanKind::kNested, 0, 0,
                         {team_sizes.begin(), team_sizes.end()}),
      security_bits);
}

// ---------------------------------------------------------------------------
// Serialization

std::string KeyPlan::to_json() const {
  json j;
  j["kind"] = std::string(plan_kind_name(kind_));
  j["n"] = n_;
  if (kind_ == PlanKind::kGraph) {
    j["s"] = s_;
    json edge_list = json::array();
    for (const auto& [a, b] : edges()) edge_list.push_back({a, b});
    j["edges"] = std::move(edge_list);
  }
  if (kind_ == PlanKind::kNested) j["team_sizes"] = team_sizes_;
  json parties = json::object();
  for (const auto& [party, ids] : entitlements_) {
    json list = json::array();
    for (const KeyId& id : ids) list.push_back(id.str());
    parties[std::to_string(party)] = std::move(list);
  }
  j["parties"] = std::move(parties);
  return j.dump(2);
}

KeyPlan KeyPlan::from_json(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ValidationError("plan file is not valid JSON");
  try {
    const PlanKind kind = plan_kind_from_name(j.at("kind").get<std::string>());
    const auto n = j.at("n").get<std::uint32_t>();
    const auto s = j.value("s", std::uint32_t{0});
    std::vector<std::uint32_t> team_sizes =
        j.value("team_sizes", std::vector<std::uint32_t>{});
    KeyPlan plan = PlanBuilder::build(kind, kind == PlanKind::kNested ? 0 : n,
                                      s, std::move(team_sizes));

    // The parties map must equal the structural entitlement exactly; a
    // plan file granting extra keys is rejected.
    if (j.contains("parties")) {
      std::map<PartyIndex, std::vector<KeyId>> listed;
      for (const auto& [party_str, ids] : j.at("parties").items()) {
        std::vector<KeyId>& v = listed[static_cast<PartyIndex>(
            std::stoul(party_str))];
        for (const auto& id : ids) v.push_back(KeyId::parse(id.get<std::string>()));
        std::sort(v.begin(), v.end());
      }
      auto expected = plan.entitlements_;
      for (auto& [party, ids] : expected) std::sort(ids.begin(), ids.end());
      if (listed != expected)
        throw ValidationError(
            "plan file parties do not match the structural entitlement");
    }
    return plan;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad plan file: ") + e.what());
  }
}

std::string KeyRing::to_json() const {
  json j;
  j["owner"] = owner;
  json keymap = json::object();
  for (const auto& [id, key] : keys) keymap[id.str()] = key_to_hex(key);
  j["keys"] = std::move(keymap);
  return j.dump(2);
}

KeyRing KeyRing::from_json(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ValidationError("ring file is not valid JSON");
  try {
    KeyRing ring;
    ring.owner = j.at("owner").get<PartyIndex>();
    for (const auto& [id_str, hex] : j.at("keys").items())
      ring.keys[KeyId::parse(id_str)] = key_from_hex(hex.get<std::string>());
    return ring;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad ring file: ") + e.what());
  }
}

void save_plan_dir(const std::filesystem::path& dir, const PlannedKeys& pk) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "plan.json");
    if (!out) throw ValidationError("cannot write " + (dir / "plan.json").string());
    out << pk.plan.to_json() << '\n';
  }
  for (const KeyRing& ring : pk.rings) {
    auto path = dir / ("ring_" + std::to_string(ring.owner) + ".json");
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << ring.to_json() << '\n';
  }
}

KeyPlan load_plan(const std::filesystem::path& plan_file) {
  std::ifstream in(plan_file);
  if (!in) throw ValidationError("cannot read " + plan_file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return KeyPlan::from_json(ss.str());
}

KeyRing load_ring(const std::filesystem::path& ring_file) {
  std::ifstream in(ring_file);
  if (!in) throw ValidationError("cannot read " + ring_file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return KeyRing::from_json(ss.str());
}

}  // namespace privsum
