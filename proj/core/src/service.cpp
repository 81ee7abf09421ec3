#include "privsum/service.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "privsum/errors.hpp"

namespace privsum {

using json = nlohmann::json;

namespace {

std::string error_body(std::string_view message) {
  json j;
  j["error"] = std::string(message);
  return j.dump();
}

}  // namespace

// ---------------------------------------------------------------------------
// Service

struct Service::Impl {
  Store& store;
  std::string bind_address;
  int requested_port;
  int bound_port = -1;
  httplib::Server server;
  std::thread listener;

  Impl(Store& s, std::string addr, int port)
      : store(s), bind_address(std::move(addr)), requested_port(port) {
    server.Post("/records", [this](const httplib::Request& req,
                                   httplib::Response& res) {
      handle_ingest(req, res);
    });
    server.Post("/query/sum", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      handle_query(req, res);
    });
    server.Get("/records", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      handle_fetch(req, res);
    });
    server.Get("/missing", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      handle_missing(req, res);
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
  }

  void handle_ingest(const httplib::Request& req, httplib::Response& res) {
    try {
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.contains("record")) {
        res.status = 400;
        res.set_content(error_body("body must be {\"record\": base64}"),
                        "application/json");
        return;
      }
      const auto bytes =
          base64_decode(body.at("record").get<std::string>());
      const CipherRecord record = parse_record(bytes, store.params());
      store.ingest(record);
      res.status = 201;
      res.set_content(R"({"status":"stored"})", "application/json");
    } catch (const DuplicateRecordError& e) {
      res.status = 409;
      res.set_content(error_body(e.what()), "application/json");
    } catch (const ValidationError& e) {
      res.status = 400;
      res.set_content(error_body(e.what()), "application/json");
    }
  }

  void handle_query(const httplib::Request& req, httplib::Response& res) {
    try {
      const AggregateQuery q = query_from_json(req.body);
      const EncryptedAggregate agg = store.query_sum(q);
      res.set_content(aggregate_to_json(agg, store.params()),
                      "application/json");
    } catch (const OverflowGuardError& e) {
      res.status = 422;
      res.set_content(error_body(e.what()), "application/json");
    } catch (const ValidationError& e) {
      res.status = 400;
      res.set_content(error_body(e.what()), "application/json");
    }
  }

  void handle_fetch(const httplib::Request& req, httplib::Response& res) {
    try {
      if (!req.has_param("user")) {
        res.status = 400;
        res.set_content(error_body("user parameter required"),
                        "application/json");
        return;
      }
      const std::string user = req.get_param_value("user");
      const std::uint64_t from =
          req.has_param("from") ? std::stoull(req.get_param_value("from"))
                                : 0;
      const std::uint64_t to =
          req.has_param("to") ? std::stoull(req.get_param_value("to"))
                              : ~std::uint64_t{0};
      json j;
      json records = json::array();
      for (const CipherRecord& r : store.fetch_raw(user, from, to))
        records.push_back(
            base64_encode(serialize_record(r, store.params())));
      j["records"] = std::move(records);
      res.set_content(j.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(error_body(e.what()), "application/json");
    }
  }

  void handle_missing(const httplib::Request& req, httplib::Response& res) {
    try {
      if (!req.has_param("user")) {
        res.status = 400;
        res.set_content(error_body("user parameter required"),
                        "application/json");
        return;
      }
      const std::string user = req.get_param_value("user");
      const std::uint32_t cadence =
          req.has_param("cadence")
              ? static_cast<std::uint32_t>(
                    std::stoul(req.get_param_value("cadence")))
              : 60;
      json j;
      json ranges = json::array();
      for (const MissingRange& r : store.missing_ranges(user, cadence)) {
        json entry;
        entry["from"] = r.from;
        entry["to"] = r.to;
        ranges.push_back(std::move(entry));
      }
      j["ranges"] = std::move(ranges);
      res.set_content(j.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(error_body(e.what()), "application/json");
    }
  }
};

Service::Service(Store& store, std::string bind_address, int port)
    : impl_(std::make_unique<Impl>(store, std::move(bind_address), port)) {}

Service::~Service() { stop(); }

void Service::start() {
  if (impl_->requested_port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(impl_->bind_address);
    if (impl_->bound_port <= 0)
      throw ValidationError("bind failure on " + impl_->bind_address);
  } else {
    if (!impl_->server.bind_to_port(impl_->bind_address,
                                    impl_->requested_port))
      throw ValidationError("bind failure on " + impl_->bind_address + ":" +
                            std::to_string(impl_->requested_port));
    impl_->bound_port = impl_->requested_port;
  }
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void Service::stop() {
  if (impl_ && impl_->listener.joinable()) {
    impl_->server.stop();
    impl_->listener.join();
  }
}

int Service::port() const { return impl_->bound_port; }

std::string Service::base_url() const {
  return "http://" + impl_->bind_address + ":" +
         std::to_string(impl_->bound_port);
}

// ---------------------------------------------------------------------------
// StoreClient

struct StoreClient::Impl {
  httplib::Client http;
  ModulusParams params;

  Impl(const std::string& base_url, ModulusParams p)
      : http(base_url), params(p) {
    http.set_connection_timeout(5);
    http.set_read_timeout(30);
  }
};

StoreClient::StoreClient(std::string base_url, ModulusParams params)
    : impl_(std::make_unique<Impl>(base_url, params)) {}

StoreClient::~StoreClient() = default;

const ModulusParams& StoreClient::params() const { return impl_->params; }

bool StoreClient::healthy() const {
  auto res = impl_->http.Get("/health");
  return res && res->status == 200;
}

bool StoreClient::post_record(const CipherRecord& record) {
  json body;
  body["record"] =
      base64_encode(serialize_record(record, impl_->params));
  auto res = impl_->http.Post("/records", body.dump(), "application/json");
  if (!res) throw TransportError("POST /records: no response");
  if (res->status == 201) return true;
  if (res->status == 409) return false;
  if (res->status == 400) throw ValidationError("rejected: " + res->body);
  throw TransportError("POST /records: HTTP " + std::to_string(res->status));
}

EncryptedAggregate StoreClient::query_sum(const AggregateQuery& q) const {
  auto res =
      impl_->http.Post("/query/sum", query_to_json(q), "application/json");
  if (!res) throw TransportError("POST /query/sum: no response");
  if (res->status == 422) throw OverflowGuardError(res->body);
  if (res->status != 200)
    throw ValidationError("query rejected: " + res->body);
  return aggregate_from_json(res->body, impl_->params);
}

std::vector<CipherRecord> StoreClient::fetch_records(std::string_view user,
                                                     std::uint64_t from,
                                                     std::uint64_t to) const {
  httplib::Params params{{"user", std::string(user)},
                         {"from", std::to_string(from)},
                         {"to", std::to_string(to)}};
  auto res = impl_->http.Get("/records", params, httplib::Headers{});
  if (!res) throw TransportError("GET /records: no response");
  if (res->status != 200)
    throw ValidationError("fetch rejected: " + res->body);
  json j = json::parse(res->body);
  std::vector<CipherRecord> out;
  for (const auto& b64 : j.at("records"))
    out.push_back(parse_record(base64_decode(b64.get<std::string>()),
                               impl_->params));
  return out;
}

std::vector<MissingRange> StoreClient::missing(std::string_view user,
                                               std::uint32_t cadence) const {
  httplib::Params params{{"user", std::string(user)},
                         {"cadence", std::to_string(cadence)}};
  auto res = impl_->http.Get("/missing", params, httplib::Headers{});
  if (!res) throw TransportError("GET /missing: no response");
  if (res->status != 200)
    throw ValidationError("missing rejected: " + res->body);
  json j = json::parse(res->body);
  std::vector<MissingRange> out;
  for (const auto& entry : j.at("ranges"))
    out.push_back(MissingRange{entry.at("from").get<std::uint64_t>(),
                               entry.at("to").get<std::uint64_t>()});
  return out;
}

// ---------------------------------------------------------------------------
// FuserClient

FuserClient::FuserClient(StoreClient& client, const KeyPlan& plan,
                         PartyIndex member, KeyRing ring, std::string user_id,
                         ModulusParams params)
    : client_(client),
      plan_(plan),
      member_(member),
      ring_(std::move(ring)),
      user_id_(std::move(user_id)),
      params_(params) {}

CipherRecord FuserClient::make_record(std::uint64_t timestamp,
                                      const PresenceState& state) const {
  CipherRecord record;
  record.user_id = user_id_;
  record.timestamp = timestamp;
  const auto residues = state.residues();
  for (unsigned j = 0; j < kStateCount; ++j) {
    const Nonce nonce{timestamp, static_cast<std::uint8_t>(j)};
    record.ciphertexts[j] =
        encrypt_with_plan(plan_, member_, residues[j], ring_, nonce, params_);
  }
  return record;
}

void FuserClient::submit(std::uint64_t timestamp, const PresenceState& state) {
  CipherRecord record = make_record(timestamp, state);
  try {
    client_.post_record(record);  // duplicate counts as delivered
  } catch (const TransportError&) {
    queue_.push_back(std::move(record));
  }
}

bool FuserClient::flush() {
  while (!queue_.empty()) {
    try {
      client_.post_record(queue_.front());
    } catch (const TransportError&) {
      return false;
    }
    queue_.pop_front();
  }
  return true;
}

// ---------------------------------------------------------------------------
// AnalystClient

namespace {

// Classifies which group target the queried users form under the plan.
GroupTarget resolve_target(const AnalystSession& session,
                           const AggregateQuery& q,
                           std::vector<PartyIndex>& queried_members) {
  const KeyPlan& plan = session.plan;
  queried_members.clear();
  for (const std::string& user : q.users) {
    auto it = session.user_members.find(user);
    if (it == session.user_members.end())
      throw KeyError("no plan member known for user '" + user + "'");
    queried_members.push_back(it->second);
  }
  std::vector<PartyIndex> sorted = queried_members;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ValidationError("duplicate member in query user set");

  if (plan.kind() == PlanKind::kBase)
    return GroupTarget::subset_of(queried_members);

  const auto all = plan.members();
  if (sorted == all) return GroupTarget::full_group();

  if (plan.kind() == PlanKind::kNested) {
    for (std::uint32_t t = 0; t < plan.team_count(); ++t) {
      if (sorted == plan.team_members(t)) return GroupTarget::team_group(t);
    }
  }
  // Any other subset: the pads provably do not reduce to keys this plan
  // grants any analyst; report which keys would be needed.
  return GroupTarget::subset_of(queried_members);
}

}  // namespace

AnalystClient::AnalystClient(StoreClient& client, AnalystSession session)
    : client_(client), session_(std::move(session)) {}

DecryptedAggregate AnalystClient::decrypt_aggregate(
    const AggregateQuery& q, const EncryptedAggregate& agg) const {
  const KeyPlan& plan = session_.plan;
  const ModulusParams& params = client_.params();
  const bool group_plan = plan.kind() != PlanKind::kBase;

  std::vector<PartyIndex> queried_members;
  const GroupTarget target = resolve_target(session_, q, queried_members);

  if (group_plan) {
    const bool weighted =
        std::any_of(q.weights.begin(), q.weights.end(),
                    [](const auto& kv) { return kv.second != 1; });
    if (weighted)
      throw CancellationError(
          "weighted sums are only supported under the base plan");
    if (!agg.missing.empty())
      throw CancellationError(
          "missing member data: pads do not cancel under this plan (" +
          std::to_string(agg.missing.size()) + " missing triples)");
  }

  // Net pad coefficients for one nonce of the target's combined sum.
  const auto net = plan.net_signature(target_members(plan, target));
  for (const auto& [key, coef] : net)
    if (!session_.ring.holds(key))
      throw KeyError("session ring cannot decrypt this query: missing key " +
                     key.str());

  // user -> member key, for per-user pad paths under the base plan.
  std::map<std::string, const SecretKey*> user_keys;
  if (!group_plan)
    for (std::size_t i = 0; i < q.users.size(); ++i)
      user_keys[q.users[i]] =
          &session_.ring.at(KeyId::member(queried_members[i]));

  // Pad correction per (bin, state), signed.
  const std::uint32_t bins = q.bin_count();
  std::vector<std::uint64_t> correction(std::size_t{bins} * kStateCount, 0);
  auto cell = [&](std::uint32_t bin, StateType s) -> std::uint64_t& {
    return correction[std::size_t{bin} * kStateCount +
                      static_cast<unsigned>(s)];
  };

  if (group_plan) {
    // Every grid nonce carries the same net boundary pads.
    const auto states = q.selected_states();
    for (std::uint64_t t = q.from; t < q.to; t += q.cadence) {
      const std::uint32_t bin = q.bin_of(t);
      for (StateType s : states) {
        const Nonce nonce{t, static_cast<std::uint8_t>(s)};
        std::uint64_t acc = 0;
        for (const auto& [key, coef] : net) {
          const std::uint64_t r =
              pad(session_.ring.at(key), nonce, params).value;
          acc = coef > 0 ? params.add(acc, r) : params.sub(acc, r);
        }
        cell(bin, s) = params.add(cell(bin, s), acc);
      }
    }
  } else if (session_.precompute_pads) {
    // Full grid first (can run before the response arrives), then credit
    // back the pads of reported-missing triples.
    for (const ExpectedNonce& en : expected_grid(q)) {
      const std::uint64_t r =
          params.mul(pad(*user_keys.at(en.user_id), en.nonce, params).value,
                     en.weight);
      auto& c = cell(q.bin_of(en.nonce.timestamp),
                     static_cast<StateType>(en.nonce.state_index));
      c = params.add(c, r);
    }
    for (const MissingTriple& m : agg.missing) {
      const Nonce nonce{m.timestamp, static_cast<std::uint8_t>(m.state)};
      const std::uint64_t r = params.mul(
          pad(*user_keys.at(m.user_id), nonce, params).value,
          q.weight_of(m.timestamp));
      auto& c = cell(q.bin_of(m.timestamp), m.state);
      c = params.sub(c, r);
    }
  } else {
    for (const ExpectedNonce& en : expected_nonces(q, agg.missing)) {
      const std::uint64_t r =
          params.mul(pad(*user_keys.at(en.user_id), en.nonce, params).value,
                     en.weight);
      auto& c = cell(q.bin_of(en.nonce.timestamp),
                     static_cast<StateType>(en.nonce.state_index));
      c = params.add(c, r);
    }
  }

  DecryptedAggregate out;
  out.missing = agg.missing;
  for (const BinSum& b : agg.bins) {
    DecryptedBin d;
    d.bin = b.bin;
    d.state = b.state;
    d.count = b.count;
    d.sum = params.sub(b.sum.value, cell(b.bin, b.state));
    if (b.count > 0) {
      const Stats stats = statistics(d.sum, b.count);
      d.average = stats.average;
      d.variance = stats.variance;
    }
    out.bins.push_back(d);
  }
  return out;
}

DecryptedAggregate AnalystClient::query_statistics(
    const AggregateQuery& q) const {
  return decrypt_aggregate(q, client_.query_sum(q));
}

}  // namespace privsum
