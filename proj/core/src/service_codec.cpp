#include <nlohmann/json.hpp>

#include "privsum/errors.hpp"
#include "privsum/service.hpp"

namespace privsum {

using json = nlohmann::json;

namespace {

constexpr char kBase64Digits[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v =
        bytes[i] << 16 | bytes[i + 1] << 8 | bytes[i + 2];
    out.push_back(kBase64Digits[v >> 18]);
    out.push_back(kBase64Digits[(v >> 12) & 0x3f]);
    out.push_back(kBase64Digits[(v >> 6) & 0x3f]);
    out.push_back(kBase64Digits[v & 0x3f]);
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out.push_back(kBase64Digits[v >> 18]);
    out.push_back(kBase64Digits[(v >> 12) & 0x3f]);
    out.append("==");
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16 | bytes[i + 1] << 8;
    out.push_back(kBase64Digits[v >> 18]);
    out.push_back(kBase64Digits[(v >> 12) & 0x3f]);
    out.push_back(kBase64Digits[(v >> 6) & 0x3f]);
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0)
    throw ValidationError("base64 length must be a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad_chars = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        if (i + 4 != text.size() || k < 2)
          throw ValidationError("bad base64 padding");
        vals[k] = 0;
        ++pad_chars;
      } else {
        if (pad_chars > 0) throw ValidationError("bad base64 padding");
        vals[k] = base64_value(c);
        if (vals[k] < 0) throw ValidationError("bad base64 character");
      }
    }
    const std::uint32_t v = vals[0] << 18 | vals[1] << 12 | vals[2] << 6 |
                            vals[3];
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad_chars < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad_chars < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::string query_to_json(const AggregateQuery& q) {
  json j;
  j["users"] = q.users;
  j["from"] = q.from;
  j["to"] = q.to;
  j["cadence"] = q.cadence;
  json states = json::array();
  for (StateType s : q.states) states.push_back(static_cast<unsigned>(s));
  j["states"] = std::move(states);
  if (q.bin_width) j["bin_width"] = *q.bin_width;
  j["fold"] = q.fold;
  if (!q.weights.empty()) {
    json w = json::object();
    for (const auto& [ts, weight] : q.weights)
      w[std::to_string(ts)] = weight;
    j["weights"] = std::move(w);
  }
  j["max_value"] = q.max_value;
  return j.dump();
}

AggregateQuery query_from_json(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ValidationError("query is not valid JSON");
  try {
    AggregateQuery q;
    q.users = j.at("users").get<std::vector<std::string>>();
    q.from = j.at("from").get<std::uint64_t>();
    q.to = j.at("to").get<std::uint64_t>();
    q.cadence = j.value("cadence", std::uint32_t{60});
    for (const auto& s : j.value("states", std::vector<unsigned>{})) {
      if (s >= kStateCount) throw ValidationError("state index out of range");
      q.states.push_back(static_cast<StateType>(s));
    }
    if (j.contains("bin_width"))
      q.bin_width = j.at("bin_width").get<std::uint32_t>();
    q.fold = j.value("fold", false);
    if (j.contains("weights"))
      for (const auto& [ts, w] : j.at("weights").items())
        q.weights[std::stoull(ts)] = w.get<std::uint64_t>();
    q.max_value = j.value("max_value", std::uint64_t{1});
    return q;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad query: ") + e.what());
  }
}

std::string aggregate_to_json(const EncryptedAggregate& agg,
                              const ModulusParams& params) {
  json j;
  json bins = json::array();
  for (const BinSum& b : agg.bins) {
    json entry;
    entry["bin"] = b.bin;
    entry["state"] = static_cast<unsigned>(b.state);
    entry["cipher_hex"] = cipher_to_hex(b.sum, params);
    entry["count"] = b.count;
    bins.push_back(std::move(entry));
  }
  j["bins"] = std::move(bins);
  json missing = json::array();
  for (const MissingTriple& m : agg.missing) {
    json entry;
    entry["timestamp"] = m.timestamp;
    entry["user"] = m.user_id;
    entry["state"] = static_cast<unsigned>(m.state);
    missing.push_back(std::move(entry));
  }
  j["missing"] = std::move(missing);
  return j.dump();
}

EncryptedAggregate aggregate_from_json(std::string_view json_text,
                                       const ModulusParams& params) {
  json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded())
    throw ValidationError("aggregate is not valid JSON");
  try {
    EncryptedAggregate agg;
    for (const auto& entry : j.at("bins")) {
      BinSum b;
      b.bin = entry.at("bin").get<std::uint32_t>();
      const auto s = entry.at("state").get<unsigned>();
      if (s >= kStateCount) throw ValidationError("state index out of range");
      b.state = static_cast<StateType>(s);
      b.sum = cipher_from_hex(entry.at("cipher_hex").get<std::string>(),
                              params);
      b.count = entry.at("count").get<std::uint64_t>();
      agg.bins.push_back(std::move(b));
    }
    for (const auto& entry : j.at("missing")) {
      MissingTriple m;
      m.timestamp = entry.at("timestamp").get<std::uint64_t>();
      m.user_id = entry.at("user").get<std::string>();
      const auto s = entry.at("state").get<unsigned>();
      if (s >= kStateCount) throw ValidationError("state index out of range");
      m.state = static_cast<StateType>(s);
      agg.missing.push_back(std::move(m));
    }
    return agg;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad aggregate: ") + e.what());
  }
}

}  // namespace privsum
