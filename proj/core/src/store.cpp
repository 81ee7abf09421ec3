#include "privsum/store.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>

#include "privsum/errors.hpp"

namespace privsum {
namespace {

std::string log_filename(std::string_view user_id) {
  // Hex-encode so arbitrary user ids map to safe filenames.
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string name = "u_";
  for (unsigned char c : user_id) {
    name.push_back(kDigits[c >> 4]);
    name.push_back(kDigits[c & 0x0f]);
  }
  return name + ".log";
}

}  // namespace

std::vector<StateType> AggregateQuery::selected_states() const {
  if (!states.empty()) {
    for (StateType s : states)
      if (static_cast<unsigned>(s) >= kStateCount)
        throw ValidationError("state index out of range");
    return states;
  }
  std::vector<StateType> all;
  for (unsigned i = 0; i < kStateCount; ++i)
    all.push_back(static_cast<StateType>(i));
  return all;
}

std::uint64_t AggregateQuery::weight_of(std::uint64_t timestamp) const {
  auto it = weights.find(timestamp);
  return it == weights.end() ? 1 : it->second;
}

std::uint64_t AggregateQuery::grid_points() const {
  if (to <= from) return 0;
  return (to - from + cadence - 1) / cadence;
}

std::uint32_t AggregateQuery::bin_of(std::uint64_t timestamp) const {
  if (!bin_width) return 0;
  if (fold) return static_cast<std::uint32_t>((timestamp % 86400) / *bin_width);
  return static_cast<std::uint32_t>((timestamp - from) / *bin_width);
}

std::uint32_t AggregateQuery::bin_count() const {
  if (!bin_width) return 1;
  if (fold) return 86400 / *bin_width;
  if (to <= from) return 0;
  return static_cast<std::uint32_t>((to - from + *bin_width - 1) / *bin_width);
}

std::vector<ExpectedNonce> expected_grid(const AggregateQuery& q) {
  std::vector<ExpectedNonce> grid;
  const auto states = q.selected_states();
  for (const std::string& user : q.users) {
    for (std::uint64_t t = q.from; t < q.to; t += q.cadence) {
      const std::uint64_t w = q.weight_of(t);
      for (StateType s : states)
        grid.push_back(ExpectedNonce{
            Nonce{t, static_cast<std::uint8_t>(s)}, user, w});
    }
  }
  return grid;
}

std::vector<ExpectedNonce> expected_nonces(
    const AggregateQuery& q, const std::vector<MissingTriple>& missing) {
  std::set<MissingTriple> gone(missing.begin(), missing.end());
  std::vector<ExpectedNonce> out;
  for (ExpectedNonce& en : expected_grid(q)) {
    MissingTriple probe{en.nonce.timestamp, en.user_id,
                        static_cast<StateType>(en.nonce.state_index)};
    if (!gone.count(probe)) out.push_back(std::move(en));
  }
  return out;
}

Store::Store(ModulusParams params) : params_(params) {}

Store::Store(Store&& other) noexcept
    : params_(other.params_),
      dir_(std::move(other.dir_)),
      by_user_(std::move(other.by_user_)) {}

Store Store::open(const std::filesystem::path& dir, ModulusParams params) {
  std::filesystem::create_directories(dir);
  Store store(params);
  store.dir_ = dir;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".log") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    std::size_t off = 0;
    while (off < bytes.size()) {
      std::size_t consumed = 0;
      CipherRecord record = parse_record_prefix(
          std::span(bytes).subspan(off), params, consumed);
      off += consumed;
      store.by_user_[record.user_id].emplace(record.timestamp,
                                             std::move(record));
    }
  }
  return store;
}

void Store::append_log(const CipherRecord& record) {
  if (!dir_) return;
  const auto path = *dir_ / log_filename(record.user_id);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw ValidationError("cannot append to " + path.string());
  const auto bytes = serialize_record(record, params_);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
}

void Store::ingest(const CipherRecord& record) {
  // Round-trips through the wire format so a malformed record is rejected
  // with the same rules the service applies.
  serialize_record(record, params_);
  std::unique_lock lock(mutex_);
  auto& stream = by_user_[record.user_id];
  if (stream.count(record.timestamp))
    throw DuplicateRecordError("record already stored for (" +
                               record.user_id + ", " +
                               std::to_string(record.timestamp) + ")");
  append_log(record);
  stream.emplace(record.timestamp, record);
}

EncryptedAggregate Store::query_sum(const AggregateQuery& q) const {
  if (q.users.empty()) throw ValidationError("query has an empty user set");
  if (q.to <= q.from) throw ValidationError("query has an empty time range");
  if (q.cadence == 0) throw ValidationError("cadence must be >= 1");
  if (q.bin_width) {
    if (*q.bin_width == 0) throw ValidationError("bin width must be >= 1");
    if (q.fold && 86400 % *q.bin_width != 0)
      throw ValidationError("fold bin width must divide 86400");
  }
  const auto states = q.selected_states();

  std::shared_lock lock(mutex_);

  // Overflow guard: the largest possible plaintext sum across the whole
  // query must stay below M. Erring on rejection.
  {
    unsigned __int128 bound = 0;
    const unsigned __int128 modulus =
        (unsigned __int128)params_.mask() + 1;
    for (const std::string& user : q.users) {
      auto it = by_user_.find(user);
      if (it == by_user_.end()) continue;
      for (std::uint64_t t = q.from; t < q.to; t += q.cadence) {
        if (!it->second.count(t)) continue;
        bound += (unsigned __int128)q.weight_of(t) * q.max_value;
        if (bound >= modulus)
          throw OverflowGuardError(
              "weighted plaintext sum could reach the modulus; narrow the "
              "query or raise M");
      }
    }
  }

  const std::uint32_t bins = q.bin_count();
  std::vector<std::uint64_t> sums(std::size_t{bins} * kStateCount, 0);
  std::vector<std::uint64_t> counts(std::size_t{bins} * kStateCount, 0);

  EncryptedAggregate result;
  for (const std::string& user : q.users) {
    auto it = by_user_.find(user);
    for (std::uint64_t t = q.from; t < q.to; t += q.cadence) {
      const CipherRecord* record = nullptr;
      if (it != by_user_.end()) {
        auto rit = it->second.find(t);
        if (rit != it->second.end()) record = &rit->second;
      }
      if (!record) {
        for (StateType s : states)
          result.missing.push_back(MissingTriple{t, user, s});
        continue;
      }
      const std::uint64_t w = q.weight_of(t);
      const std::uint32_t bin = q.bin_of(t);
      for (StateType s : states) {
        const auto idx =
            std::size_t{bin} * kStateCount + static_cast<unsigned>(s);
        sums[idx] = params_.add(
            sums[idx],
            params_.mul(record->ciphertexts[static_cast<unsigned>(s)].value,
                        w));
        counts[idx] += 1;
      }
    }
  }

  for (std::uint32_t bin = 0; bin < bins; ++bin)
    for (StateType s : states) {
      const auto idx =
          std::size_t{bin} * kStateCount + static_cast<unsigned>(s);
      result.bins.push_back(
          BinSum{bin, s, Ciphertext{sums[idx]}, counts[idx]});
    }
  std::sort(result.missing.begin(), result.missing.end());
  return result;
}

std::vector<ExpectedNonce> Store::expected_nonces(
    const AggregateQuery& q) const {
  return privsum::expected_nonces(q, query_sum(q).missing);
}

std::vector<CipherRecord> Store::fetch_raw(std::string_view user_id,
                                           std::uint64_t from,
                                           std::uint64_t to) const {
  std::shared_lock lock(mutex_);
  std::vector<CipherRecord> out;
  auto it = by_user_.find(user_id);
  if (it == by_user_.end()) return out;
  for (auto rit = it->second.lower_bound(from);
       rit != it->second.end() && rit->first < to; ++rit)
    out.push_back(rit->second);
  return out;
}

std::vector<MissingRange> Store::missing_ranges(std::string_view user_id,
                                                std::uint32_t cadence) const {
  if (cadence == 0) throw ValidationError("cadence must be >= 1");
  std::shared_lock lock(mutex_);
  std::vector<MissingRange> out;
  auto it = by_user_.find(user_id);
  if (it == by_user_.end() || it->second.size() < 2) return out;
  auto prev = it->second.begin();
  for (auto cur = std::next(prev); cur != it->second.end(); ++cur, ++prev) {
    if (cur->first - prev->first > cadence)
      out.push_back(MissingRange{prev->first + cadence, cur->first});
  }
  return out;
}

std::vector<std::string> Store::user_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [user, stream] : by_user_) out.push_back(user);
  return out;
}

std::size_t Store::record_count() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& [user, stream] : by_user_) n += stream.size();
  return n;
}

}  // namespace privsum
