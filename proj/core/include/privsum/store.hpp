#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "privsum/presence.hpp"
#include "privsum/record.hpp"

namespace privsum {

// A sum over an arbitrary subset of the stored data. Records contribute
// when they lie on the query grid: timestamps from, from+cadence, ...
// strictly below to. Stored records off the grid are ignored by
// aggregation (they remain fetchable raw).
struct AggregateQuery {
  std::vector<std::string> users;
  std::uint64_t from = 0;
  std::uint64_t to = 0;            // half-open [from, to)
  std::uint32_t cadence = 60;      // expected sampling interval, seconds
  std::vector<StateType> states;   // empty = all five
  std::optional<std::uint32_t> bin_width;  // seconds; absent = single bin
  bool fold = false;               // fold bins by time of day (UTC)
  std::map<std::uint64_t, std::uint64_t> weights;  // timestamp -> weight
  std::uint64_t max_value = 1;     // plaintext bound for the overflow guard

  std::vector<StateType> selected_states() const;
  std::uint64_t weight_of(std::uint64_t timestamp) const;
  std::uint64_t grid_points() const;  // timestamps per user
  // Bin of a grid timestamp, and the total number of bins.
  std::uint32_t bin_of(std::uint64_t timestamp) const;
  std::uint32_t bin_count() const;
};

struct MissingTriple {
  std::uint64_t timestamp = 0;
  std::string user_id;
  StateType state = StateType::kInOffice;

  bool operator==(const MissingTriple&) const = default;
  auto operator<=>(const MissingTriple&) const = default;
};

struct BinSum {
  std::uint32_t bin = 0;
  StateType state = StateType::kInOffice;
  Ciphertext sum;
  std::uint64_t count = 0;  // contributing records

  bool operator==(const BinSum&) const = default;
};

struct EncryptedAggregate {
  std::vector<BinSum> bins;            // ordered by (bin, state)
  std::vector<MissingTriple> missing;  // expected but absent from the sum
};

struct MissingRange {
  std::uint64_t from = 0;
  std::uint64_t to = 0;  // half-open

  bool operator==(const MissingRange&) const = default;
};

struct ExpectedNonce {
  Nonce nonce;
  std::string user_id;
  std::uint64_t weight = 1;
};

// The full expected (nonce, user, weight) grid of a query, and the grid
// minus reported missing triples: exactly the pads a decryptor must sum.
// Pure functions of the query, usable by clients without store access.
std::vector<ExpectedNonce> expected_grid(const AggregateQuery& q);
std::vector<ExpectedNonce> expected_nonces(
    const AggregateQuery& q, const std::vector<MissingTriple>& missing);

// Untrusted encrypted data store plus computation engine. Operates on
// ciphertext residues only; no operation takes key material. Optionally
// durable via one append-only log per user under a data directory.
class Store {
 public:
  explicit Store(ModulusParams params = ModulusParams());

  // Opens (creating if needed) a durable store; replays existing logs.
  static Store open(const std::filesystem::path& dir,
                    ModulusParams params = ModulusParams());

  const ModulusParams& params() const { return params_; }

  // Rejects duplicate (user_id, timestamp) pairs.
  void ingest(const CipherRecord& record);

  EncryptedAggregate query_sum(const AggregateQuery& q) const;

  // Grid minus this store's missing triples for the query.
  std::vector<ExpectedNonce> expected_nonces(const AggregateQuery& q) const;

  // Stored records for a user in [from, to), ascending by timestamp.
  std::vector<CipherRecord> fetch_raw(std::string_view user_id,
                                      std::uint64_t from,
                                      std::uint64_t to) const;

  // Gaps between consecutive stored records at the given cadence.
  std::vector<MissingRange> missing_ranges(std::string_view user_id,
                                           std::uint32_t cadence = 60) const;

  std::vector<std::string> user_ids() const;
  std::size_t record_count() const;

 private:
  void append_log(const CipherRecord& record);

  ModulusParams params_;
  std::optional<std::filesystem::path> dir_;
  std::map<std::string, std::map<std::uint64_t, CipherRecord>, std::less<>>
      by_user_;
  mutable std::shared_mutex mutex_;

 public:
  Store(Store&& other) noexcept;
  Store& operator=(Store&&) = delete;
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;
};

}  // namespace privsum
