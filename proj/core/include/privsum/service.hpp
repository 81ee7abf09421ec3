#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "privsum/histogram.hpp"
#include "privsum/protocols.hpp"
#include "privsum/store.hpp"

namespace privsum {

// JSON codecs for the wire schemas. Payloads carry only ciphertexts and
// public metadata; there is no field through which key material or a
// plaintext presence value could travel.
std::string query_to_json(const AggregateQuery& q);
AggregateQuery query_from_json(std::string_view json_text);
std::string aggregate_to_json(const EncryptedAggregate& agg,
                              const ModulusParams& params);
EncryptedAggregate aggregate_from_json(std::string_view json_text,
                                       const ModulusParams& params);
std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// HTTP surface of the untrusted components. Routes:
//   POST /records     {"record": base64}            -> 201 / 409 / 400
//   POST /query/sum   query JSON                    -> aggregate JSON
//   GET  /records?user=&from=&to=                   -> {"records": [base64]}
//   GET  /missing?user=&cadence=                    -> {"ranges": [...]}
//   GET  /health                                    -> {"status": "ok"}
class Service {
 public:
  // The store must outlive the service.
  Service(Store& store, std::string bind_address = "127.0.0.1",
          int port = 0);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Starts the listener thread; returns once the socket is accepting.
  // Throws ValidationError on bind failure.
  void start();
  void stop();
  int port() const;
  std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Thin HTTP client for the service endpoints.
class StoreClient {
 public:
  StoreClient(std::string base_url, ModulusParams params = ModulusParams());
  ~StoreClient();

  StoreClient(const StoreClient&) = delete;
  StoreClient& operator=(const StoreClient&) = delete;

  bool healthy() const;
  // Returns true when stored, false when the server reported a duplicate.
  // Throws on transport errors and malformed-record rejections.
  bool post_record(const CipherRecord& record);
  EncryptedAggregate query_sum(const AggregateQuery& q) const;
  std::vector<CipherRecord> fetch_records(std::string_view user,
                                          std::uint64_t from,
                                          std::uint64_t to) const;
  std::vector<MissingRange> missing(std::string_view user,
                                    std::uint32_t cadence = 60) const;

  const ModulusParams& params() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Per-user trusted submitter: encodes a presence state, encrypts the
// five per-state bits under the plan's rule, and submits one record per
// timestep. Submission is at-least-once with a local retry queue; the
// server's duplicate rejection makes storage exactly-once.
class FuserClient {
 public:
  FuserClient(StoreClient& client, const KeyPlan& plan, PartyIndex member,
              KeyRing ring, std::string user_id,
              ModulusParams params = ModulusParams());

  CipherRecord make_record(std::uint64_t timestamp,
                           const PresenceState& state) const;

  // Attempts delivery; on failure queues the record for flush().
  void submit(std::uint64_t timestamp, const PresenceState& state);
  // Retries everything queued; returns true when the queue drained.
  bool flush();
  std::size_t pending() const { return queue_.size(); }

 private:
  StoreClient& client_;
  KeyPlan plan_;
  PartyIndex member_;
  KeyRing ring_;
  std::string user_id_;
  ModulusParams params_;
  std::deque<CipherRecord> queue_;
};

// Keys stay local to the session; only queries and ciphertexts travel.
struct AnalystSession {
  KeyPlan plan;
  KeyRing ring;
  // Which plan member produced each user id's stream.
  std::map<std::string, PartyIndex> user_members;
  // Compute the full pad grid before the response arrives, then credit
  // back the pads of reported-missing triples. Identical output to the
  // post-response path.
  bool precompute_pads = false;
};

struct DecryptedAggregate {
  std::vector<DecryptedBin> bins;
  std::vector<MissingTriple> missing;
};

class AnalystClient {
 public:
  AnalystClient(StoreClient& client, AnalystSession session);

  // Fetches the encrypted aggregate, strips pads locally, and returns
  // per-(bin, state) sums with average and Boolean variance. Refuses when
  // the session ring cannot decrypt the plan/query combination.
  DecryptedAggregate query_statistics(const AggregateQuery& q) const;

  // Decryption of an already-fetched aggregate (also used by the CLI).
  DecryptedAggregate decrypt_aggregate(const AggregateQuery& q,
                                       const EncryptedAggregate& agg) const;

 private:
  StoreClient& client_;
  AnalystSession session_;
};

}  // namespace privsum
