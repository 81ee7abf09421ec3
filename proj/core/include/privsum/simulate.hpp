#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "privsum/presence.hpp"

namespace privsum {

// Stand-in data sources: each archetype drives a different daily pattern
// of sensor evidence.
enum class Archetype : std::uint8_t {
  kOfficeWorker = 0,
  kRemoteWorker = 1,
  kFieldWorker = 2,
};

struct SimulationConfig {
  unsigned users = 1;
  std::uint64_t start_time = 1'600'041'600;  // a Monday, 00:00 UTC
  std::uint64_t steps = 60 * 24;             // one day at default cadence
  std::uint32_t cadence = 60;                // seconds between records
  std::uint64_t seed = 1;
  double dropout = 0.0;  // independent per-record deletion probability
  // Archetype per user, cycled when shorter than `users`.
  std::vector<Archetype> archetypes = {Archetype::kOfficeWorker};
};

struct SimRecord {
  std::uint64_t timestamp = 0;
  SensorSnapshot snapshot;
  PresenceState state;
};

struct SimStream {
  std::string user_id;
  std::vector<SimRecord> records;  // ascending timestamps, gaps = dropout
};

// Deterministic in the seed: same config gives bit-identical streams.
// Dropped records are absent from the stream entirely, as if the fuser
// never reported them.
std::vector<SimStream> simulate(const SimulationConfig& config);

// Plaintext ground truth, kept outside the untrusted store and used only
// by tests and the decryption oracle: "user,timestamp,state_bits".
void write_oracle_csv(std::ostream& os, const std::vector<SimStream>& streams);
std::vector<SimStream> read_oracle_csv(std::istream& is);

}  // namespace privsum
