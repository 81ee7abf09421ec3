#include "privsum/simulate.hpp"

#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "privsum/errors.hpp"

namespace privsum {
namespace {

struct SensorOdds {
  double camera_person = 0;
  double camera_multiple = 0;
  double keyboard_active = 0;
  double bluetooth = 0;
  double network_remote = 0;
  double mobile = 0;
};

bool is_weekend(std::uint64_t t) {
  // Epoch day 0 was a Thursday; days 2 and 3 of the Thursday-based week
  // are Saturday and Sunday.
  std::uint64_t dow = (t / 86400 + 4) % 7;  // 0 = Monday
  return dow >= 5;
}

SensorOdds schedule(Archetype archetype, std::uint64_t t) {
  const std::uint64_t sod = t % 86400;  // second of day, UTC
  const bool weekend = is_weekend(t);
  SensorOdds odds;

  auto between = [sod](unsigned from_h, unsigned to_h) {
    return sod >= from_h * 3600ull && sod < to_h * 3600ull;
  };

  switch (archetype) {
    case Archetype::kOfficeWorker:
      if (weekend) {
        if (between(10, 20)) odds.mobile = 0.15;
        break;
      }
      if (between(9, 12) || between(13, 18)) {
        odds.camera_person = 0.85;
        odds.camera_multiple = 0.08;
        odds.keyboard_active = 0.75;
        odds.bluetooth = 0.95;
      } else if (between(12, 13)) {
        odds.bluetooth = 0.60;
        odds.mobile = 0.20;
      } else if (between(7, 9) || between(18, 20)) {
        odds.mobile = 0.50;
      } else if (between(20, 23)) {
        odds.network_remote = 0.10;
      }
      break;
    case Archetype::kRemoteWorker:
      if (weekend) {
        if (between(11, 22)) odds.network_remote = 0.10;
        break;
      }
      if (between(8, 12) || between(13, 17)) {
        odds.network_remote = 0.80;
      } else if (between(17, 22)) {
        odds.network_remote = 0.25;
        odds.mobile = 0.20;
      }
      break;
    case Archetype::kFieldWorker:
      if (weekend) break;
      if (between(8, 10) || between(15, 18)) {
        odds.bluetooth = 0.40;
        odds.mobile = 0.40;
      } else if (between(10, 15)) {
        odds.mobile = 0.65;
      }
      break;
  }
  return odds;
}

}  // namespace

std::vector<SimStream> simulate(const SimulationConfig& config) {
  if (config.users == 0) throw ValidationError("user count must be >= 1");
  if (config.cadence == 0) throw ValidationError("cadence must be >= 1");
  if (config.archetypes.empty())
    throw ValidationError("at least one archetype required");
  if (config.dropout < 0.0 || config.dropout >= 1.0)
    throw ValidationError("dropout must be in [0, 1)");

  std::vector<SimStream> streams;
  streams.reserve(config.users);

  for (unsigned u = 0; u < config.users; ++u) {
    SimStream stream;
    stream.user_id = "user" + std::to_string(u + 1);
    stream.records.reserve(config.steps);

    const Archetype archetype =
        config.archetypes[u % config.archetypes.size()];
    // One independent generator per user so streams do not shift when the
    // user count changes.
    std::mt19937_64 rng(config.seed * 0x9e3779b97f4a7c15ull + u + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (std::uint64_t step = 0; step < config.steps; ++step) {
      const std::uint64_t t = config.start_time + step * config.cadence;
      const SensorOdds odds = schedule(archetype, t);

      // Fixed number of draws per step keeps the stream deterministic
      // regardless of which branches fire.
      SensorSnapshot snap;
      snap.camera_person = unit(rng) < odds.camera_person;
      snap.camera_multiple = unit(rng) < odds.camera_multiple;
      snap.keyboard_active = unit(rng) < odds.keyboard_active;
      snap.bluetooth_in_building = unit(rng) < odds.bluetooth;
      snap.network_remote_active = unit(rng) < odds.network_remote;
      snap.mobile_connected = unit(rng) < odds.mobile;
      const bool dropped = unit(rng) < config.dropout;
      if (dropped) continue;

      stream.records.push_back(SimRecord{t, snap, fuse(snap)});
    }
    streams.push_back(std::move(stream));
  }
  return streams;
}

void write_oracle_csv(std::ostream& os,
                      const std::vector<SimStream>& streams) {
  os << "user,timestamp,state_bits\n";
  for (const SimStream& stream : streams)
    for (const SimRecord& r : stream.records)
      os << stream.user_id << ',' << r.timestamp << ',' << r.state.bits()
         << '\n';
}

std::vector<SimStream> read_oracle_csv(std::istream& is) {
  std::vector<SimStream> streams;
  std::string line;
  if (!std::getline(is, line) || line.rfind("user,", 0) != 0)
    throw ValidationError("oracle csv: missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string user, ts, bits;
    if (!std::getline(ss, user, ',') || !std::getline(ss, ts, ',') ||
        !std::getline(ss, bits))
      throw ValidationError("oracle csv: malformed line: " + line);
    if (streams.empty() || streams.back().user_id != user) {
      streams.push_back(SimStream{user, {}});
    }
    SimRecord rec;
    rec.timestamp = std::stoull(ts);
    rec.state = PresenceState::from_bits(bits);
    streams.back().records.push_back(rec);
  }
  return streams;
}

}  // namespace privsum
