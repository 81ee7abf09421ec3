#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "privsum/crypto.hpp"

namespace privsum {

// The five positive presence states, in bit-string order. The sixth legal
// value is "no state" (all bits zero, insufficient data).
enum class StateType : std::uint8_t {
  kInOffice = 0,
  kHasVisitor = 1,
  kInBuilding = 2,
  kActiveRemote = 3,
  kMobile = 4,
};

std::string_view state_name(StateType s);
StateType state_from_name(std::string_view name);

// One-hot 5-bit presence value, or all-zero.
class PresenceState {
 public:
  PresenceState() = default;  // insufficient data

  static PresenceState none() { return PresenceState(); }
  static PresenceState of(StateType s) {
    PresenceState p;
    p.active_ = s;
    return p;
  }
  // Parses "01000" style bit strings; throws on anything but the six
  // legal values.
  static PresenceState from_bits(std::string_view bits);
  static bool validate(std::string_view bits);

  std::optional<StateType> active() const { return active_; }
  std::string bits() const;

  // One plaintext residue in {0,1} per state type, in state order.
  std::array<std::uint64_t, kStateCount> residues() const;

  bool operator==(const PresenceState&) const = default;

 private:
  std::optional<StateType> active_;
};

// Per-user sensor evidence at one timestep. A disabled sensor contributes
// no evidence, not false evidence.
struct SensorSnapshot {
  bool camera_person = false;
  bool camera_multiple = false;
  bool keyboard_active = false;
  bool bluetooth_in_building = false;
  bool network_remote_active = false;
  bool mobile_connected = false;

  struct Enabled {
    bool camera = true;
    bool keyboard = true;
    bool bluetooth = true;
    bool network = true;
    bool mobile = true;
  } enabled;
};

// Fusion cascade, strongest evidence first: multiple people on camera
// means a visitor; a person on camera or an active keyboard means in
// office; a detectable wireless device means in building; then active
// remote, then mobile, else no state.
PresenceState fuse(const SensorSnapshot& snapshot);

}  // namespace privsum
