#include "privsum/presence.hpp"

#include "privsum/errors.hpp"

namespace privsum {

std::string_view state_name(StateType s) {
  switch (s) {
    case StateType::kInOffice:
      return "in_office";
    case StateType::kHasVisitor:
      return "has_visitor";
    case StateType::kInBuilding:
      return "in_building";
    case StateType::kActiveRemote:
      return "active_remote";
    case StateType::kMobile:
      return "mobile";
  }
  throw ValidationError("bad state type");
}

StateType state_from_name(std::string_view name) {
  for (unsigned i = 0; i < kStateCount; ++i) {
    auto s = static_cast<StateType>(i);
    if (state_name(s) == name) return s;
  }
  throw ValidationError("unknown state name: " + std::string(name));
}

PresenceState PresenceState::from_bits(std::string_view bits) {
  if (!validate(bits))
    throw ValidationError("illegal presence bit pattern: " +
                          std::string(bits));
  PresenceState p;
  for (unsigned i = 0; i < kStateCount; ++i)
    if (bits[i] == '1') p.active_ = static_cast<StateType>(i);
  return p;
}

bool PresenceState::validate(std::string_view bits) {
  if (bits.size() != kStateCount) return false;
  unsigned ones = 0;
  for (char c : bits) {
    if (c == '1')
      ++ones;
    else if (c != '0')
      return false;
  }
  return ones <= 1;
}

std::string PresenceState::bits() const {
  std::string out(kStateCount, '0');
  if (active_) out[static_cast<unsigned>(*active_)] = '1';
  return out;
}

std::array<std::uint64_t, kStateCount> PresenceState::residues() const {
  std::array<std::uint64_t, kStateCount> out{};
  if (active_) out[static_cast<unsigned>(*active_)] = 1;
  return out;
}

PresenceState fuse(const SensorSnapshot& s) {
  if (s.enabled.camera && s.camera_multiple)
    return PresenceState::of(StateType::kHasVisitor);
  if ((s.enabled.camera && s.camera_person) ||
      (s.enabled.keyboard && s.keyboard_active))
    return PresenceState::of(StateType::kInOffice);
  if (s.enabled.bluetooth && s.bluetooth_in_building)
    return PresenceState::of(StateType::kInBuilding);
  if (s.enabled.network && s.network_remote_active)
    return PresenceState::of(StateType::kActiveRemote);
  if (s.enabled.mobile && s.mobile_connected)
    return PresenceState::of(StateType::kMobile);
  return PresenceState::none();
}

}  // namespace privsum
