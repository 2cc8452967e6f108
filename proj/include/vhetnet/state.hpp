#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vhetnet {

enum class OffloadTarget : std::uint8_t { Mbs = 0, Haps = 1 };

inline const char* to_string(OffloadTarget t) { return t == OffloadTarget::Mbs ? "Mbs" : "Haps"; }

// ON/OFF decision per SBS plus, for every OFF SBS, the tier that absorbs its
// traffic. MBS and HAPS are implicitly always ON.
struct StateVector {
  std::vector<bool> on_off;
  std::vector<std::optional<OffloadTarget>> offload_target;

  StateVector() = default;
  explicit StateVector(std::size_t s) : on_off(s, true), offload_target(s) {}

  static StateVector all_on(std::size_t s) { return StateVector(s); }

  std::size_t size() const { return on_off.size(); }

  void switch_off(std::size_t j, OffloadTarget t) {
    on_off.at(j) = false;
    offload_target.at(j) = t;
  }
  void switch_on(std::size_t j) {
    on_off.at(j) = true;
    offload_target.at(j).reset();
  }

  std::size_t off_count() const {
    std::size_t n = 0;
    for (bool b : on_off) n += b ? 0 : 1;
    return n;
  }

  // Targets present exactly on OFF entries.
  bool valid() const {
    if (on_off.size() != offload_target.size()) return false;
    for (std::size_t j = 0; j < on_off.size(); ++j)
      if (on_off[j] == offload_target[j].has_value()) return false;
    return true;
  }

  // "1" = ON, "0" = OFF, SBS 0 first.
  std::string bitstring() const {
    std::string out;
    out.reserve(on_off.size());
    for (bool b : on_off) out.push_back(b ? '1' : '0');
    return out;
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

}  // namespace vhetnet
