#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "privsum/presence.hpp"

namespace privsum {

// One decrypted (bin, state) cell.
struct DecryptedBin {
  std::uint32_t bin = 0;
  StateType state = StateType::kInOffice;
  std::uint64_t sum = 0;
  std::uint64_t count = 0;
  double average = 0;
  double variance = 0;
};

struct HistogramRow {
  StateType state = StateType::kInOffice;
  std::uint32_t bin_start_seconds = 0;
  double average = 0;
  double smoothed_average = 0;
};

// Lays the decrypted averages out per state across time-of-day bins and
// applies a centered circular moving average (window must be odd;
// window 1 is the identity).
std::vector<HistogramRow> build_histogram(const std::vector<DecryptedBin>& bins,
                                          std::uint32_t bin_width,
                                          unsigned smooth_window = 3);

// CSV schema: state,bin_start_seconds,average,smoothed_average
void write_histogram_csv(std::ostream& os,
                         const std::vector<HistogramRow>& rows);

}  // namespace privsum
