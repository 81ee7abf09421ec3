#include "privsum/histogram.hpp"

#include <map>
#include <ostream>

#include "privsum/errors.hpp"

namespace privsum {

std::vector<HistogramRow> build_histogram(const std::vector<DecryptedBin>& bins,
                                          std::uint32_t bin_width,
                                          unsigned smooth_window) {
  if (bin_width == 0 || 86400 % bin_width != 0)
    throw ValidationError("bin width must divide 86400");
  if (smooth_window % 2 == 0)
    throw ValidationError("smoothing window must be odd");
  const std::uint32_t bin_count = 86400 / bin_width;
  if (smooth_window > bin_count)
    throw ValidationError("smoothing window exceeds the bin count");

  std::map<StateType, std::vector<double>> series;
  for (unsigned s = 0; s < kStateCount; ++s)
    series[static_cast<StateType>(s)].assign(bin_count, 0.0);
  for (const DecryptedBin& b : bins) {
    if (b.bin >= bin_count) throw ValidationError("bin index out of range");
    series[b.state][b.bin] = b.average;
  }

  std::vector<HistogramRow> rows;
  const int half = static_cast<int>(smooth_window) / 2;
  for (const auto& [state, values] : series) {
    for (std::uint32_t bin = 0; bin < bin_count; ++bin) {
      double acc = 0;
      for (int d = -half; d <= half; ++d) {
        const auto idx = static_cast<std::uint32_t>(
            (static_cast<long long>(bin) + d + bin_count) % bin_count);
        acc += values[idx];
      }
      rows.push_back(HistogramRow{state, bin * bin_width, values[bin],
                                  acc / smooth_window});
    }
  }
  return rows;
}

void write_histogram_csv(std::ostream& os,
                         const std::vector<HistogramRow>& rows) {
  os << "state,bin_start_seconds,average,smoothed_average\n";
  for (const HistogramRow& row : rows)
    os << state_name(row.state) << ',' << row.bin_start_seconds << ','
       << row.average << ',' << row.smoothed_average << '\n';
}

}  // namespace privsum
