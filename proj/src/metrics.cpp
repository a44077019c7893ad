#include "puf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "puf/error.hpp"
#include "puf/parallel.hpp"

namespace puf {

double fhd(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw ValidationError("FHD needs equal-length bit vectors");
  if (a.empty()) throw ValidationError("FHD needs non-empty bit vectors");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] != b[i]);
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

FhdStats inter_fhd_stats(const BitMatrix& bits) {
  const std::size_t n = bits.chips();
  if (n < 2) throw ValidationError("inter-FHD needs at least two chips");
  const auto& ref = bits.reference();
  const std::size_t len = bits.locations();

  // Per first-chip histograms, merged in index order.
  std::vector<std::vector<std::uint64_t>> partial(n, std::vector<std::uint64_t>(len + 1, 0));
  parallel_for(n, [&](std::size_t i) {
    const auto a = bits.row(ref, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = bits.row(ref, j);
      std::size_t d = 0;
      for (std::size_t k = 0; k < len; ++k) d += (a[k] != b[k]);
      ++partial[i][d];
    }
  });

  FhdStats stats;
  stats.histogram.assign(len + 1, 0);
  for (const auto& h : partial)
    for (std::size_t k = 0; k <= len; ++k) stats.histogram[k] += h[k];
  stats.pairs = n * (n - 1) / 2;

  double sum = 0.0;
  for (std::size_t k = 0; k <= len; ++k)
    sum += static_cast<double>(stats.histogram[k]) * static_cast<double>(k) / len;
  stats.mean = sum / static_cast<double>(stats.pairs);
  double var = 0.0;
  for (std::size_t k = 0; k <= len; ++k) {
    const double dev = static_cast<double>(k) / len - stats.mean;
    var += static_cast<double>(stats.histogram[k]) * dev * dev;
  }
  stats.stddev = std::sqrt(var / static_cast<double>(stats.pairs));
  return stats;
}

BerResult ber(const BitMatrix& bits, const Corner& corner) {
  const auto idx = bits.sets_at(corner);
  if (idx.empty()) throw ValidationError("no measurements at corner " + corner.label());
  const auto& ref = bits.reference();
  BerResult result;
  result.corner = corner;
  result.repeats = idx.size();
  result.cells = bits.chips() * bits.locations();
  for (std::size_t cell = 0; cell < result.cells; ++cell) {
    const bool unstable = std::any_of(idx.begin(), idx.end(), [&](std::size_t s) {
      return bits.sets()[s].data[cell] != ref.data[cell];
    });
    result.unstable_count += unstable;
  }
  result.ber = static_cast<double>(result.unstable_count) / static_cast<double>(result.cells);
  return result;
}

const std::vector<std::string>& known_structure_tags() {
  static const std::vector<std::string> tags = {
      "M_T1", "M_T2", "M_T3", "M_T4", "V_T1", "V_T2", "V_T3", "V_T4", "P_T1",
      "P_T2", "P_T3", "P_T4", "Test1", "Test2", "Test3", "Test4", "Test5"};
  return tags;
}

BreakdownTable breakdown_probability(const BitMatrix& bits,
                                     const std::vector<std::string>& known_tags) {
  BreakdownTable table;
  std::map<std::string, std::size_t> row_of;
  const auto& ref = bits.reference();
  for (std::size_t l = 0; l < bits.locations(); ++l) {
    const auto& tag = bits.location_meta()[l].structure_tag;
    if (!known_tags.empty() && std::find(known_tags.begin(), known_tags.end(), tag) == known_tags.end()) {
      table.warnings.push_back("skipping " + location_column(l) + ": unknown structure tag '" + tag +
                               "'");
      continue;
    }
    auto [it, inserted] = row_of.emplace(tag, table.rows.size());
    if (inserted) table.rows.push_back({tag, 0, 0, 0.0});
    auto& row = table.rows[it->second];
    for (std::size_t c = 0; c < bits.chips(); ++c) {
      row.broken += bits.bit(ref, c, l);
      ++row.cells;
    }
  }
  for (auto& row : table.rows) {
    row.probability = static_cast<double>(row.broken) / static_cast<double>(row.cells);
  }
  return table;
}

std::uint8_t majority_vote(std::span<const std::uint8_t> reads) {
  if (reads.empty() || reads.size() % 2 == 0) {
    throw ValidationError("ambiguous vote; supply odd repeat count");
  }
  std::size_t ones = 0;
  for (auto r : reads) ones += (r != 0);
  return ones * 2 > reads.size() ? 1 : 0;
}

double majority_vote_error(double flip_probability, unsigned reads) {
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0)) {
    throw ValidationError("flip probability must lie in [0, 1]");
  }
  if (reads == 0 || reads % 2 == 0) throw ValidationError("ambiguous vote; supply odd repeat count");
  // Sum the binomial tail in log space.
  double total = 0.0;
  for (unsigned k = reads / 2 + 1; k <= reads; ++k) {
    if (flip_probability == 0.0) break;
    if (flip_probability == 1.0) return 1.0;
    const double log_term = std::lgamma(reads + 1.0) - std::lgamma(k + 1.0) -
                            std::lgamma(reads - k + 1.0) + k * std::log(flip_probability) +
                            (reads - k) * std::log1p(-flip_probability);
    total += std::exp(log_term);
  }
  return std::min(1.0, total);
}

double read_error_rate(const BitMatrix& bits, const Corner& corner) {
  const auto idx = bits.sets_at(corner);
  if (idx.empty()) throw ValidationError("no measurements at corner " + corner.label());
  const auto& ref = bits.reference();
  std::size_t errors = 0;
  std::size_t reads = 0;
  for (auto s : idx) {
    const auto& data = bits.sets()[s].data;
    for (std::size_t cell = 0; cell < data.size(); ++cell) errors += (data[cell] != ref.data[cell]);
    reads += data.size();
  }
  return static_cast<double>(errors) / static_cast<double>(reads);
}

std::vector<std::uint8_t> majority_response(const BitMatrix& bits, const Corner& corner) {
  const auto idx = bits.sets_at(corner);
  const std::size_t cells = bits.chips() * bits.locations();
  std::vector<std::uint8_t> out(cells);
  std::vector<std::uint8_t> reads(idx.size());
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (std::size_t r = 0; r < idx.size(); ++r) reads[r] = bits.sets()[idx[r]].data[cell];
    out[cell] = majority_vote(reads);
  }
  return out;
}

double or_debias(double p_break, unsigned fan_in) {
  if (!(p_break >= 0.0 && p_break <= 1.0)) throw ValidationError("p_break must lie in [0, 1]");
  if (fan_in < 1) throw ValidationError("OR fan-in must be at least 1");
  return std::pow(1.0 - p_break, static_cast<double>(fan_in));
}

std::string format_ber_percent(double fraction) {
  // Nudge before truncating so that exact hundredths survive binary rounding.
  const double hundredths = std::floor(fraction * 1e4 * (1.0 + 1e-12));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", hundredths / 100.0);
  return buf;
}

std::string format_probability_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", std::round(fraction * 1000.0) / 10.0);
  return buf;
}

}  // namespace puf
