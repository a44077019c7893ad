#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "puf/bit_matrix.hpp"

// Uniqueness and stability metrics over measured bit matrices.
namespace puf {

/// Fractional Hamming distance; throws on length mismatch or empty input.
double fhd(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

struct FhdStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over pairs
  std::size_t pairs = 0;
  /// histogram[k] = number of chip pairs at Hamming distance k (FHD k/L).
  std::vector<std::uint64_t> histogram;
};

/// Statistics over all chip pairs of the reference measurement.
FhdStats inter_fhd_stats(const BitMatrix& bits);

struct BerResult {
  Corner corner;
  std::size_t repeats = 0;
  std::size_t unstable_count = 0;
  std::size_t cells = 0;
  double ber = 0.0;
};

/// A cell is unstable at a corner when any read there differs from the
/// reference response.
BerResult ber(const BitMatrix& bits, const Corner& corner);

struct BreakdownRow {
  std::string structure_tag;
  std::size_t broken = 0;
  std::size_t cells = 0;
  double probability = 0.0;
};

struct BreakdownTable {
  std::vector<BreakdownRow> rows;
  std::vector<std::string> warnings;
};

/// The 17 structure tags of the test-chip layout.
const std::vector<std::string>& known_structure_tags();

/// Fraction of reference reads equal to 1 per structure tag (across chips and
/// duplicate locations). Locations whose tag is not in `known_tags` are
/// skipped with a warning; an empty list accepts every tag.
BreakdownTable breakdown_probability(const BitMatrix& bits,
                                     const std::vector<std::string>& known_tags =
                                         known_structure_tags());

/// Majority of an odd number of reads.
std::uint8_t majority_vote(std::span<const std::uint8_t> reads);

/// Probability that a majority of `reads` independent reads is wrong when
/// each read flips with `flip_probability` (`reads` odd).
double majority_vote_error(double flip_probability, unsigned reads);

/// Fraction of individual reads at `corner` that disagree with the reference.
double read_error_rate(const BitMatrix& bits, const Corner& corner);

/// Per-cell majority over every read at `corner`; result is chips x locations.
std::vector<std::uint8_t> majority_response(const BitMatrix& bits, const Corner& corner);

/// P(output 0) of a k-input OR over cells that each break with p_break.
double or_debias(double p_break, unsigned fan_in);

/// Percent with two decimals, truncated: 3/2376 -> "0.12%".
std::string format_ber_percent(double fraction);
/// Percent with one decimal, rounded: 16/99 -> "16.2%".
std::string format_probability_percent(double fraction);

}  // namespace puf
