#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "puf/prob_model.hpp"

// Empirical dictionary attacks against string sources.
namespace puf {

struct AttackResult {
  std::uint64_t trials = 0;
  unsigned length = 0;
  double rho = 1.0;
  double mean_guesses = 0.0;
  double moment_rho = 0.0;        // sample mean of G^rho
  double moment_std_error = 0.0;  // standard error of that mean
  /// (1/m) log2(mean_guesses); set by the noisy attack.
  std::optional<double> per_bit_exponent;
  /// Empirical P(G <= k) at increasing k, ending at k = 2^m.
  std::vector<std::pair<std::uint64_t, double>> success_curve;
};

/// Bits x_1..x_m, most significant first.
std::uint64_t bits_to_value(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> parse_bit_string(const std::string& text);

/// 1-based position of `secret` in dictionary order.
std::uint64_t guess_rank(const StringPMF& pmf, std::span<const std::uint8_t> secret);

/// Sum of the k largest probabilities.
double success_within(const StringPMF& pmf, std::uint64_t k);

/// Samples secrets from the PMF and records the rank an optimal attacker needs.
AttackResult simulate_attack(const StringPMF& pmf, std::uint64_t trials, std::uint64_t seed,
                             double rho = 1.0);

/// Rank of x when the attacker observes y = x xor noise and guesses in
/// descending P(x|y), ties by ascending string value.
std::uint64_t posterior_rank(std::uint64_t x, std::uint64_t y, unsigned m, const BitPMF& source,
                             const NoiseChannel& channel);

AttackResult simulate_noisy_attack(const BitPMF& source, unsigned m, const NoiseChannel& channel,
                                   std::uint64_t trials, std::uint64_t seed, double rho = 1.0);

std::string attack_result_json(const AttackResult& result);
/// Columns: k,probability
std::string success_curve_csv(const std::vector<std::pair<std::uint64_t, double>>& curve);

/// Exact P(G <= k) at the same k grid used by the simulations.
std::vector<std::pair<std::uint64_t, double>> exact_success_curve(const StringPMF& pmf);

}  // namespace puf
