#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "puf/prob_model.hpp"

// Guesswork, Renyi/Shannon/min-entropy and related information measures.
// All entropies and exponents are in bits.
namespace puf {

double shannon_entropy(std::span<const double> probs);
double shannon_entropy(const BitPMF& p);
double shannon_entropy(const StringPMF& pmf);

/// (1/(1-alpha)) log2 sum p^alpha for alpha > 0, alpha != 1.
double renyi_entropy(std::span<const double> probs, double alpha);
double renyi_entropy(const BitPMF& p, double alpha);
double renyi_entropy(const StringPMF& pmf, double alpha);

/// Renyi conditional entropy of order 1/(1+rho):
/// (1/rho) log2 sum_y (sum_x P(x,y)^(1/(1+rho)))^(1+rho).
double renyi_conditional_entropy(const JointPMF& joint, double rho);

double min_entropy(std::span<const double> probs);
double min_entropy(const BitPMF& p);
/// Whole-string min-entropy, -log2 max_x P(x).
double min_entropy(const StringPMF& pmf);
/// Per-symbol min-entropy of a string source.
double min_entropy_rate(const StringPMF& pmf);

/// Probability that the first dictionary guess is correct.
double guess1_probability(const StringPMF& pmf);

double mutual_information(const JointPMF& joint);

/// Indices of all strings in dictionary order: descending probability, ties
/// by ascending string value.
std::vector<std::uint64_t> dictionary_order(std::span<const double> probs);

/// E[G^rho] under the optimal (dictionary) order, by explicit enumeration.
double guesswork_moment_exact(const StringPMF& pmf, double rho);

/// E[G(X|Y)^rho]: per observed y, guesses follow descending P(x|y).
double conditional_guesswork_moment_exact(const StringJointPMF& joint, double rho);
double conditional_guesswork_moment_exact(const JointPMF& joint, double rho);

/// Exact E[G^rho] for i.i.d. Bernoulli strings by grouping strings of equal
/// Hamming weight. Independent of guesswork_moment_exact.
double iid_guesswork_moment(const BitPMF& p, unsigned m, double rho);

/// Exact E[G(X|Y)^rho] for X i.i.d. Bernoulli(p) and Y = X xor N, grouping
/// strings by (weight of y, ones of x inside / outside the support of y).
double noisy_conditional_guesswork_moment(const BitPMF& p, const NoiseChannel& noise, unsigned m,
                                          double rho);

/// rho * H_{1/(1+rho)}(X), the per-symbol growth rate of E[G^rho].
double guesswork_growth_rate(const BitPMF& p, double rho);
/// rho * H_{1/(1+rho)}(X|Y).
double guesswork_growth_rate(const JointPMF& joint, double rho);

/// max(rho H_{1/(1+rho)}(p) - rho H(eps), 0). Bias above 1/2 is mirrored to
/// 1 - p, which leaves the Renyi entropy unchanged.
double noisy_guesswork_exponent(const BitPMF& bias, const NoiseChannel& noise, double rho);

/// max(H_{1/2}(p) - H(eps), 0) * n.
double effective_bits(const BitPMF& bias, const NoiseChannel& noise, unsigned n);

/// (H_a(X) - H_a(X|Y)) / H_a(X) with a = 1/(1+rho). Throws when H_a(X) = 0.
double guesswork_distance(const JointPMF& joint, double rho);

struct GuessworkReport {
  double rho = 1.0;
  unsigned length = 0;
  /// E[G^rho] of the noiseless source; present when the length is enumerable
  /// and the channel is noiseless.
  std::optional<double> exact_moment;
  double exponent = 0.0;
  double effective_bits = 0.0;
};

GuessworkReport guesswork_report(const BitPMF& bias, const NoiseChannel& noise, unsigned length,
                                 double rho);

}  // namespace puf
