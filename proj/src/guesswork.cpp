#include "puf/guesswork.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "puf/error.hpp"

namespace puf {
namespace {

void check_rho(double rho) {
  if (!std::isfinite(rho) || rho <= 0.0) throw ValidationError("rho must be positive");
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

// sum_{r=start+1}^{start+count} r^rho
double rank_power_sum(double start, double count, double rho) {
  if (rho == 1.0) return count * start + count * (count + 1.0) / 2.0;
  if (rho == 2.0) {
    auto s2 = [](double n) { return n * (n + 1.0) * (2.0 * n + 1.0) / 6.0; };
    return s2(start + count) - s2(start);
  }
  double total = 0.0;
  const auto n = static_cast<std::uint64_t>(count);
  for (std::uint64_t i = 1; i <= n; ++i) total += std::pow(start + static_cast<double>(i), rho);
  return total;
}

double binomial(unsigned n, unsigned k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

void check_class_length(unsigned m, double rho) {
  const bool closed_form = rho == 1.0 || rho == 2.0;
  if (m == 0) throw ValidationError("string length must be at least 1");
  if (m > (closed_form ? 62u : kDefaultEnumerationCap)) {
    throw ValidationError("string length " + std::to_string(m) +
                          " exceeds enumeration cap; use guesswork_growth_rate");
  }
}

struct WeightedClass {
  double prob;   // probability of each member
  double count;  // number of members
};

// Classes sorted by descending member probability; each contributes a
// contiguous block of ranks.
double moment_over_classes(std::vector<WeightedClass> classes, double rho) {
  std::stable_sort(classes.begin(), classes.end(),
                   [](const WeightedClass& a, const WeightedClass& b) { return a.prob > b.prob; });
  double start = 0.0;
  double total = 0.0;
  for (const auto& c : classes) {
    if (c.count == 0.0) continue;
    if (c.prob > 0.0) total += c.prob * rank_power_sum(start, c.count, rho);
    start += c.count;
  }
  return total;
}

}  // namespace

double shannon_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

double shannon_entropy(const BitPMF& p) { return binary_entropy(p.p1()); }

double shannon_entropy(const StringPMF& pmf) {
  if (pmf.is_explicit()) return shannon_entropy(pmf.table());
  double h = 0.0;
  for (const auto& b : pmf.factors()) h += shannon_entropy(b);
  return h;
}

double renyi_entropy(std::span<const double> probs, double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw ValidationError("Renyi order must be positive");
  }
  if (alpha == 1.0) return shannon_entropy(probs);
  double sum = 0.0;
  for (double p : probs)
    if (p > 0.0) sum += std::pow(p, alpha);
  return std::log2(sum) / (1.0 - alpha);
}

double renyi_entropy(const BitPMF& p, double alpha) {
  const double probs[2] = {p.p0(), p.p1()};
  return renyi_entropy(probs, alpha);
}

double renyi_entropy(const StringPMF& pmf, double alpha) {
  if (pmf.is_explicit()) return renyi_entropy(pmf.table(), alpha);
  // Renyi entropy is additive over independent bits.
  double h = 0.0;
  for (const auto& b : pmf.factors()) h += renyi_entropy(b, alpha);
  return h;
}

double renyi_conditional_entropy(const JointPMF& joint, double rho) {
  check_rho(rho);
  const double a = 1.0 / (1.0 + rho);
  double sum = 0.0;
  for (int y = 0; y < 2; ++y) {
    double inner = 0.0;
    for (int x = 0; x < 2; ++x)
      if (joint.at(x, y) > 0.0) inner += std::pow(joint.at(x, y), a);
    sum += std::pow(inner, 1.0 + rho);
  }
  return std::max(0.0, std::log2(sum) / rho);
}

double min_entropy(std::span<const double> probs) {
  if (probs.empty()) throw ValidationError("empty PMF");
  return -std::log2(*std::max_element(probs.begin(), probs.end()));
}

double min_entropy(const BitPMF& p) { return -std::log2(std::max(p.p0(), p.p1())); }

double min_entropy(const StringPMF& pmf) { return -std::log2(guess1_probability(pmf)); }

double min_entropy_rate(const StringPMF& pmf) { return min_entropy(pmf) / pmf.length(); }

double guess1_probability(const StringPMF& pmf) {
  if (pmf.is_explicit()) {
    return *std::max_element(pmf.table().begin(), pmf.table().end());
  }
  double p = 1.0;
  for (const auto& b : pmf.factors()) p *= std::max(b.p0(), b.p1());
  return p;
}

double mutual_information(const JointPMF& joint) {
  const auto [px, py] = marginals(joint);
  double info = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double pxy = joint.at(x, y);
      if (pxy > 0.0) info += pxy * std::log2(pxy / (px[x] * py[y]));
    }
  }
  return std::max(0.0, info);
}

std::vector<std::uint64_t> dictionary_order(std::span<const double> probs) {
  std::vector<std::uint64_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return probs[a] > probs[b]; });
  return order;
}

double guesswork_moment_exact(const StringPMF& pmf, double rho) {
  check_rho(rho);
  const auto probs = pmf.materialize();
  const auto order = dictionary_order(probs);
  double total = 0.0;
  for (std::uint64_t r = 0; r < order.size(); ++r) {
    const double p = probs[order[r]];
    if (p > 0.0) total += std::pow(static_cast<double>(r + 1), rho) * p;
  }
  return total;
}

double conditional_guesswork_moment_exact(const StringJointPMF& joint, double rho) {
  check_rho(rho);
  std::vector<double> column(joint.x_size());
  double total = 0.0;
  for (std::uint64_t y = 0; y < joint.y_size(); ++y) {
    double py = 0.0;
    for (std::uint64_t x = 0; x < joint.x_size(); ++x) {
      column[x] = joint.at(x, y);
      py += column[x];
    }
    if (py <= 0.0) continue;
    // Ordering by P(x,y) equals ordering by P(x|y) for fixed y.
    const auto order = dictionary_order(column);
    for (std::uint64_t r = 0; r < order.size(); ++r) {
      const double p = column[order[r]];
      if (p > 0.0) total += std::pow(static_cast<double>(r + 1), rho) * p;
    }
  }
  return total;
}

double conditional_guesswork_moment_exact(const JointPMF& joint, double rho) {
  const auto f = joint.flat();
  return conditional_guesswork_moment_exact(StringJointPMF(1, 1, {f.begin(), f.end()}), rho);
}

double iid_guesswork_moment(const BitPMF& p, unsigned m, double rho) {
  check_rho(rho);
  check_class_length(m, rho);
  std::vector<WeightedClass> classes;
  classes.reserve(m + 1);
  for (unsigned w = 0; w <= m; ++w) {
    classes.push_back({std::pow(p.p1(), w) * std::pow(p.p0(), m - w), binomial(m, w)});
  }
  return moment_over_classes(std::move(classes), rho);
}

double noisy_conditional_guesswork_moment(const BitPMF& p, const NoiseChannel& noise, unsigned m,
                                          double rho) {
  check_rho(rho);
  check_class_length(m, rho);
  const double e = noise.eps();
  // P(x, y) for x with k ones in total and d disagreements with y.
  auto joint_prob = [&](unsigned k, unsigned d) {
    return std::pow(p.p1(), k) * std::pow(p.p0(), m - k) * std::pow(e, d) *
           std::pow(1.0 - e, m - d);
  };
  double total = 0.0;
  for (unsigned w = 0; w <= m; ++w) {
    // For one y of weight w: x has k1 ones on y's ones and k0 ones elsewhere.
    std::vector<WeightedClass> classes;
    for (unsigned k1 = 0; k1 <= w; ++k1) {
      for (unsigned k0 = 0; k0 <= m - w; ++k0) {
        classes.push_back(
            {joint_prob(k1 + k0, (w - k1) + k0), binomial(w, k1) * binomial(m - w, k0)});
      }
    }
    total += binomial(m, w) * moment_over_classes(std::move(classes), rho);
  }
  return total;
}

double guesswork_growth_rate(const BitPMF& p, double rho) {
  check_rho(rho);
  return rho * renyi_entropy(p, 1.0 / (1.0 + rho));
}

double guesswork_growth_rate(const JointPMF& joint, double rho) {
  return rho * renyi_conditional_entropy(joint, rho);
}

double noisy_guesswork_exponent(const BitPMF& bias, const NoiseChannel& noise, double rho) {
  check_rho(rho);
  const BitPMF normalized(std::min(bias.p1(), 1.0 - bias.p1()));
  const double value =
      rho * renyi_entropy(normalized, 1.0 / (1.0 + rho)) - rho * binary_entropy(noise.eps());
  // Rounding residue at the clamp point (p = eps = 1/2) is reported as 0.
  return value > 1e-12 ? value : 0.0;
}

double effective_bits(const BitPMF& bias, const NoiseChannel& noise, unsigned n) {
  if (n == 0) throw ValidationError("response length must be at least 1");
  return noisy_guesswork_exponent(bias, noise, 1.0) * n;
}

double guesswork_distance(const JointPMF& joint, double rho) {
  check_rho(rho);
  const auto [px, py] = marginals(joint);
  const double hx = renyi_entropy(px, 1.0 / (1.0 + rho));
  if (hx <= 1e-15) throw ValidationError("distance undefined: X is deterministic");
  const double hxy = renyi_conditional_entropy(joint, rho);
  return std::clamp((hx - hxy) / hx, 0.0, 1.0);
}

GuessworkReport guesswork_report(const BitPMF& bias, const NoiseChannel& noise, unsigned length,
                                 double rho) {
  if (length == 0) throw ValidationError("response length must be at least 1");
  GuessworkReport report;
  report.rho = rho;
  report.length = length;
  report.exponent = noisy_guesswork_exponent(bias, noise, rho);
  report.effective_bits = report.exponent * length;
  const bool enumerable = length <= kDefaultEnumerationCap || rho == 1.0 || rho == 2.0;
  if (noise.eps() == 0.0 && enumerable && length <= 62) {
    report.exact_moment = iid_guesswork_moment(bias, length, rho);
  }
  return report;
}

}  // namespace puf
