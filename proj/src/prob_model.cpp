#include "puf/prob_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "puf/error.hpp"

namespace puf {
namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

void check_table(std::span<const double> probs, double tolerance, const char* what) {
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError(std::string(what) + ": negative or non-finite probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > tolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": probabilities sum to " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
}

void check_cap(unsigned m, unsigned cap) {
  if (m > cap || m >= 63) {
    throw ValidationError("string length " + std::to_string(m) + " exceeds enumeration cap " +
                          std::to_string(cap) +
                          "; use the asymptotic growth-rate API or a product-form PMF");
  }
}

}  // namespace

BitPMF::BitPMF(double p1) : p1_(p1) {
  if (!is_probability(p1)) throw ValidationError("bit probability must lie in [0, 1]");
}

JointPMF::JointPMF(const Table& probs) : probs_(probs) {
  const auto f = flat();
  check_table(f, kJointTolerance, "joint PMF");
}

std::array<double, 4> JointPMF::flat() const {
  return {probs_[0][0], probs_[0][1], probs_[1][0], probs_[1][1]};
}

JointPMF estimate_joint(const JointCounts& counts, double pseudo_count) {
  if (!std::isfinite(pseudo_count) || pseudo_count < 0.0) {
    throw ValidationError("smoothing pseudo-count must be non-negative");
  }
  double total = 0.0;
  for (const auto& row : counts)
    for (auto c : row) total += static_cast<double>(c) + pseudo_count;
  if (total <= 0.0) throw ValidationError("empty sample");
  JointPMF::Table probs{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      probs[x][y] = (static_cast<double>(counts[x][y]) + pseudo_count) / total;
  return JointPMF(probs);
}

std::pair<BitPMF, BitPMF> marginals(const JointPMF& joint) {
  const double px1 = joint.at(1, 0) + joint.at(1, 1);
  const double py1 = joint.at(0, 1) + joint.at(1, 1);
  return {BitPMF(std::clamp(px1, 0.0, 1.0)), BitPMF(std::clamp(py1, 0.0, 1.0))};
}

JointPMF product_joint(const BitPMF& px, const BitPMF& py) {
  JointPMF::Table probs{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) probs[x][y] = px[x] * py[y];
  return JointPMF(probs);
}

StringPMF StringPMF::explicit_table(unsigned m, std::vector<double> probs, unsigned cap) {
  check_cap(m, cap);
  if (probs.size() != (std::uint64_t{1} << m)) {
    throw ValidationError("explicit string PMF needs 2^m entries");
  }
  check_table(probs, kStringTolerance, "string PMF");
  StringPMF pmf;
  pmf.m_ = m;
  pmf.probs_ = std::move(probs);
  return pmf;
}

StringPMF StringPMF::product(std::vector<BitPMF> bits) {
  if (bits.empty()) throw ValidationError("string PMF needs at least one bit");
  if (bits.size() >= 63) throw ValidationError("product-form string PMF limited to 62 bits");
  StringPMF pmf;
  pmf.m_ = static_cast<unsigned>(bits.size());
  pmf.identical_bits_ =
      std::all_of(bits.begin(), bits.end(), [&](const BitPMF& b) { return b == bits.front(); });
  pmf.bits_ = std::move(bits);
  return pmf;
}

double StringPMF::prob(std::uint64_t x) const {
  if (x >= size()) throw ValidationError("string value out of range");
  if (is_explicit()) return probs_[x];
  if (identical_bits_) {
    const int w = std::popcount(x);
    return std::pow(bits_.front().p1(), w) * std::pow(bits_.front().p0(), static_cast<int>(m_) - w);
  }
  double p = 1.0;
  for (unsigned i = 0; i < m_; ++i) p *= bits_[i][(x >> (m_ - 1 - i)) & 1U];
  return p;
}

std::vector<double> StringPMF::materialize(unsigned cap) const {
  check_cap(m_, cap);
  if (is_explicit()) return probs_;
  std::vector<double> out(size());
  for (std::uint64_t x = 0; x < size(); ++x) out[x] = prob(x);
  return out;
}

StringPMF iid_string_pmf(const BitPMF& p, unsigned m, Materialize form, unsigned cap) {
  if (m == 0) throw ValidationError("string length must be at least 1");
  auto lazy = StringPMF::product(std::vector<BitPMF>(m, p));
  if (form == Materialize::Lazy) return lazy;
  check_cap(m, cap);
  return StringPMF::explicit_table(m, lazy.materialize(cap), cap);
}

StringJointPMF::StringJointPMF(unsigned mx, unsigned my, std::vector<double> probs)
    : mx_(mx), my_(my), probs_(std::move(probs)) {
  if (mx == 0 || my == 0) throw ValidationError("string joint needs non-empty strings");
  check_cap(mx + my, kDefaultEnumerationCap);
  if (probs_.size() != (std::uint64_t{1} << (mx + my))) {
    throw ValidationError("string joint PMF needs 2^(mx+my) entries");
  }
  check_table(probs_, kStringTolerance, "string joint PMF");
}

StringPMF StringJointPMF::x_marginal() const {
  std::vector<double> px(x_size(), 0.0);
  for (std::uint64_t x = 0; x < x_size(); ++x)
    for (std::uint64_t y = 0; y < y_size(); ++y) px[x] += at(x, y);
  return StringPMF::explicit_table(mx_, std::move(px));
}

StringPMF StringJointPMF::y_marginal() const {
  std::vector<double> py(y_size(), 0.0);
  for (std::uint64_t x = 0; x < x_size(); ++x)
    for (std::uint64_t y = 0; y < y_size(); ++y) py[y] += at(x, y);
  return StringPMF::explicit_table(my_, std::move(py));
}

StringJointPMF iid_string_joint(const JointPMF& symbol, unsigned m, unsigned cap) {
  if (m == 0) throw ValidationError("string length must be at least 1");
  check_cap(2 * m, cap);
  const std::uint64_t n = std::uint64_t{1} << m;
  std::vector<double> probs(n * n);
  for (std::uint64_t x = 0; x < n; ++x) {
    for (std::uint64_t y = 0; y < n; ++y) {
      // Count symbol pairs so that equal-type strings tie exactly.
      std::array<int, 4> type{};
      for (unsigned i = 0; i < m; ++i) {
        const unsigned shift = m - 1 - i;
        ++type[((x >> shift) & 1U) * 2 + ((y >> shift) & 1U)];
      }
      const auto f = symbol.flat();
      double p = 1.0;
      for (int t = 0; t < 4; ++t) p *= std::pow(f[t], type[t]);
      probs[x * n + y] = p;
    }
  }
  return StringJointPMF(m, m, std::move(probs));
}

NoiseChannel::NoiseChannel(double eps) : eps_(eps) {
  if (!std::isfinite(eps) || eps < 0.0 || eps > 0.5) {
    throw ValidationError("noise flip probability must lie in [0, 0.5]");
  }
}

JointPMF noisy_observation_joint(const BitPMF& bias, const NoiseChannel& noise) {
  const double e = noise.eps();
  JointPMF::Table probs{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) probs[x][y] = bias[x] * (x == y ? 1.0 - e : e);
  return JointPMF(probs);
}

}  // namespace puf
