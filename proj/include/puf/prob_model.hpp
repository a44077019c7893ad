#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace puf {

/// Largest string length whose PMF may be materialized as an explicit table
/// (2^24 entries).
inline constexpr unsigned kDefaultEnumerationCap = 24;

inline constexpr double kJointTolerance = 1e-12;
inline constexpr double kStringTolerance = 1e-9;

/// Distribution of a single bit, stored as P(1).
class BitPMF {
 public:
  explicit BitPMF(double p1);

  double p1() const { return p1_; }
  double p0() const { return 1.0 - p1_; }
  double operator[](int bit) const { return bit ? p1_ : 1.0 - p1_; }

  friend bool operator==(const BitPMF&, const BitPMF&) = default;

 private:
  double p1_;
};

/// Distribution of a bit pair, indexed as at(x, y).
class JointPMF {
 public:
  using Table = std::array<std::array<double, 2>, 2>;

  explicit JointPMF(const Table& probs);

  double at(int x, int y) const { return probs_[x][y]; }
  const Table& table() const { return probs_; }
  /// Row-major flattening {P(0,0), P(0,1), P(1,0), P(1,1)}.
  std::array<double, 4> flat() const;

 private:
  Table probs_;
};

using JointCounts = std::array<std::array<std::uint64_t, 2>, 2>;

/// Relative-frequency estimate; `pseudo_count` is added to every cell before
/// normalizing (0 disables smoothing).
JointPMF estimate_joint(const JointCounts& counts, double pseudo_count = 0.0);

std::pair<BitPMF, BitPMF> marginals(const JointPMF& joint);

JointPMF product_joint(const BitPMF& px, const BitPMF& py);

/// PMF over m-bit strings. String value x encodes x_1..x_m with x_1 as the
/// most significant bit. Either an explicit 2^m table or a per-bit product
/// evaluated lazily.
class StringPMF {
 public:
  static StringPMF explicit_table(unsigned m, std::vector<double> probs,
                                  unsigned cap = kDefaultEnumerationCap);
  static StringPMF product(std::vector<BitPMF> bits);

  unsigned length() const { return m_; }
  std::uint64_t size() const { return std::uint64_t{1} << m_; }
  bool is_explicit() const { return !probs_.empty(); }

  double prob(std::uint64_t x) const;

  /// Explicit probabilities; throws ValidationError when m exceeds `cap`.
  std::vector<double> materialize(unsigned cap = kDefaultEnumerationCap) const;

  /// Explicit table view (empty for product form).
  std::span<const double> table() const { return probs_; }
  /// Per-bit factors (empty for explicit form).
  std::span<const BitPMF> factors() const { return bits_; }

 private:
  StringPMF() = default;

  unsigned m_ = 0;
  std::vector<double> probs_;
  std::vector<BitPMF> bits_;
  bool identical_bits_ = false;
};

enum class Materialize { Explicit, Lazy };

/// i.i.d. Bernoulli(p) strings of length m. P(x) is evaluated as
/// p^w (1-p)^(m-w) so that equal-weight strings tie exactly.
StringPMF iid_string_pmf(const BitPMF& p, unsigned m,
                         Materialize form = Materialize::Explicit,
                         unsigned cap = kDefaultEnumerationCap);

/// Joint PMF over (X-string, Y-string), probs[x * 2^my + y].
class StringJointPMF {
 public:
  StringJointPMF(unsigned mx, unsigned my, std::vector<double> probs);

  unsigned x_length() const { return mx_; }
  unsigned y_length() const { return my_; }
  std::uint64_t x_size() const { return std::uint64_t{1} << mx_; }
  std::uint64_t y_size() const { return std::uint64_t{1} << my_; }
  double at(std::uint64_t x, std::uint64_t y) const { return probs_[x * y_size() + y]; }
  std::span<const double> table() const { return probs_; }

  StringPMF x_marginal() const;
  StringPMF y_marginal() const;

 private:
  unsigned mx_;
  unsigned my_;
  std::vector<double> probs_;
};

/// Pairs (X_i, Y_i) drawn i.i.d. from `symbol`; both strings have length m.
StringJointPMF iid_string_joint(const JointPMF& symbol, unsigned m,
                                unsigned cap = kDefaultEnumerationCap);

/// Per-bit flip probability of a binary symmetric channel.
class NoiseChannel {
 public:
  explicit NoiseChannel(double eps);
  double eps() const { return eps_; }

 private:
  double eps_;
};

/// Per-symbol joint of (X, X xor N) with X ~ bias and N ~ Bernoulli(eps).
JointPMF noisy_observation_joint(const BitPMF& bias, const NoiseChannel& noise);

}  // namespace puf
