#include "puf/attack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "puf/bit_matrix.hpp"
#include "puf/error.hpp"
#include "puf/guesswork.hpp"
#include "puf/parallel.hpp"
#include "puf/rng.hpp"

namespace puf {
namespace {

constexpr std::uint64_t kTrialsPerBlock = 4096;
constexpr std::uint64_t kDenseCurveLimit = 1024;

std::vector<std::uint64_t> curve_grid(unsigned m) {
  const std::uint64_t n = std::uint64_t{1} << m;
  std::vector<std::uint64_t> grid;
  if (n <= kDenseCurveLimit) {
    for (std::uint64_t k = 1; k <= n; ++k) grid.push_back(k);
  } else {
    for (std::uint64_t k = 1; k <= n; k <<= 1) grid.push_back(k);
  }
  return grid;
}

// Accumulators for one block of trials; merged in block order.
struct Tally {
  double sum_rank = 0.0;
  double sum_pow = 0.0;
  double sum_pow_sq = 0.0;
  std::vector<std::uint64_t> bucket;  // first grid index with k >= rank

  void add(std::uint64_t rank, double rho, const std::vector<std::uint64_t>& grid) {
    const double g = static_cast<double>(rank);
    const double gp = std::pow(g, rho);
    sum_rank += g;
    sum_pow += gp;
    sum_pow_sq += gp * gp;
    const auto it = std::lower_bound(grid.begin(), grid.end(), rank);
    ++bucket[static_cast<std::size_t>(it - grid.begin())];
  }
};

template <typename TrialFn>
AttackResult run_trials(unsigned m, std::uint64_t trials, std::uint64_t seed, double rho,
                        TrialFn&& trial) {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (!(rho > 0.0)) throw ValidationError("rho must be positive");
  const auto grid = curve_grid(m);
  const std::uint64_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
  std::vector<Tally> tallies(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng(derive_seed(seed, {b}));
    Tally t;
    t.bucket.assign(grid.size(), 0);
    const std::uint64_t begin = b * kTrialsPerBlock;
    const std::uint64_t end = std::min(trials, begin + kTrialsPerBlock);
    for (std::uint64_t i = begin; i < end; ++i) t.add(trial(rng), rho, grid);
    tallies[b] = std::move(t);
  });

  Tally total;
  total.bucket.assign(grid.size(), 0);
  for (const auto& t : tallies) {
    total.sum_rank += t.sum_rank;
    total.sum_pow += t.sum_pow;
    total.sum_pow_sq += t.sum_pow_sq;
    for (std::size_t i = 0; i < grid.size(); ++i) total.bucket[i] += t.bucket[i];
  }

  AttackResult result;
  result.trials = trials;
  result.length = m;
  result.rho = rho;
  const double n = static_cast<double>(trials);
  result.mean_guesses = total.sum_rank / n;
  result.moment_rho = total.sum_pow / n;
  if (trials > 1) {
    const double var = std::max(0.0, (total.sum_pow_sq - n * result.moment_rho * result.moment_rho) / (n - 1.0));
    result.moment_std_error = std::sqrt(var / n);
  }
  std::uint64_t cumulative = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cumulative += total.bucket[i];
    result.success_curve.emplace_back(grid[i], static_cast<double>(cumulative) / n);
  }
  return result;
}

std::uint64_t binom(unsigned n, unsigned k) {
  static const auto table = [] {
    std::vector<std::vector<std::uint64_t>> t(64, std::vector<std::uint64_t>(64, 0));
    for (unsigned i = 0; i < 64; ++i) {
      t[i][0] = 1;
      for (unsigned j = 1; j <= i; ++j) t[i][j] = t[i - 1][j - 1] + (j <= i - 1 ? t[i - 1][j] : 0);
    }
    return t;
  }();
  if (k > n) return 0;
  return table[n][k];
}

// Ranks x given y for an i.i.d. source behind a binary symmetric channel.
// Strings fall into classes by (ones of x on y's ones, ones of x elsewhere);
// all members of a class share P(x, y).
class PosteriorRanker {
 public:
  PosteriorRanker(unsigned m, const BitPMF& source, const NoiseChannel& channel) : m_(m) {
    if (m == 0 || m > kDefaultEnumerationCap) {
      throw ValidationError("noisy attack length must lie in [1, " +
                            std::to_string(kDefaultEnumerationCap) + "]");
    }
    const double e = channel.eps();
    table_.assign((m + 1) * (m + 1), 0.0);
    for (unsigned k = 0; k <= m; ++k)
      for (unsigned d = 0; d <= m; ++d)
        table_[k * (m + 1) + d] = std::pow(source.p1(), k) * std::pow(source.p0(), m - k) *
                                  std::pow(e, d) * std::pow(1.0 - e, m - d);
  }

  std::uint64_t rank(std::uint64_t x, std::uint64_t y) const {
    const std::uint64_t mask = (std::uint64_t{1} << m_) - 1;
    if (x > mask || y > mask) throw ValidationError("string value out of range");
    const auto w = static_cast<unsigned>(std::popcount(y));
    const auto k1 = static_cast<unsigned>(std::popcount(x & y));
    const auto k0 = static_cast<unsigned>(std::popcount(x & ~y & mask));
    const double px = prob(w, k1, k0);
    std::uint64_t rank = 1;
    for (unsigned a1 = 0; a1 <= w; ++a1) {
      for (unsigned a0 = 0; a0 <= m_ - w; ++a0) {
        const double pc = prob(w, a1, a0);
        const double tol = 1e-12 * std::max(pc, px);
        if (pc - px > tol) {
          rank += binom(w, a1) * binom(m_ - w, a0);
        } else if (std::abs(pc - px) <= tol) {
          rank += count_smaller(x, y, a1, a0);
        }
      }
    }
    return rank;
  }

 private:
  double prob(unsigned w, unsigned a1, unsigned a0) const {
    return table_[(a1 + a0) * (m_ + 1) + (w - a1) + a0];
  }

  // Strings x' < x in class (a1, a0) relative to y.
  std::uint64_t count_smaller(std::uint64_t x, std::uint64_t y, unsigned a1, unsigned a0) const {
    unsigned rem1 = static_cast<unsigned>(std::popcount(y));
    unsigned rem0 = m_ - rem1;
    unsigned need1 = a1;
    unsigned need0 = a0;
    std::uint64_t total = 0;
    for (unsigned i = 0; i < m_; ++i) {
      const unsigned bit = m_ - 1 - i;
      const bool on_y = (y >> bit) & 1U;
      if (on_y) --rem1; else --rem0;
      if (((x >> bit) & 1U) == 0) continue;
      // x' places 0 here and completes freely.
      total += binom(rem1, need1) * binom(rem0, need0);
      unsigned& need = on_y ? need1 : need0;
      if (need == 0) break;
      --need;
    }
    return total;
  }

  unsigned m_;
  std::vector<double> table_;
};

}  // namespace

std::uint64_t bits_to_value(std::span<const std::uint8_t> bits) {
  if (bits.empty() || bits.size() > 62) throw ValidationError("bit string length must be 1..62");
  std::uint64_t v = 0;
  for (auto b : bits) {
    if (b > 1) throw ValidationError("bit string entries must be 0 or 1");
    v = (v << 1) | b;
  }
  return v;
}

std::vector<std::uint8_t> parse_bit_string(const std::string& text) {
  std::vector<std::uint8_t> bits;
  for (char c : text) {
    if (c != '0' && c != '1') throw ValidationError("bit string must contain only 0 and 1");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return bits;
}

std::uint64_t guess_rank(const StringPMF& pmf, std::span<const std::uint8_t> secret) {
  if (secret.size() != pmf.length()) throw ValidationError("secret length does not match PMF");
  const auto probs = pmf.materialize();
  const std::uint64_t x = bits_to_value(secret);
  const double px = probs[x];
  std::uint64_t rank = 1;
  for (std::uint64_t v = 0; v < probs.size(); ++v) {
    if (probs[v] > px || (probs[v] == px && v < x)) ++rank;
  }
  return rank;
}

double success_within(const StringPMF& pmf, std::uint64_t k) {
  if (k < 1 || k > pmf.size()) throw ValidationError("k must lie in [1, 2^m]");
  auto probs = pmf.materialize();
  std::sort(probs.begin(), probs.end(), std::greater<>());
  double total = 0.0;
  for (std::uint64_t i = 0; i < k; ++i) total += probs[i];
  return std::min(1.0, total);
}

std::vector<std::pair<std::uint64_t, double>> exact_success_curve(const StringPMF& pmf) {
  auto probs = pmf.materialize();
  std::sort(probs.begin(), probs.end(), std::greater<>());
  std::vector<std::pair<std::uint64_t, double>> curve;
  double cumulative = 0.0;
  std::uint64_t done = 0;
  for (auto k : curve_grid(pmf.length())) {
    for (; done < k; ++done) cumulative += probs[done];
    curve.emplace_back(k, std::min(1.0, cumulative));
  }
  return curve;
}

AttackResult simulate_attack(const StringPMF& pmf, std::uint64_t trials, std::uint64_t seed,
                             double rho) {
  const auto probs = pmf.materialize();
  const auto order = dictionary_order(probs);
  std::vector<double> cumulative(order.size());
  double acc = 0.0;
  std::uint64_t last_positive = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    acc += probs[order[r]];
    cumulative[r] = acc;
    if (probs[order[r]] > 0.0) last_positive = r;
  }
  return run_trials(pmf.length(), trials, seed, rho, [&](Rng& rng) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = std::min<std::uint64_t>(static_cast<std::uint64_t>(it - cumulative.begin()), last_positive);
    return idx + 1;
  });
}

std::uint64_t posterior_rank(std::uint64_t x, std::uint64_t y, unsigned m, const BitPMF& source,
                             const NoiseChannel& channel) {
  return PosteriorRanker(m, source, channel).rank(x, y);
}

AttackResult simulate_noisy_attack(const BitPMF& source, unsigned m, const NoiseChannel& channel,
                                   std::uint64_t trials, std::uint64_t seed, double rho) {
  const PosteriorRanker ranker(m, source, channel);
  auto result = run_trials(m, trials, seed, rho, [&](Rng& rng) {
    std::uint64_t x = 0;
    std::uint64_t noise = 0;
    for (unsigned i = 0; i < m; ++i) {
      x = (x << 1) | static_cast<std::uint64_t>(rng.bernoulli(source.p1()));
      noise = (noise << 1) | static_cast<std::uint64_t>(rng.bernoulli(channel.eps()));
    }
    return ranker.rank(x, x ^ noise);
  });
  result.per_bit_exponent = std::log2(result.mean_guesses) / m;
  return result;
}

std::string attack_result_json(const AttackResult& result) {
  using nlohmann::json;
  json curve = json::array();
  for (const auto& [k, p] : result.success_curve) curve.push_back({{"k", k}, {"probability", p}});
  json doc = {{"trials", result.trials},
              {"length_bits", result.length},
              {"rho", result.rho},
              {"mean_guesses", result.mean_guesses},
              {"moment_rho", result.moment_rho},
              {"moment_std_error", result.moment_std_error},
              {"success_curve", curve}};
  if (result.per_bit_exponent) doc["per_bit_exponent"] = *result.per_bit_exponent;
  return doc.dump(2) + "\n";
}

std::string success_curve_csv(const std::vector<std::pair<std::uint64_t, double>>& curve) {
  std::string out = "k,probability\n";
  for (const auto& [k, p] : curve) out += std::to_string(k) + "," + format_number(p) + "\n";
  return out;
}

}  // namespace puf
