#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "puf/error.hpp"
#include "puf/guesswork.hpp"

using namespace puf;
using doctest::Approx;

TEST_CASE("shannon entropy") {
  CHECK(shannon_entropy(BitPMF(0.5)) == 1.0);
  CHECK(shannon_entropy(BitPMF(0.15)) == Approx(0.60984).epsilon(1e-5));
  CHECK(1.0 - shannon_entropy(BitPMF(0.15)) == Approx(0.3902).epsilon(1e-4));
  CHECK(shannon_entropy(BitPMF(0.0)) == 0.0);
  CHECK(shannon_entropy(iid_string_pmf(BitPMF(0.15), 5)) == Approx(5 * oracle::h2(0.15)));
  CHECK(shannon_entropy(iid_string_pmf(BitPMF(0.15), 60, Materialize::Lazy)) ==
        Approx(60 * oracle::h2(0.15)));
}

TEST_CASE("renyi entropy") {
  CHECK(renyi_entropy(BitPMF(0.5), 0.5) == Approx(1.0));
  CHECK(renyi_entropy(BitPMF(0.45), 0.5) == Approx(0.9964).epsilon(1e-4));
  CHECK(std::abs(renyi_entropy(BitPMF(0.35), 0.5) - 0.96647) < 1e-4);
  CHECK(renyi_entropy(BitPMF(0.35), 0.5) ==
        Approx(2 * std::log2(std::sqrt(0.35) + std::sqrt(0.65))));
  CHECK_THROWS_AS(renyi_entropy(BitPMF(0.3), 0.0), ValidationError);
  CHECK_THROWS_AS(renyi_entropy(BitPMF(0.3), -1.0), ValidationError);
  // Product-form strings add per-bit entropies.
  const auto lazy = StringPMF::product({BitPMF(0.1), BitPMF(0.4), BitPMF(0.7)});
  CHECK(renyi_entropy(lazy, 0.5) ==
        Approx(oracle::renyi({0.1, 0.9}, 0.5) + oracle::renyi({0.4, 0.6}, 0.5) +
               oracle::renyi({0.7, 0.3}, 0.5)));
}

TEST_CASE("renyi conditional entropy") {
  CHECK(renyi_conditional_entropy(JointPMF({{{0.25, 0.25}, {0.25, 0.25}}}), 1.0) == Approx(1.0));
  CHECK(renyi_conditional_entropy(JointPMF({{{0.5, 0.0}, {0.0, 0.5}}}), 1.0) == Approx(0.0));
  CHECK(renyi_conditional_entropy(JointPMF({{{0.4, 0.1}, {0.1, 0.4}}}), 1.0) ==
        Approx(0.84800).epsilon(1e-4));
  CHECK(renyi_conditional_entropy(JointPMF({{{0.4, 0.1}, {0.1, 0.4}}}), 1.0) ==
        Approx(std::log2(1.8)));
}

TEST_CASE("guesswork moments by enumeration") {
  CHECK(guesswork_moment_exact(iid_string_pmf(BitPMF(0.5), 3), 1.0) == Approx(4.5));
  CHECK(guesswork_moment_exact(iid_string_pmf(BitPMF(0.3), 2), 1.0) == Approx(1.90));
  CHECK(guesswork_moment_exact(iid_string_pmf(BitPMF(0.3), 1), 2.0) == Approx(1.9));
  CHECK_THROWS_WITH_AS(guesswork_moment_exact(iid_string_pmf(BitPMF(0.3), 30, Materialize::Lazy), 1.0),
                       doctest::Contains("asymptotic"), ValidationError);
}

TEST_CASE("dictionary order breaks ties by string value") {
  const std::vector<double> p = {0.1, 0.3, 0.3, 0.3};
  const auto order = dictionary_order(p);
  CHECK(order == std::vector<std::uint64_t>{1, 2, 3, 0});
}

TEST_CASE("conditional guesswork moments") {
  CHECK(conditional_guesswork_moment_exact(JointPMF({{{0.5, 0.0}, {0.0, 0.5}}}), 1.0) == Approx(1.0));
  CHECK(conditional_guesswork_moment_exact(JointPMF({{{0.4, 0.1}, {0.1, 0.4}}}), 1.0) == Approx(1.2));
  const auto indep = product_joint(BitPMF(0.3), BitPMF(0.8));
  CHECK(conditional_guesswork_moment_exact(indep, 1.7) ==
        Approx(guesswork_moment_exact(iid_string_pmf(BitPMF(0.3), 1), 1.7)));
  // Zero-probability y rows are skipped.
  CHECK(conditional_guesswork_moment_exact(JointPMF({{{0.6, 0.0}, {0.4, 0.0}}}), 1.0) == Approx(1.4));
}

TEST_CASE("growth rates") {
  CHECK(guesswork_growth_rate(BitPMF(0.5), 1.0) == Approx(1.0));
  CHECK(std::abs(guesswork_growth_rate(BitPMF(0.3), 1.0) - 0.93854) < 1e-4);
  CHECK(guesswork_growth_rate(BitPMF(0.3), 1.0) == Approx(2 * std::log2(std::sqrt(0.3) + std::sqrt(0.7))));
  CHECK(guesswork_growth_rate(JointPMF({{{0.5, 0.0}, {0.0, 0.5}}}), 1.0) == Approx(0.0));
  CHECK(guesswork_growth_rate(BitPMF(0.3), 2.0) == Approx(2 * oracle::renyi({0.3, 0.7}, 1.0 / 3)));
}

TEST_CASE("noisy guesswork exponent") {
  CHECK(noisy_guesswork_exponent(BitPMF(0.5), NoiseChannel(0.10), 1.0) == Approx(0.531).epsilon(1e-3));
  CHECK(noisy_guesswork_exponent(BitPMF(0.35), NoiseChannel(0.05), 1.0) == Approx(0.680).epsilon(1e-3));
  CHECK(noisy_guesswork_exponent(BitPMF(0.5), NoiseChannel(0.5), 1.0) == 0.0);
  CHECK(noisy_guesswork_exponent(BitPMF(0.65), NoiseChannel(0.05), 1.0) ==
        Approx(noisy_guesswork_exponent(BitPMF(0.35), NoiseChannel(0.05), 1.0)));
  CHECK(128 * noisy_guesswork_exponent(BitPMF(0.5), NoiseChannel(0.10), 1.0) == Approx(68).epsilon(0.5 / 68));
  CHECK(128 * noisy_guesswork_exponent(BitPMF(0.35), NoiseChannel(0.05), 1.0) == Approx(87).epsilon(0.5 / 87));
}

TEST_CASE("effective bits") {
  CHECK(effective_bits(BitPMF(0.5), NoiseChannel(0.0012), 128) == Approx(126.3).epsilon(0.1 / 126.3));
  CHECK(effective_bits(BitPMF(0.5), NoiseChannel(0.15), 128) == Approx(49.9).epsilon(0.1 / 49.9));
  CHECK(effective_bits(BitPMF(0.5), NoiseChannel(0.0), 128) == Approx(128));
  for (double eps : {0.0, 0.0012, 0.05, 0.10, 0.15}) {
    CHECK(effective_bits(BitPMF(0.5), NoiseChannel(eps), 128) == Approx((1 - oracle::h2(eps)) * 128));
  }
  CHECK(effective_bits(BitPMF(0.5), NoiseChannel(0.5), 128) == 0.0);
}

TEST_CASE("min-entropy and first-guess probability") {
  CHECK(min_entropy(BitPMF(0.5)) == Approx(1.0));
  CHECK(min_entropy(BitPMF(0.3)) == Approx(0.5146).epsilon(1e-4));
  const auto pmf = iid_string_pmf(BitPMF(0.3), 2);
  CHECK(guess1_probability(pmf) == Approx(0.49));
  CHECK(guess1_probability(pmf) == Approx(std::exp2(-2 * min_entropy(BitPMF(0.3)))));
  CHECK(min_entropy_rate(pmf) == Approx(min_entropy(BitPMF(0.3))));
  const auto lazy = iid_string_pmf(BitPMF(0.3), 50, Materialize::Lazy);
  CHECK(guess1_probability(lazy) == Approx(std::pow(0.7, 50)));
}

TEST_CASE("mutual information") {
  CHECK(mutual_information(product_joint(BitPMF(0.2), BitPMF(0.7))) == Approx(0.0));
  CHECK(mutual_information(JointPMF({{{0.5, 0.0}, {0.0, 0.5}}})) == Approx(1.0));
  CHECK(mutual_information(JointPMF({{{0.4, 0.1}, {0.1, 0.4}}})) == Approx(0.27807).epsilon(1e-4));
  CHECK(mutual_information(JointPMF({{{0.4, 0.1}, {0.1, 0.4}}})) == Approx(1 - oracle::h2(0.8)));
}

TEST_CASE("guesswork distance") {
  CHECK(guesswork_distance(product_joint(BitPMF(0.5), BitPMF(0.5)), 1.0) == Approx(0.0));
  CHECK(guesswork_distance(JointPMF({{{0.5, 0.0}, {0.0, 0.5}}}), 1.0) == Approx(1.0));
  CHECK(guesswork_distance(JointPMF({{{0.4, 0.1}, {0.1, 0.4}}}), 1.0) == Approx(0.152).epsilon(1e-3));
  CHECK_THROWS_WITH_AS(guesswork_distance(JointPMF({{{0.5, 0.5}, {0.0, 0.0}}}), 1.0),
                       doctest::Contains("distance undefined"), ValidationError);
}

TEST_CASE("guesswork report") {
  const auto r = guesswork_report(BitPMF(0.3), NoiseChannel(0.0), 10, 1.0);
  REQUIRE(r.exact_moment);
  CHECK(*r.exact_moment == Approx(oracle::moment(oracle::iid_table(10, 0.3), 1.0)));
  CHECK(*r.exact_moment >= 1.0);
  CHECK(r.exponent == Approx(guesswork_growth_rate(BitPMF(0.3), 1.0)));
  CHECK(r.effective_bits == Approx(10 * (oracle::renyi({0.3, 0.7}, 0.5) - 0.0)));
  const auto big = guesswork_report(BitPMF(0.5), NoiseChannel(0.1), 128, 1.0);
  CHECK_FALSE(big.exact_moment);
  CHECK(big.effective_bits >= 0.0);
}

// Moment of a fixed ordering.
static double ordered_moment(const std::vector<double>& p, const std::vector<std::size_t>& order,
                             double rho) {
  double s = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) s += p[order[i]] * std::pow(i + 1.0, rho);
  return s;
}

TEST_CASE("property: dictionary order is optimal over all orderings (m <= 3)") {
  Rng rng(21);
  for (int inst = 0; inst < 30; ++inst) {
    const unsigned m = 1 + inst % 3;
    const auto p = oracle::random_pmf(rng, std::size_t{1} << m);
    const auto pmf = StringPMF::explicit_table(m, p);
    for (double rho : {0.5, 1.0, 2.0}) {
      std::vector<std::size_t> order(p.size());
      std::iota(order.begin(), order.end(), 0);
      double best = INFINITY;
      do best = std::min(best, ordered_moment(p, order, rho));
      while (std::next_permutation(order.begin(), order.end()));
      REQUIRE(guesswork_moment_exact(pmf, rho) <= best * (1 + 1e-12));
      REQUIRE(guesswork_moment_exact(pmf, rho) == Approx(oracle::moment(p, rho)));
    }
  }
}

TEST_CASE("property: tie-breaking does not change the moment") {
  // Equal-weight strings tie exactly; reversing tie order must give the same value.
  for (unsigned m = 1; m <= 10; ++m) {
    const auto table = oracle::iid_table(m, 0.3);
    std::vector<std::size_t> idx(table.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
      if (std::abs(table[a] - table[b]) > 1e-12 * std::max(table[a], table[b])) return table[a] > table[b];
      return a > b;
    });
    REQUIRE(ordered_moment(table, idx, 1.0) ==
            Approx(guesswork_moment_exact(iid_string_pmf(BitPMF(0.3), m), 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("property: H_1/2 >= H >= H_min, equal only at uniform") {
  Rng rng(22);
  for (int i = 0; i < 5000; ++i) {
    const std::size_t n = 2 + rng.bits() % 30;
    const auto p = oracle::random_pmf(rng, n);
    const double h12 = renyi_entropy(p, 0.5), h = shannon_entropy(p), hm = min_entropy(p);
    REQUIRE(h12 >= h - 1e-9);
    REQUIRE(h >= hm - 1e-9);
    REQUIRE(h12 - hm > 1e-9);
    std::vector<double> u(n, 1.0 / n);
    REQUIRE(renyi_entropy(u, 0.5) == Approx(shannon_entropy(u)).epsilon(1e-12));
    REQUIRE(min_entropy(u) == Approx(shannon_entropy(u)).epsilon(1e-12));
  }
}

TEST_CASE("property: conditioning never hurts the attacker") {
  Rng rng(23);
  for (int i = 0; i < 300; ++i) {
    const unsigned mx = 1 + i % 3, my = 1 + (i / 3) % 3;
    const auto probs = oracle::random_pmf(rng, std::size_t{1} << (mx + my));
    const StringJointPMF joint(mx, my, probs);
    for (double rho : {0.5, 1.0, 2.0}) {
      REQUIRE(conditional_guesswork_moment_exact(joint, rho) <=
              guesswork_moment_exact(joint.x_marginal(), rho) * (1 + 1e-12));
    }
  }
}

TEST_CASE("property: guesswork distance is in [0,1] and zero iff no conditional gain") {
  Rng rng(24);
  for (int i = 0; i < 10000; ++i) {
    const auto p = oracle::random_pmf(rng, 4);
    const JointPMF j({{{p[0], p[1]}, {p[2], p[3]}}});
    const double rho = 0.2 + 3 * rng.uniform();
    const double g = guesswork_distance(j, rho);
    REQUIRE(g >= 0.0);
    REQUIRE(g <= 1.0);
    const auto [px, py] = marginals(j);
    REQUIRE(guesswork_distance(product_joint(px, py), rho) == Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("property: convergence is nondecreasing for Bernoulli sources") {
  for (double p : {0.1, 0.3, 0.45}) {
    double prev = -INFINITY;
    for (unsigned m = 1; m <= 20; ++m) {
      const double rate = std::log2(guesswork_moment_exact(iid_string_pmf(BitPMF(p), m), 1.0)) / m;
      REQUIRE(rate >= prev - 1e-9);
      REQUIRE(rate <= guesswork_growth_rate(BitPMF(p), 1.0));
      prev = rate;
    }
  }
}

TEST_CASE("weight-class moment agrees with enumeration") {
  for (double p : {0.05, 0.3, 0.5, 0.8}) {
    for (double rho : {0.5, 1.0, 2.0, 3.3}) {
      for (unsigned m = 1; m <= 12; ++m) {
        REQUIRE(iid_guesswork_moment(BitPMF(p), m, rho) ==
                Approx(oracle::moment(oracle::iid_table(m, p), rho)).epsilon(1e-10));
      }
    }
  }
  // Closed forms reach beyond the enumeration cap.
  const double big = iid_guesswork_moment(BitPMF(0.5), 40, 1.0);
  CHECK(big == Approx((std::exp2(40) + 1) / 2));
}

TEST_CASE("noisy conditional moment agrees with joint enumeration") {
  for (double p : {0.5, 0.3}) {
    for (double eps : {0.0, 0.05, 0.1, 0.5}) {
      for (unsigned m = 1; m <= 6; ++m) {
        const auto joint = iid_string_joint(noisy_observation_joint(BitPMF(p), NoiseChannel(eps)), m);
        for (double rho : {1.0, 2.0}) {
          REQUIRE(noisy_conditional_guesswork_moment(BitPMF(p), NoiseChannel(eps), m, rho) ==
                  Approx(conditional_guesswork_moment_exact(joint, rho)).epsilon(1e-10));
        }
      }
    }
  }
}
