#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "puf/bit_matrix.hpp"
#include "puf/error.hpp"
#include "puf/metrics.hpp"

using namespace puf;
using doctest::Approx;

namespace {

std::vector<std::uint8_t> bits_of(const std::string& s) {
  std::vector<std::uint8_t> v;
  for (char c : s) v.push_back(c == '1');
  return v;
}

BitMatrix reference_only(std::size_t chips, std::size_t locs, const std::vector<std::uint8_t>& data,
                         std::vector<LocationMeta> meta = {}) {
  std::vector<int> ids(chips);
  std::iota(ids.begin(), ids.end(), 1);
  if (meta.empty()) meta.assign(locs, LocationMeta{"V_T1", "V", 0});
  return BitMatrix(std::move(ids), std::move(meta), {{kReferenceCorner, 0, data}}, 0);
}

}  // namespace

TEST_CASE("fhd") {
  const auto a = bits_of("000111");
  CHECK(fhd(a, a) == 0.0);
  CHECK(fhd(std::vector<std::uint8_t>(24, 0), std::vector<std::uint8_t>(24, 1)) == 1.0);
  CHECK(fhd(a, bits_of("010101")) == Approx(2.0 / 6));
  CHECK_THROWS_AS(fhd(a, bits_of("01")), ValidationError);
  CHECK_THROWS_AS(fhd(std::vector<std::uint8_t>{}, std::vector<std::uint8_t>{}), ValidationError);
}

TEST_CASE("property: fhd is a metric") {
  Rng rng(41);
  for (int i = 0; i < 5000; ++i) {
    const std::size_t n = 1 + rng.bits() % 40;
    std::vector<std::uint8_t> a(n), b(n), c(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = rng.bits() & 1;
      b[k] = rng.bits() & 1;
      c[k] = rng.bits() & 1;
    }
    REQUIRE(fhd(a, b) == fhd(b, a));
    REQUIRE(fhd(a, a) == 0.0);
    REQUIRE((fhd(a, b) == 0.0) == (a == b));
    REQUIRE(fhd(a, c) <= fhd(a, b) + fhd(b, c) + 1e-15);
  }
}

TEST_CASE("inter-FHD statistics") {
  SUBCASE("identical chips") {
    const auto s = inter_fhd_stats(reference_only(2, 4, bits_of("10101010")));
    CHECK(s.mean == 0.0);
    CHECK(s.stddev == 0.0);
    CHECK(s.pairs == 1);
    CHECK(s.histogram[0] == 1);
  }
  SUBCASE("hand example") {
    const auto s = inter_fhd_stats(reference_only(3, 4, bits_of("001101011110")));
    // Chips 0011, 0101, 1110: distances 2, 3, 3.
    CHECK(s.pairs == 3);
    CHECK(s.mean == Approx((0.5 + 0.75 + 0.75) / 3));
    const double mu = (0.5 + 0.75 + 0.75) / 3;
    CHECK(s.stddev == Approx(std::sqrt(((0.5 - mu) * (0.5 - mu) + 2 * (0.75 - mu) * (0.75 - mu)) / 3)));
    CHECK(s.histogram == std::vector<std::uint64_t>{0, 0, 1, 2, 0});
  }
  SUBCASE("fair population converges to binomial moments") {
    Rng rng(42);
    const std::size_t chips = 2000, m = 24;
    std::vector<std::uint8_t> data(chips * m);
    for (auto& b : data) b = rng.bits() >> 63;
    const auto s = inter_fhd_stats(reference_only(chips, m, data));
    const double sd = std::sqrt(0.25 / m);
    // Pairs are dependent; use the chip count for a conservative error bar.
    CHECK(std::abs(s.mean - 0.5) < 3 * sd / std::sqrt(static_cast<double>(chips)));
    CHECK(s.stddev == Approx(sd).epsilon(0.03));
  }
  CHECK_THROWS_AS(inter_fhd_stats(reference_only(1, 4, bits_of("1010"))), ValidationError);
}

namespace {

BitMatrix ber_matrix(const std::vector<std::pair<std::size_t, int>>& flips, int repeats = 10) {
  const std::size_t chips = 99, locs = 24;
  std::vector<int> ids(chips);
  std::iota(ids.begin(), ids.end(), 1);
  std::vector<std::uint8_t> ref(chips * locs);
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = (i * 7) % 3 == 0;
  std::vector<MeasurementSet> sets{{kReferenceCorner, 0, ref}};
  for (int r = 0; r < repeats; ++r) {
    auto d = ref;
    for (auto [cell, rep] : flips)
      if (rep == r) d[cell] ^= 1;
    sets.push_back({Corner{1.2, 25.0}, r, std::move(d)});
  }
  return BitMatrix(std::move(ids), std::vector<LocationMeta>(locs, {"V_T1", "V", 0}), std::move(sets), 0);
}

}  // namespace

TEST_CASE("ber") {
  const Corner c{1.2, 25.0};
  CHECK(ber(ber_matrix({}), c).ber == 0.0);
  CHECK(format_ber_percent(ber(ber_matrix({}), c).ber) == "0.00%");

  const auto three = ber(ber_matrix({{0, 1}, {500, 9}, {2000, 4}}), c);
  CHECK(three.cells == 2376);
  CHECK(three.repeats == 10);
  CHECK(three.unstable_count == 3);
  CHECK(three.ber * 100 == Approx(0.126).epsilon(1e-3));
  CHECK(format_ber_percent(three.ber) == "0.12%");

  // The same cell failing in many repeats counts once.
  const auto two = ber(ber_matrix({{7, 0}, {7, 1}, {7, 2}, {99, 5}}), c);
  CHECK(two.unstable_count == 2);
  CHECK(two.ber * 100 == Approx(0.084).epsilon(1e-2));
  CHECK(format_ber_percent(two.ber) == "0.08%");
  CHECK(format_ber_percent(1.0 / 2376) == "0.04%");

  CHECK_THROWS_AS(ber(ber_matrix({}), Corner{0.8, 100.0}), ValidationError);
}

TEST_CASE("breakdown probability") {
  std::vector<LocationMeta> meta = {{"Test1", "T1", 0}, {"V_T3", "V3", 1}, {"V_T3", "V3", 2},
                                    {"V_T1", "V1", 3},  {"V_T1", "V1", 4}, {"Bogus", "X", 5}};
  const std::size_t chips = 99;
  std::vector<std::uint8_t> data(chips * meta.size(), 0);
  for (std::size_t c = 0; c < chips; ++c) {
    data[c * meta.size() + 0] = c < 16;
    data[c * meta.size() + 3] = c < 50;
    data[c * meta.size() + 4] = c >= 50;  // 49 + 50 = 99 of 198
  }
  const auto table = breakdown_probability(reference_only(chips, meta.size(), data, meta));
  REQUIRE(table.rows.size() == 3);
  REQUIRE(table.warnings.size() == 1);
  CHECK(table.warnings[0].find("Bogus") != std::string::npos);
  for (const auto& r : table.rows) {
    if (r.structure_tag == "Test1") {
      CHECK(r.broken == 16);
      CHECK(r.probability * 100 == Approx(16.16).epsilon(1e-3));
      CHECK(format_probability_percent(r.probability) == "16.2%");
    } else if (r.structure_tag == "V_T3") {
      CHECK(r.cells == 198);
      CHECK(format_probability_percent(r.probability) == "0.0%");
    } else {
      CHECK(r.broken == 99);
      CHECK(format_probability_percent(r.probability) == "50.0%");
    }
  }
  CHECK(breakdown_probability(reference_only(chips, meta.size(), data, meta), {}).rows.size() == 4);
}

TEST_CASE("majority vote") {
  CHECK(majority_vote(bits_of("110")) == 1);
  CHECK(majority_vote(bits_of("00011")) == 0);
  CHECK_THROWS_WITH_AS(majority_vote(bits_of("1100")), doctest::Contains("ambiguous vote"),
                       ValidationError);
  const double e = majority_vote_error(0.0012, 11);
  CHECK(e < 1e-13);
  CHECK(e == Approx(oracle::binomial_tail(11, 6, 0.0012)).epsilon(1e-9));
  CHECK(majority_vote_error(0.2, 1) == Approx(0.2));
  CHECK_THROWS_AS(majority_vote_error(0.1, 4), ValidationError);
}

TEST_CASE("property: vote error is nonincreasing in fan-in") {
  for (double q : {0.001, 0.01, 0.1, 0.3, 0.45}) {
    double prev = 1.0;
    for (unsigned n = 1; n <= 41; n += 2) {
      const double e = majority_vote_error(q, n);
      REQUIRE(e <= prev + 1e-15);
      REQUIRE(e == Approx(oracle::binomial_tail(n, (n + 1) / 2, q)).epsilon(1e-9));
      prev = e;
    }
  }
}

TEST_CASE("property: simulated majority-vote BER is monotone in fan-in") {
  Rng rng(43);
  const double q = 0.1;
  const int trials = 100000;
  double prev = 1.0;
  for (unsigned n : {1u, 3u, 5u, 7u, 9u}) {
    int wrong = 0;
    std::vector<std::uint8_t> reads(n);
    for (int t = 0; t < trials; ++t) {
      for (auto& r : reads) r = rng.bernoulli(q);
      wrong += majority_vote(reads);
    }
    const double rate = static_cast<double>(wrong) / trials;
    CHECK(rate <= prev);
    CHECK(std::abs(rate - oracle::binomial_tail(n, (n + 1) / 2, q)) <
          4 * std::sqrt(q * (1 - q) / trials));
    prev = rate;
  }
}

TEST_CASE("read error rate and majority response") {
  const Corner c{1.2, 25.0};
  const auto bits = ber_matrix({{0, 1}, {0, 2}, {5, 3}});
  CHECK(read_error_rate(bits, c) == Approx(3.0 / (2376 * 10)));
  const auto maj = majority_response(ber_matrix({{0, 1}, {0, 2}, {5, 3}}, 9), c);
  CHECK(maj == bits.reference().data);
  CHECK_THROWS_AS(majority_response(bits, c), ValidationError);  // 10 reads
}

TEST_CASE("OR debiasing") {
  CHECK(or_debias(0.051, 11) == Approx(0.5623).epsilon(1e-4));
  CHECK(or_debias(0.0, 7) == 1.0);
  CHECK(or_debias(0.5, 1) == 0.5);
  CHECK_THROWS_AS(or_debias(0.5, 0), ValidationError);
}
