#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "puf/bit_matrix.hpp"
#include "puf/prob_model.hpp"

namespace puf {

/// KL divergence in bits. Returns +infinity when P puts mass where Q has none.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const BitPMF& p, const BitPMF& q);
double kl_divergence(const JointPMF& p, const JointPMF& q);

/// Half the L1 distance.
double total_variation(std::span<const double> p, std::span<const double> q);
double total_variation(const BitPMF& p, const BitPMF& q);
double total_variation(const JointPMF& p, const JointPMF& q);

enum class Pairing { Adjacent, SameAntennaRatio };

std::string to_string(Pairing pairing);
Pairing parse_pairing(const std::string& text);

struct PairDistance {
  std::size_t pair_id = 0;
  std::size_t loc_a = 0;
  std::size_t loc_b = 0;
  double kl = 0.0;
  double tvd = 0.0;
  std::optional<double> gw;  // empty when the first location is constant
};

struct DistanceSummary {
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

struct IndependenceReport {
  Pairing pairing = Pairing::Adjacent;
  double rho = 1.0;
  std::vector<PairDistance> pairs;
  DistanceSummary kl;
  DistanceSummary tvd;
  DistanceSummary gw;
};

/// Location pairs under a pairing rule. Adjacent: consecutive adjacency
/// indices. Same antenna ratio: every pair sharing an antenna class.
std::vector<std::pair<std::size_t, std::size_t>> location_pairs(const BitMatrix& bits,
                                                                Pairing pairing);

/// For each pair, estimates P(X,Y) across chips from the reference reads and
/// compares it with the product of its marginals.
IndependenceReport independence_report(const BitMatrix& bits, Pairing pairing, double rho = 1.0,
                                       double pseudo_count = 0.0);

std::string independence_report_json(const IndependenceReport& report);
/// Columns: pair_id,loc_a,loc_b,kl_bits,tvd,gw
std::string independence_report_csv(const IndependenceReport& report);

}  // namespace puf
