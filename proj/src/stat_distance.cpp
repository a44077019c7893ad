#include "puf/stat_distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "puf/error.hpp"
#include "puf/guesswork.hpp"
#include "puf/parallel.hpp"

namespace puf {
namespace {

void check_shape(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) throw ValidationError("distributions differ in shape");
}

DistanceSummary summarize(const std::vector<double>& values) {
  DistanceSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.max = *std::max_element(values.begin(), values.end());
  s.min = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

nlohmann::json number_or_label(double v) {
  if (std::isinf(v)) return "infinite divergence";
  return v;
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  check_shape(p, q);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(0.0, d);
}

double kl_divergence(const BitPMF& p, const BitPMF& q) {
  const double a[2] = {p.p0(), p.p1()};
  const double b[2] = {q.p0(), q.p1()};
  return kl_divergence(a, b);
}

double kl_divergence(const JointPMF& p, const JointPMF& q) {
  const auto a = p.flat();
  const auto b = q.flat();
  return kl_divergence(a, b);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  check_shape(p, q);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return std::min(1.0, d / 2.0);
}

double total_variation(const BitPMF& p, const BitPMF& q) {
  const double a[2] = {p.p0(), p.p1()};
  const double b[2] = {q.p0(), q.p1()};
  return total_variation(a, b);
}

double total_variation(const JointPMF& p, const JointPMF& q) {
  const auto a = p.flat();
  const auto b = q.flat();
  return total_variation(a, b);
}

std::string to_string(Pairing pairing) {
  return pairing == Pairing::Adjacent ? "adjacent" : "same_antenna_ratio";
}

Pairing parse_pairing(const std::string& text) {
  if (text == "adjacent") return Pairing::Adjacent;
  if (text == "same_antenna_ratio") return Pairing::SameAntennaRatio;
  throw ValidationError("unknown pairing '" + text + "' (adjacent|same_antenna_ratio)");
}

std::vector<std::pair<std::size_t, std::size_t>> location_pairs(const BitMatrix& bits,
                                                                Pairing pairing) {
  const auto& meta = bits.location_meta();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (pairing == Pairing::Adjacent) {
    std::vector<std::size_t> order(meta.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return meta[a].adjacency_index < meta[b].adjacency_index;
    });
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      if (meta[order[i + 1]].adjacency_index == meta[order[i]].adjacency_index + 1) {
        pairs.emplace_back(order[i], order[i + 1]);
      }
    }
  } else {
    for (std::size_t a = 0; a < meta.size(); ++a)
      for (std::size_t b = a + 1; b < meta.size(); ++b)
        if (meta[a].antenna_class == meta[b].antenna_class) pairs.emplace_back(a, b);
  }
  return pairs;
}

IndependenceReport independence_report(const BitMatrix& bits, Pairing pairing, double rho,
                                       double pseudo_count) {
  if (bits.chips() < 2) throw ValidationError("independence analysis needs at least two chips");
  const auto pairs = location_pairs(bits, pairing);
  if (pairs.empty()) {
    throw ValidationError("no location pairs under pairing rule " + to_string(pairing));
  }

  IndependenceReport report;
  report.pairing = pairing;
  report.rho = rho;
  report.pairs.resize(pairs.size());
  const auto& ref = bits.reference();
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto [a, b] = pairs[i];
    JointCounts counts{};
    for (std::size_t c = 0; c < bits.chips(); ++c) ++counts[bits.bit(ref, c, a)][bits.bit(ref, c, b)];
    const JointPMF joint = estimate_joint(counts, pseudo_count);
    const auto [px, py] = marginals(joint);
    const JointPMF independent = product_joint(px, py);
    PairDistance row{i, a, b, kl_divergence(joint, independent), total_variation(joint, independent),
                     std::nullopt};
    if (px.p1() > 0.0 && px.p1() < 1.0) row.gw = guesswork_distance(joint, rho);
    report.pairs[i] = row;
  });

  std::vector<double> kl, tvd, gw;
  for (const auto& p : report.pairs) {
    kl.push_back(p.kl);
    tvd.push_back(p.tvd);
    if (p.gw) gw.push_back(*p.gw);
  }
  report.kl = summarize(kl);
  report.tvd = summarize(tvd);
  report.gw = summarize(gw);
  return report;
}

std::string independence_report_json(const IndependenceReport& report) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& p : report.pairs) {
    rows.push_back({{"pair_id", p.pair_id},
                    {"loc_a", location_column(p.loc_a)},
                    {"loc_b", location_column(p.loc_b)},
                    {"kl_bits", number_or_label(p.kl)},
                    {"tvd", p.tvd},
                    {"gw", p.gw ? json(*p.gw) : json("undefined")}});
  }
  auto summary = [](const DistanceSummary& s) {
    return json{{"max", number_or_label(s.max)},
                {"min", number_or_label(s.min)},
                {"mean", number_or_label(s.mean)},
                {"count", s.count}};
  };
  json doc = {{"pairing", to_string(report.pairing)},
              {"rho", report.rho},
              {"pairs", rows},
              {"summary", {{"kl_bits", summary(report.kl)}, {"tvd", summary(report.tvd)}, {"gw", summary(report.gw)}}}};
  return doc.dump(2) + "\n";
}

std::string independence_report_csv(const IndependenceReport& report) {
  std::string out = "pair_id,loc_a,loc_b,kl_bits,tvd,gw\n";
  for (const auto& p : report.pairs) {
    out += std::to_string(p.pair_id) + "," + location_column(p.loc_a) + "," +
           location_column(p.loc_b) + "," + (std::isinf(p.kl) ? "inf" : format_number(p.kl)) + "," +
           format_number(p.tvd) + "," + (p.gw ? format_number(*p.gw) : "undefined") + "\n";
  }
  return out;
}

}  // namespace puf
