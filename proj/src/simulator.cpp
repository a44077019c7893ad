#include "puf/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "puf/error.hpp"
#include "puf/parallel.hpp"
#include "puf/rng.hpp"

namespace puf {
namespace {

constexpr std::uint64_t kStageSample = 1;
constexpr std::uint64_t kStageStress = 2;
constexpr std::uint64_t kStageMeasure = 3;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// P(R < x) for a truncated log-normal cluster.
double cluster_cdf(const ResistanceCluster& c, double x) {
  if (x <= 0.0) return 0.0;
  const double k = c.truncation_sigmas;
  if (c.log_sigma == 0.0) return x > c.median_ohms ? 1.0 : 0.0;
  const double z = std::clamp(std::log(x / c.median_ohms) / c.log_sigma, -k, k);
  return (normal_cdf(z) - normal_cdf(-k)) / (normal_cdf(k) - normal_cdf(-k));
}

double sample_cluster(const ResistanceCluster& c, Rng& rng) {
  double z = rng.normal();
  while (std::abs(z) > c.truncation_sigmas) z = rng.normal();
  return c.median_ohms * std::exp(c.log_sigma * z);
}

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(what + " must lie in [0, 1]");
}

constexpr double kStressedCellsMeasured = 2376.0;

}  // namespace

double ResistanceCluster::min_ohms() const {
  return median_ohms * std::exp(-truncation_sigmas * log_sigma);
}

double ResistanceCluster::max_ohms() const {
  return median_ohms * std::exp(truncation_sigmas * log_sigma);
}

SimConfig SimConfig::defaults() {
  SimConfig config;
  auto both = [](std::string tag, double plasma, double stressed) {
    return StructureSpec{std::move(tag), plasma, stressed, 2};
  };
  auto plasma_only = [](std::string tag, double plasma) {
    return StructureSpec{std::move(tag), plasma, std::nullopt, 1};
  };
  config.structures = {
      both("M_T1", 0.005, 0.576), both("M_T2", 0.005, 0.515), both("M_T3", 0.025, 0.571),
      both("M_T4", 0.020, 0.510), both("V_T1", 0.005, 0.500), both("V_T2", 0.061, 0.540),
      both("V_T3", 0.000, 0.647), both("V_T4", 0.000, 0.586), both("P_T1", 0.010, 0.505),
      both("P_T2", 0.025, 0.515), both("P_T3", 0.010, 0.586), both("P_T4", 0.010, 0.600),
      plasma_only("Test1", 0.162), plasma_only("Test2", 0.020), plasma_only("Test3", 0.051),
      plasma_only("Test4", 0.010), plasma_only("Test5", 0.030)};

  for (const auto& [corner, fraction] : default_instability_targets()) {
    config.corners.push_back({corner, 0.0, 0.01, 0.0});
  }
  calibrate_instability(config, default_instability_targets());
  return config;
}

void SimConfig::validate() const {
  if (chips < 1) throw ValidationError("chips must be at least 1");
  if (repeats < 1) throw ValidationError("repeats must be at least 1");
  if (structures.empty()) throw ValidationError("no structures configured");
  for (const auto& s : structures) {
    if (s.tag.empty()) throw ValidationError("structure tag must not be empty");
    if (s.copies < 1) throw ValidationError("structure " + s.tag + ": copies must be >= 1");
    check_probability(s.p_break_plasma, "p_plasma." + s.tag);
    if (s.p_break_stressed) {
      check_probability(*s.p_break_stressed, "p_stressed." + s.tag);
      if (*s.p_break_stressed < s.p_break_plasma) {
        throw ValidationError("structure " + s.tag +
                              ": stressed breakdown probability below plasma probability");
      }
    }
  }
  for (const auto* c : {&broken, &intact}) {
    if (!(c->median_ohms > 0.0) || !(c->log_sigma >= 0.0) || !(c->truncation_sigmas > 0.0)) {
      throw ValidationError("resistance cluster needs positive median, non-negative sigma");
    }
  }
  if (broken.median_ohms * 100.0 > intact.median_ohms ||
      broken.max_ohms() * 100.0 > intact.min_ohms()) {
    throw ValidationError("resistance clusters must be separated by at least 100x");
  }
  if (!(precision_resistor_ohms > 0.0)) throw ValidationError("precision resistor must be positive");
  if (!(instability_band_factor >= 1.0)) throw ValidationError("instability band factor must be >= 1");
  if (corners.empty()) throw ValidationError("no corners configured");
  bool has_reference = false;
  for (const auto& c : corners) {
    if (!(c.corner.voltage > 0.0)) throw ValidationError("corner voltage must be positive");
    if (!(c.read_log_sigma >= 0.0)) throw ValidationError("read jitter must be non-negative");
    check_probability(c.instability_rate, "instability rate at " + c.corner.label());
    has_reference = has_reference || c.corner.matches(reference_corner);
  }
  if (!has_reference) throw ValidationError("reference corner is not among configured corners");
}

std::size_t SimConfig::locations_per_chip() const {
  std::size_t n = 0;
  for (const auto& s : structures) n += static_cast<std::size_t>(s.copies);
  return n;
}

const CornerModel& SimConfig::corner_model(const Corner& corner) const {
  for (const auto& c : corners)
    if (c.corner.matches(corner)) return c;
  throw ValidationError("corner " + corner.label() + " is not configured");
}

std::vector<std::pair<Corner, double>> default_instability_targets() {
  return {{{0.8, 25.0}, 1.0 / kStressedCellsMeasured},  {{1.0, 25.0}, 0.0},
          {{1.2, 25.0}, 3.0 / kStressedCellsMeasured},  {{0.8, 100.0}, 2.0 / kStressedCellsMeasured},
          {{1.0, 100.0}, 2.0 / kStressedCellsMeasured}, {{1.2, 100.0}, 2.0 / kStressedCellsMeasured}};
}

void calibrate_instability(SimConfig& config,
                           const std::vector<std::pair<Corner, double>>& targets) {
  for (auto& cm : config.corners) {
    cm.instability_rate = 0.0;
    for (const auto& [corner, fraction] : targets) {
      if (corner.matches(cm.corner)) {
        cm.instability_rate = calibrate_instability_rate(config, corner, fraction, config.repeats);
      }
    }
  }
}

double borderline_fraction(const SimConfig& config, const Corner& corner) {
  double shift = 0.0;
  for (const auto& c : config.corners)
    if (c.corner.matches(corner)) shift = c.log_shift;
  const double f = config.instability_band_factor;
  const double lo = config.precision_resistor_ohms / f * std::exp(-shift);
  const double hi = config.precision_resistor_ohms * f * std::exp(-shift);
  auto in_band = [&](const ResistanceCluster& c) { return cluster_cdf(c, hi) - cluster_cdf(c, lo); };
  double weighted = 0.0;
  double cells = 0.0;
  for (const auto& s : config.structures) {
    if (!s.p_break_stressed) continue;
    const double ps = *s.p_break_stressed;
    weighted += s.copies * ((1.0 - ps) * in_band(config.intact) + ps * in_band(config.broken));
    cells += s.copies;
  }
  return cells > 0.0 ? weighted / cells : 0.0;
}

double calibrate_instability_rate(const SimConfig& config, const Corner& corner,
                                  double unstable_fraction, int repeats) {
  check_probability(unstable_fraction, "unstable fraction");
  if (repeats < 1) throw ValidationError("repeats must be at least 1");
  if (unstable_fraction == 0.0) return 0.0;
  const double q = borderline_fraction(config, corner);
  if (unstable_fraction > q) {
    throw ValidationError("unstable fraction exceeds the borderline fraction; widen the band");
  }
  // unstable = q * (1 - (1 - rate)^repeats)
  return 1.0 - std::pow(1.0 - unstable_fraction / q, 1.0 / repeats);
}

std::vector<LocationMeta> chip_layout(const SimConfig& config) {
  std::vector<LocationMeta> layout;
  for (const auto& s : config.structures) {
    for (int k = 0; k < s.copies; ++k) {
      layout.push_back({s.tag, s.tag, static_cast<int>(layout.size())});
    }
  }
  return layout;
}

SSUPopulation sample_population(const SimConfig& config, int chips, std::uint64_t seed) {
  SimConfig cfg = config;
  cfg.chips = chips;
  cfg.validate();

  SSUPopulation pop;
  pop.config = cfg;
  pop.seed = seed;
  pop.locations = chip_layout(cfg);
  for (std::size_t s = 0; s < cfg.structures.size(); ++s)
    for (int k = 0; k < cfg.structures[s].copies; ++k) pop.location_structure.push_back(s);

  pop.chips.resize(static_cast<std::size_t>(chips));
  parallel_for(pop.chips.size(), [&](std::size_t chip) {
    Rng rng(derive_seed(seed, {kStageSample, chip}));
    auto& cells = pop.chips[chip];
    cells.resize(pop.locations.size());
    for (std::size_t l = 0; l < cells.size(); ++l) {
      const auto s = pop.location_structure[l];
      Cell cell;
      cell.structure = s;
      cell.broken = rng.bernoulli(cfg.structures[s].p_break_plasma);
      cell.r_eq_ohms = sample_cluster(cell.broken ? cfg.broken : cfg.intact, rng);
      cells[l] = cell;
    }
  });
  return pop;
}

SSUPopulation apply_stress(const SSUPopulation& population, std::uint64_t seed) {
  population.config.validate();
  SSUPopulation out = population;
  const auto& cfg = out.config;
  parallel_for(out.chips.size(), [&](std::size_t chip) {
    Rng rng(derive_seed(seed, {kStageStress, chip}));
    for (auto& cell : out.chips[chip]) {
      const auto& spec = cfg.structures[cell.structure];
      if (!spec.p_break_stressed) continue;
      const double ps = *spec.p_break_stressed;
      const double pp = spec.p_break_plasma;
      const double lift = pp < 1.0 ? (ps - pp) / (1.0 - pp) : 0.0;
      // Draws happen for every stressable cell to keep streams aligned.
      const bool breaks = rng.bernoulli(lift);
      const double r_new = sample_cluster(cfg.broken, rng);
      cell.stressed = true;
      if (!cell.broken && breaks) {
        cell.broken = true;
        cell.r_eq_ohms = r_new;
      }
    }
  });
  return out;
}

SSUPopulation stressable_subset(const SSUPopulation& population) {
  SSUPopulation out;
  out.config = population.config;
  out.seed = population.seed;
  std::vector<std::size_t> keep;
  for (std::size_t l = 0; l < population.locations.size(); ++l) {
    if (population.config.structures[population.location_structure[l]].p_break_stressed) {
      keep.push_back(l);
    }
  }
  for (std::size_t l : keep) {
    auto meta = population.locations[l];
    meta.adjacency_index = static_cast<int>(out.locations.size());
    out.locations.push_back(meta);
    out.location_structure.push_back(population.location_structure[l]);
  }
  out.chips.resize(population.chips.size());
  for (std::size_t c = 0; c < population.chips.size(); ++c)
    for (std::size_t l : keep) out.chips[c].push_back(population.chips[c][l]);
  return out;
}

double divider_ratio(double r_eq_ohms, double r_precision_ohms) {
  return r_precision_ohms / (r_precision_ohms + r_eq_ohms);
}

std::uint8_t digitize(double r_eq_ohms, double r_precision_ohms) {
  if (!(r_eq_ohms > 0.0) || !(r_precision_ohms > 0.0)) {
    throw ValidationError("resistances must be positive");
  }
  return r_eq_ohms < r_precision_ohms ? 1 : 0;
}

double corner_resistance(const SimConfig& config, const Cell& cell, const Corner& corner) {
  return cell.r_eq_ohms * std::exp(config.corner_model(corner).log_shift);
}

std::vector<MeasurementSet> measure(const SSUPopulation& population, const Corner& corner,
                                    int repeats, std::uint64_t seed) {
  if (repeats < 1) throw ValidationError("repeats must be at least 1");
  const auto& cfg = population.config;
  const auto& model = cfg.corner_model(corner);
  const std::size_t width = population.locations.size();
  const std::size_t chips = population.chips.size();
  const double rp = cfg.precision_resistor_ohms;
  const double band_lo = rp / cfg.instability_band_factor;
  const double band_hi = rp * cfg.instability_band_factor;

  std::vector<MeasurementSet> sets(static_cast<std::size_t>(repeats));
  for (int r = 0; r < repeats; ++r) {
    sets[r] = {corner, r, std::vector<std::uint8_t>(chips * width)};
  }
  parallel_for(chips, [&](std::size_t chip) {
    Rng rng(derive_seed(seed, {kStageMeasure, chip}));
    const auto& cells = population.chips[chip];
    for (int r = 0; r < repeats; ++r) {
      for (std::size_t l = 0; l < width; ++l) {
        const auto& cell = cells[l];
        const double shifted = cell.r_eq_ohms * std::exp(model.log_shift);
        const double read = shifted * std::exp(model.read_log_sigma * rng.normal());
        const double u = rng.uniform();
        auto bit = digitize(read, rp);
        const bool borderline = shifted >= band_lo && shifted <= band_hi;
        if (cell.stressed && borderline && u < model.instability_rate) bit ^= 1U;
        sets[r].data[chip * width + l] = bit;
      }
    }
  });
  return sets;
}

BitMatrix measure_campaign(const SSUPopulation& population, std::uint64_t seed) {
  const auto& cfg = population.config;
  std::vector<MeasurementSet> sets;
  std::size_t reference = sets.size();
  for (std::size_t ci = 0; ci < cfg.corners.size(); ++ci) {
    const auto& corner = cfg.corners[ci].corner;
    auto batch = measure(population, corner, cfg.repeats, derive_seed(seed, {ci}));
    if (corner.matches(cfg.reference_corner)) reference = sets.size();
    for (auto& s : batch) sets.push_back(std::move(s));
  }
  std::vector<int> chip_ids(population.chips.size());
  for (std::size_t c = 0; c < chip_ids.size(); ++c) chip_ids[c] = static_cast<int>(c + 1);
  return BitMatrix(std::move(chip_ids), population.locations, std::move(sets), reference);
}

Campaign run_campaign(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  auto plasma = sample_population(config, config.chips, derive_seed(seed, {10}));
  auto plasma_bits = measure_campaign(plasma, derive_seed(seed, {11}));
  auto stressed = stressable_subset(apply_stress(plasma, derive_seed(seed, {12})));
  if (stressed.locations.empty()) throw ValidationError("no stressable structures configured");
  auto stressed_bits = measure_campaign(stressed, derive_seed(seed, {13}));
  return {std::move(plasma), std::move(stressed), std::move(plasma_bits), std::move(stressed_bits)};
}

std::string resistance_csv(const SSUPopulation& population) {
  std::string out = "chip_id,loc,corner_v,corner_t,r_eq_ohms\n";
  for (std::size_t c = 0; c < population.chips.size(); ++c) {
    for (const auto& cm : population.config.corners) {
      for (std::size_t l = 0; l < population.locations.size(); ++l) {
        out += std::to_string(c + 1) + "," + location_column(l) + "," +
               format_number(cm.corner.voltage) + "," + format_number(cm.corner.temperature) + "," +
               format_number(corner_resistance(population.config, population.chips[c][l], cm.corner)) +
               "\n";
      }
    }
  }
  return out;
}

}  // namespace puf
