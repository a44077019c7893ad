#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "puf/bit_matrix.hpp"

// Monte-Carlo model of gate-oxide-breakdown bit cells read through a
// precision-resistor divider.
namespace puf {

/// Breakdown probabilities of one structure, plus how many copies of it sit
/// on each chip. Structures without a stressed probability are not stressed.
struct StructureSpec {
  std::string tag;
  double p_break_plasma = 0.0;
  std::optional<double> p_break_stressed;
  int copies = 1;
};

/// Log-normal resistance cluster truncated at +-truncation_sigmas in log space.
struct ResistanceCluster {
  double median_ohms = 0.0;
  double log_sigma = 0.0;
  double truncation_sigmas = 4.0;

  double min_ohms() const;
  double max_ohms() const;
};

struct CornerModel {
  Corner corner;
  double log_shift = 0.0;       // systematic multiplicative drift, exp(log_shift)
  double read_log_sigma = 0.0;  // per-read log-normal jitter
  double instability_rate = 0.0;  // per-read flip probability of borderline cells
};

struct SimConfig {
  std::vector<StructureSpec> structures;
  ResistanceCluster broken{10e3, 0.5, 4.0};
  ResistanceCluster intact{30e6, 0.12, 4.0};
  double precision_resistor_ohms = 10e6;
  /// Cells whose corner-shifted r_eq lies within [R_p / f, R_p * f] are
  /// borderline and may flip.
  double instability_band_factor = 2.5;
  std::vector<CornerModel> corners;
  Corner reference_corner = kReferenceCorner;
  int repeats = 10;
  int chips = 99;

  /// Reference chip layout and breakdown probabilities; six corners with
  /// calibrated instability rates.
  static SimConfig defaults();

  void validate() const;
  std::size_t locations_per_chip() const;
  const CornerModel& corner_model(const Corner& corner) const;
};

/// Unstable-cell fractions per corner observed on 2376 stressed cells
/// (1, 0, 3 at 25 degC and 2, 2, 2 at 100 degC for 0.8/1.0/1.2 V).
std::vector<std::pair<Corner, double>> default_instability_targets();

/// Sets every corner's instability rate from `targets` (corners not listed
/// get rate 0).
void calibrate_instability(SimConfig& config,
                           const std::vector<std::pair<Corner, double>>& targets);

/// Probability that a stressed cell is borderline at `corner`, averaged over
/// the stressable locations (analytic, from the truncated clusters).
double borderline_fraction(const SimConfig& config, const Corner& corner);

/// Per-read flip rate that makes `unstable_fraction` of the stressed cells
/// unstable in expectation after `repeats` reads at `corner`.
double calibrate_instability_rate(const SimConfig& config, const Corner& corner,
                                  double unstable_fraction, int repeats);

struct Cell {
  std::size_t structure = 0;  // index into SimConfig::structures
  bool broken = false;
  bool stressed = false;  // only stressed cells are subject to read instability
  double r_eq_ohms = 0.0;
};

struct SSUPopulation {
  SimConfig config;
  std::uint64_t seed = 0;
  std::vector<LocationMeta> locations;
  std::vector<std::size_t> location_structure;  // structure index per location
  std::vector<std::vector<Cell>> chips;         // chips x locations
};

std::vector<LocationMeta> chip_layout(const SimConfig& config);

SSUPopulation sample_population(const SimConfig& config, int chips, std::uint64_t seed);

/// Voltage stress: intact cells of stressable structures break with
/// probability (p_stressed - p_plasma) / (1 - p_plasma). Broken cells stay
/// broken.
SSUPopulation apply_stress(const SSUPopulation& population, std::uint64_t seed);

/// Keeps only locations whose structure has a stressed probability.
SSUPopulation stressable_subset(const SSUPopulation& population);

/// V_out / VDD of the divider.
double divider_ratio(double r_eq_ohms, double r_precision_ohms);
/// 1 iff V_out > VDD / 2, i.e. r_eq < r_precision.
std::uint8_t digitize(double r_eq_ohms, double r_precision_ohms);

/// Corner-shifted resistance of a cell (no per-read jitter).
double corner_resistance(const SimConfig& config, const Cell& cell, const Corner& corner);

/// `repeats` reads of the population at `corner`, repeat indices 0..n-1.
std::vector<MeasurementSet> measure(const SSUPopulation& population, const Corner& corner,
                                    int repeats, std::uint64_t seed);

/// All configured corners with config.repeats reads each; the reference set
/// is repeat 0 at the reference corner.
BitMatrix measure_campaign(const SSUPopulation& population, std::uint64_t seed);

struct Campaign {
  SSUPopulation plasma;
  SSUPopulation stressed;  // stressable locations only
  BitMatrix plasma_bits;
  BitMatrix stressed_bits;
};

Campaign run_campaign(const SimConfig& config, std::uint64_t seed);

/// Columns: chip_id,loc,corner_v,corner_t,r_eq_ohms
std::string resistance_csv(const SSUPopulation& population);

}  // namespace puf
