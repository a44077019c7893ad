#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "puf/attack.hpp"
#include "puf/bit_matrix.hpp"
#include "puf/error.hpp"
#include "puf/guesswork.hpp"
#include "puf/metrics.hpp"
#include "puf/stat_distance.hpp"

namespace puf::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void write_json(const fs::path& path, const json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

const std::vector<double>& default_noise_sweep() {
  static const std::vector<double> sweep = {0.0,  0.0012, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05,
                                            0.06, 0.08,   0.10,  0.12, 0.15, 0.20, 0.25, 0.30,
                                            0.35, 0.40,   0.45};
  return sweep;
}

double positive_rho(const RunConfig& config) {
  const double rho = config.get_double("rho", 1.0);
  if (!(rho > 0.0)) throw ValidationError("config key 'rho': must be positive");
  return rho;
}

unsigned length_bits(const RunConfig& config, std::int64_t fallback) {
  const auto m = config.get_int("length_bits", fallback);
  if (m < 1 || m > 4096) throw ValidationError("config key 'length_bits': must lie in [1, 4096]");
  return static_cast<unsigned>(m);
}

StructureSpec& find_structure(SimConfig& sim, const std::string& key, const std::string& tag) {
  for (auto& s : sim.structures)
    if (s.tag == tag) return s;
  throw ValidationError("config key '" + key + "': unknown structure tag '" + tag + "'");
}

CornerModel& find_corner(SimConfig& sim, const std::string& key, const std::string& label) {
  for (auto& c : sim.corners)
    if (c.corner.label() == label) return c;
  throw ValidationError("config key '" + key + "': unknown corner '" + label +
                        "' (labels look like 1.2V_25C)");
}

}  // namespace

SimConfig sim_config_from(const RunConfig& config) {
  config.reject_unknown({"chips", "repeats", "precision_resistor_ohms", "broken_median_ohms",
                         "broken_log_sigma", "intact_median_ohms", "intact_log_sigma",
                         "cluster_truncation_sigmas", "instability_band_factor", "read_log_sigma"},
                        {"p_plasma.", "p_stressed.", "instability_rate.", "log_shift."});
  SimConfig sim = SimConfig::defaults();
  sim.chips = static_cast<int>(config.get_int("chips", sim.chips));
  sim.repeats = static_cast<int>(config.get_int("repeats", sim.repeats));
  sim.precision_resistor_ohms = config.get_double("precision_resistor_ohms", sim.precision_resistor_ohms);
  sim.broken.median_ohms = config.get_double("broken_median_ohms", sim.broken.median_ohms);
  sim.broken.log_sigma = config.get_double("broken_log_sigma", sim.broken.log_sigma);
  sim.intact.median_ohms = config.get_double("intact_median_ohms", sim.intact.median_ohms);
  sim.intact.log_sigma = config.get_double("intact_log_sigma", sim.intact.log_sigma);
  const double trunc = config.get_double("cluster_truncation_sigmas", sim.broken.truncation_sigmas);
  sim.broken.truncation_sigmas = trunc;
  sim.intact.truncation_sigmas = trunc;
  sim.instability_band_factor = config.get_double("instability_band_factor", sim.instability_band_factor);
  for (auto& c : sim.corners) c.read_log_sigma = config.get_double("read_log_sigma", c.read_log_sigma);

  for (const auto& [key, value] : config.entries()) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const auto prefix = key.substr(0, dot);
    const auto name = key.substr(dot + 1);
    if (prefix == "p_plasma") {
      find_structure(sim, key, name).p_break_plasma = config.get_probability(key, 0.0);
    } else if (prefix == "p_stressed") {
      find_structure(sim, key, name).p_break_stressed = config.get_probability(key, 0.0);
    } else if (prefix == "log_shift") {
      find_corner(sim, key, name).log_shift = parse_double(key, value);
    }
  }
  if (sim.chips < 1) throw ValidationError("config key 'chips': must be at least 1");
  if (sim.repeats < 1) throw ValidationError("config key 'repeats': must be at least 1");
  sim.validate();

  // Rates follow the current clusters unless given explicitly.
  calibrate_instability(sim, default_instability_targets());
  for (const auto& [key, value] : config.entries()) {
    if (key.rfind("instability_rate.", 0) == 0) {
      find_corner(sim, key, key.substr(std::string("instability_rate.").size())).instability_rate =
          config.get_probability(key, 0.0);
    }
  }
  sim.validate();
  return sim;
}

void cmd_simulate(const RunConfig& config, std::uint64_t seed, const fs::path& out_dir,
                  std::ostream& log) {
  const SimConfig sim = sim_config_from(config);
  const Campaign campaign = run_campaign(sim, seed);
  ensure_dir(out_dir);
  write_bit_matrix(campaign.plasma_bits, out_dir / "plasma_bits.csv", out_dir / "plasma_bits.json");
  write_bit_matrix(campaign.stressed_bits, out_dir / "stressed_bits.csv",
                   out_dir / "stressed_bits.json");
  write_text_file(out_dir / "r_eq_plasma.csv", resistance_csv(campaign.plasma));
  write_text_file(out_dir / "r_eq_stressed.csv", resistance_csv(campaign.stressed));

  json corners = json::array();
  for (const auto& c : sim.corners) {
    corners.push_back({{"corner_v", c.corner.voltage},
                       {"corner_t", c.corner.temperature},
                       {"log_shift", c.log_shift},
                       {"read_log_sigma", c.read_log_sigma},
                       {"instability_rate", c.instability_rate}});
  }
  json overrides = json::object();
  for (const auto& [k, v] : config.entries()) overrides[k] = v;
  write_json(out_dir / "campaign.json", {{"seed", seed},
                                         {"chips", sim.chips},
                                         {"repeats", sim.repeats},
                                         {"plasma_locations", campaign.plasma_bits.locations()},
                                         {"stressed_locations", campaign.stressed_bits.locations()},
                                         {"precision_resistor_ohms", sim.precision_resistor_ohms},
                                         {"corners", corners},
                                         {"config", overrides}});
  log << "simulated " << sim.chips << " chips (" << campaign.plasma_bits.locations()
      << " plasma / " << campaign.stressed_bits.locations() << " stressed locations) into "
      << out_dir.string() << "\n";
}

void cmd_report(const std::string& which, const RunConfig& config, fs::path input, fs::path meta,
                const fs::path& out_dir, std::ostream& log) {
  if (which == "guesswork") {
    config.reject_unknown({"bias_p", "noise_eps_list", "length_bits", "rho"});
    const BitPMF bias(config.get_probability("bias_p", 0.5));
    const auto sweep = config.get_doubles("noise_eps_list", default_noise_sweep());
    const unsigned n = length_bits(config, 128);
    const double rho = positive_rho(config);
    ensure_dir(out_dir);
    std::string csv = "eps,noise_entropy_bits,exponent,effective_bits\n";
    json rows = json::array();
    for (double eps : sweep) {
      const NoiseChannel noise(eps);
      const auto report = guesswork_report(bias, noise, n, rho);
      const double h_noise = shannon_entropy(BitPMF(eps));
      csv += format_number(eps) + "," + format_number(h_noise) + "," + format_number(report.exponent) +
             "," + format_number(report.effective_bits) + "\n";
      json row = {{"eps", eps},
                  {"noise_entropy_bits", h_noise},
                  {"exponent", report.exponent},
                  {"effective_bits", report.effective_bits}};
      if (report.exact_moment) row["exact_moment"] = *report.exact_moment;
      rows.push_back(row);
    }
    write_text_file(out_dir / "effective_bits.csv", csv);
    write_json(out_dir / "guesswork_report.json",
               {{"bias_p", bias.p1()},
                {"length_bits", n},
                {"rho", rho},
                {"renyi_order", 1.0 / (1.0 + rho)},
                {"source_exponent", guesswork_growth_rate(bias, rho)},
                {"min_entropy_bits", min_entropy(bias)},
                {"shannon_entropy_bits", shannon_entropy(bias)},
                {"rows", rows}});
    log << "guesswork report: " << sweep.size() << " noise levels, n=" << n << "\n";
    return;
  }

  std::vector<std::string> allowed = {"input_csv", "input_meta"};
  if (which == "ber") allowed.push_back("vote_repeats");
  if (which == "breakdown") allowed.push_back("known_tags");
  if (which == "independence") {
    for (const char* k : {"pairing", "rho", "smoothing"}) allowed.push_back(k);
  }
  if (which != "fhd" && which != "ber" && which != "breakdown" && which != "independence") {
    throw ValidationError("unknown report '" + which +
                          "' (fhd|ber|breakdown|independence|guesswork)");
  }
  config.reject_unknown(allowed);
  if (input.empty()) input = config.get_string("input_csv", "");
  if (input.empty()) throw ValidationError("report '" + which + "' needs --input or input_csv");
  if (meta.empty()) meta = config.get_string("input_meta", "");
  if (meta.empty()) meta = fs::path(input).replace_extension(".json");
  const BitMatrix bits = read_bit_matrix(input, meta);
  ensure_dir(out_dir);

  if (which == "fhd") {
    const auto stats = inter_fhd_stats(bits);
    std::string csv = "k,fhd,count\n";
    json hist = json::array();
    for (std::size_t k = 0; k < stats.histogram.size(); ++k) {
      const double f = static_cast<double>(k) / bits.locations();
      csv += std::to_string(k) + "," + format_number(f) + "," + std::to_string(stats.histogram[k]) + "\n";
      hist.push_back({{"k", k}, {"fhd", f}, {"count", stats.histogram[k]}});
    }
    write_text_file(out_dir / "fhd_histogram.csv", csv);
    write_json(out_dir / "fhd_report.json", {{"chips", bits.chips()},
                                             {"locations", bits.locations()},
                                             {"pairs", stats.pairs},
                                             {"mean", stats.mean},
                                             {"std", stats.stddev},
                                             {"histogram", hist}});
    log << "inter-FHD mean " << stats.mean << " std " << stats.stddev << " over " << stats.pairs
        << " pairs\n";
  } else if (which == "ber") {
    const auto votes = config.get_int("vote_repeats", 11);
    if (votes < 1 || votes % 2 == 0) {
      throw ValidationError("config key 'vote_repeats': ambiguous vote; supply odd repeat count");
    }
    std::string csv =
        "corner_v,corner_t,repeats,unstable_count,cells,ber,ber_reported,read_error_rate,"
        "vote_error_probability\n";
    json rows = json::array();
    for (const auto& corner : bits.corners()) {
      const auto r = ber(bits, corner);
      const double read_err = read_error_rate(bits, corner);
      const double vote_err = majority_vote_error(read_err, static_cast<unsigned>(votes));
      csv += format_number(corner.voltage) + "," + format_number(corner.temperature) + "," +
             std::to_string(r.repeats) + "," + std::to_string(r.unstable_count) + "," +
             std::to_string(r.cells) + "," + format_number(r.ber) + "," + format_ber_percent(r.ber) +
             "," + format_number(read_err) + "," + format_number(vote_err) + "\n";
      rows.push_back({{"corner_v", corner.voltage},
                      {"corner_t", corner.temperature},
                      {"repeats", r.repeats},
                      {"unstable_count", r.unstable_count},
                      {"cells", r.cells},
                      {"ber", r.ber},
                      {"ber_reported", format_ber_percent(r.ber)},
                      {"read_error_rate", read_err},
                      {"vote_error_probability", vote_err}});
      log << corner.label() << ": " << r.unstable_count << " unstable of " << r.cells << " ("
          << format_ber_percent(r.ber) << ")\n";
    }
    write_text_file(out_dir / "ber_report.csv", csv);
    write_json(out_dir / "ber_report.json",
               {{"vote_repeats", votes}, {"reference", bits.reference().corner.label()}, {"corners", rows}});
  } else if (which == "breakdown") {
    std::vector<std::string> tags = known_structure_tags();
    if (const auto list = config.find("known_tags")) {
      tags.clear();
      if (*list != "*") {
        std::istringstream in(*list);
        std::string t;
        while (std::getline(in, t, ',')) tags.push_back(t);
      }
    }
    const auto table = breakdown_probability(bits, tags);
    std::string csv = "tag,broken,cells,probability,reported\n";
    json rows = json::array();
    for (const auto& r : table.rows) {
      csv += r.structure_tag + "," + std::to_string(r.broken) + "," + std::to_string(r.cells) + "," +
             format_number(r.probability) + "," + format_probability_percent(r.probability) + "\n";
      rows.push_back({{"tag", r.structure_tag},
                      {"broken", r.broken},
                      {"cells", r.cells},
                      {"probability", r.probability},
                      {"reported", format_probability_percent(r.probability)}});
    }
    for (const auto& w : table.warnings) log << "warning: " << w << "\n";
    write_text_file(out_dir / "breakdown_report.csv", csv);
    write_json(out_dir / "breakdown_report.json", {{"rows", rows}, {"warnings", table.warnings}});
    log << "breakdown report: " << table.rows.size() << " structure tags\n";
  } else {
    const auto pairing = config.get_string("pairing", "both");
    std::vector<Pairing> pairings;
    if (pairing == "both") {
      pairings = {Pairing::Adjacent, Pairing::SameAntennaRatio};
    } else {
      pairings = {parse_pairing(pairing)};
    }
    const double rho = positive_rho(config);
    const double smoothing = config.get_double("smoothing", 0.0);
    for (auto p : pairings) {
      const auto report = independence_report(bits, p, rho, smoothing);
      write_text_file(out_dir / ("independence_" + to_string(p) + ".json"),
                      independence_report_json(report));
      write_text_file(out_dir / ("independence_" + to_string(p) + ".csv"),
                      independence_report_csv(report));
      log << to_string(p) << ": " << report.pairs.size() << " pairs, mean KL " << report.kl.mean
          << " bits, mean TVD " << report.tvd.mean << ", mean GW " << report.gw.mean << "\n";
    }
  }
}

void cmd_attack(const RunConfig& config, std::uint64_t seed, const fs::path& out_dir,
                std::ostream& log) {
  config.reject_unknown({"bias_p", "noise_eps", "length_bits", "trials", "rho", "attack_mode"});
  const BitPMF bias(config.get_probability("bias_p", 0.5));
  const NoiseChannel noise(config.get_double("noise_eps", 0.0));
  const unsigned m = length_bits(config, 8);
  const auto trials = config.get_int("trials", 100000);
  if (trials < 1) throw ValidationError("config key 'trials': must be at least 1");
  const double rho = positive_rho(config);
  const auto mode = config.get_string("attack_mode", "dictionary");
  if (m > kDefaultEnumerationCap) {
    throw ValidationError("length_bits " + std::to_string(m) + " exceeds enumeration cap " +
                          std::to_string(kDefaultEnumerationCap) +
                          "; use `report guesswork` for the asymptotic exponent");
  }

  AttackResult result;
  json extra;
  if (mode == "dictionary") {
    if (noise.eps() != 0.0) {
      throw ValidationError("noise_eps requires attack_mode = noisy");
    }
    const auto pmf = iid_string_pmf(bias, m);
    result = simulate_attack(pmf, static_cast<std::uint64_t>(trials), seed, rho);
    extra["exact_moment"] = guesswork_moment_exact(pmf, rho);
    extra["guess1_probability"] = guess1_probability(pmf);
    extra["min_entropy_bits"] = min_entropy(pmf);
    ensure_dir(out_dir);
    write_text_file(out_dir / "success_curve_exact.csv", success_curve_csv(exact_success_curve(pmf)));
  } else if (mode == "noisy") {
    result = simulate_noisy_attack(bias, m, noise, static_cast<std::uint64_t>(trials), seed, rho);
    extra["exact_moment"] = noisy_conditional_guesswork_moment(bias, noise, m, rho);
    extra["asymptotic_exponent"] = noisy_guesswork_exponent(bias, noise, rho);
  } else {
    throw ValidationError("config key 'attack_mode': expected dictionary or noisy");
  }
  ensure_dir(out_dir);
  json doc = json::parse(attack_result_json(result));
  doc["attack_mode"] = mode;
  doc["bias_p"] = bias.p1();
  doc["noise_eps"] = noise.eps();
  doc["seed"] = seed;
  doc.update(extra);
  write_json(out_dir / "attack_result.json", doc);
  write_text_file(out_dir / "success_curve.csv", success_curve_csv(result.success_curve));
  log << mode << " attack, m=" << m << ", " << trials << " trials: E[G^" << rho
      << "] = " << result.moment_rho << " +- " << result.moment_std_error << " (exact "
      << extra["exact_moment"].get<double>() << ")\n";
}

void cmd_distances(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  config.reject_unknown({"counts", "joint", "rho", "smoothing"});
  const double rho = positive_rho(config);
  if (config.has("counts") == config.has("joint")) {
    throw ValidationError("distances needs exactly one of 'counts' or 'joint'");
  }
  std::optional<JointPMF> joint;
  if (config.has("counts")) {
    const auto v = config.get_doubles("counts", {});
    if (v.size() != 4) throw ValidationError("config key 'counts': expected n00,n01,n10,n11");
    JointCounts counts{};
    for (int i = 0; i < 4; ++i) {
      if (v[i] < 0.0 || v[i] != std::floor(v[i])) {
        throw ValidationError("config key 'counts': counts must be non-negative integers");
      }
      counts[i / 2][i % 2] = static_cast<std::uint64_t>(v[i]);
    }
    joint = estimate_joint(counts, config.get_double("smoothing", 0.0));
  } else {
    const auto v = config.get_doubles("joint", {});
    if (v.size() != 4) throw ValidationError("config key 'joint': expected p00,p01,p10,p11");
    joint = JointPMF({{{v[0], v[1]}, {v[2], v[3]}}});
  }
  const auto [px, py] = marginals(*joint);
  const auto independent = product_joint(px, py);
  json doc = {{"joint", joint->flat()},
              {"px1", px.p1()},
              {"py1", py.p1()},
              {"rho", rho},
              {"kl_bits", kl_divergence(*joint, independent)},
              {"tvd", total_variation(*joint, independent)},
              {"mutual_information_bits", mutual_information(*joint)},
              {"renyi_conditional_entropy_bits", renyi_conditional_entropy(*joint, rho)}};
  if (px.p1() > 0.0 && px.p1() < 1.0) {
    doc["gw"] = guesswork_distance(*joint, rho);
  } else {
    doc["gw"] = "undefined";
  }
  ensure_dir(out_dir);
  write_json(out_dir / "distances.json", doc);
  log << "KL " << doc["kl_bits"].get<double>() << " bits, TVD " << doc["tvd"].get<double>()
      << ", GW " << doc["gw"].dump() << "\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gate-oxide-breakdown PUF simulation and security analysis"};
  app.name("puf-forge");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Flat key = value config file");
  app.add_option("--seed", seed, "Random seed (u64)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--set", overrides, "Config override key=value (repeatable)");

  auto* simulate = app.add_subcommand("simulate", "Simulate a chip campaign");
  auto* report = app.add_subcommand("report", "Metric reports over a bit matrix");
  std::string which;
  std::string input;
  std::string meta;
  report->add_option("which", which, "fhd|ber|breakdown|independence|guesswork")->required();
  report->add_option("--input", input, "Bit matrix CSV");
  report->add_option("--meta", meta, "Sidecar JSON (default: input with .json extension)");
  auto* attack = app.add_subcommand("attack", "Simulate a dictionary attack");
  auto* distances = app.add_subcommand("distances", "Statistical distances of one bit pair");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key=value");
      config.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (simulate->parsed()) {
      cmd_simulate(config, seed, out_dir, out);
    } else if (report->parsed()) {
      cmd_report(which, config, input, meta, out_dir, out);
    } else if (attack->parsed()) {
      cmd_attack(config, seed, out_dir, out);
    } else if (distances->parsed()) {
      cmd_distances(config, out_dir, out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace puf::cli
