#include "puf/bit_matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "puf/error.hpp"

namespace puf {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxDiagnostics = 20;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
bool parse_value(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

class Diagnostics {
 public:
  void add(std::string message) {
    ++count_;
    if (messages_.size() < kMaxDiagnostics) messages_.push_back(std::move(message));
  }
  bool empty() const { return count_ == 0; }
  [[noreturn]] void raise(const std::string& what) const {
    std::ostringstream msg;
    msg << what << ": " << count_ << " schema violation(s)";
    for (const auto& m : messages_) msg << "\n  " << m;
    if (count_ > messages_.size()) msg << "\n  ... " << (count_ - messages_.size()) << " more";
    throw ValidationError(msg.str());
  }

 private:
  std::vector<std::string> messages_;
  std::size_t count_ = 0;
};

}  // namespace

bool Corner::matches(const Corner& other) const {
  return std::abs(voltage - other.voltage) < 1e-9 && std::abs(temperature - other.temperature) < 1e-9;
}

std::string Corner::label() const {
  return format_number(voltage) + "V_" + format_number(temperature) + "C";
}

std::vector<Corner> default_corners() {
  std::vector<Corner> corners;
  for (double t : {25.0, 100.0})
    for (double v : {0.8, 1.0, 1.2}) corners.push_back({v, t});
  return corners;
}

BitMatrix::BitMatrix(std::vector<int> chip_ids, std::vector<LocationMeta> locations,
                     std::vector<MeasurementSet> sets, std::size_t reference_index)
    : chip_ids_(std::move(chip_ids)),
      locations_(std::move(locations)),
      sets_(std::move(sets)),
      reference_index_(reference_index) {
  if (locations_.empty()) throw ValidationError("bit matrix needs at least one location");
  if (sets_.empty()) throw ValidationError("bit matrix needs at least one measurement set");
  if (reference_index_ >= sets_.size()) throw ValidationError("missing reference measurement set");
  const std::size_t cells = chip_ids_.size() * locations_.size();
  for (const auto& set : sets_) {
    if (set.data.size() != cells) throw ValidationError("measurement set has wrong size");
    if (std::any_of(set.data.begin(), set.data.end(), [](std::uint8_t b) { return b > 1; })) {
      throw ValidationError("bit matrix entries must be 0 or 1");
    }
  }
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    for (std::size_t j = i + 1; j < sets_.size(); ++j) {
      if (sets_[i].corner.matches(sets_[j].corner) && sets_[i].repeat == sets_[j].repeat) {
        throw ValidationError("duplicate measurement set at " + sets_[i].corner.label() +
                              " repeat " + std::to_string(sets_[i].repeat));
      }
    }
  }
}

std::vector<std::size_t> BitMatrix::sets_at(const Corner& corner) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sets_.size(); ++i)
    if (sets_[i].corner.matches(corner)) out.push_back(i);
  return out;
}

std::vector<Corner> BitMatrix::corners() const {
  std::vector<Corner> out;
  for (const auto& s : sets_) {
    if (std::none_of(out.begin(), out.end(), [&](const Corner& c) { return c.matches(s.corner); })) {
      out.push_back(s.corner);
    }
  }
  return out;
}

std::string location_column(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "loc_" + digits;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // avoids "-0"
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string bit_matrix_csv(const BitMatrix& bits) {
  std::string out = "chip_id,corner_v,corner_t,repeat";
  for (std::size_t l = 0; l < bits.locations(); ++l) out += "," + location_column(l);
  out += "\n";
  for (const auto& set : bits.sets()) {
    const std::string prefix =
        "," + format_number(set.corner.voltage) + "," + format_number(set.corner.temperature) +
        "," + std::to_string(set.repeat);
    for (std::size_t c = 0; c < bits.chips(); ++c) {
      out += std::to_string(bits.chip_ids()[c]) + prefix;
      for (auto b : bits.row(set, c)) {
        out += ',';
        out += static_cast<char>('0' + b);
      }
      out += "\n";
    }
  }
  return out;
}

std::string bit_matrix_sidecar_json(const BitMatrix& bits) {
  json locations = json::array();
  for (std::size_t l = 0; l < bits.locations(); ++l) {
    const auto& meta = bits.location_meta()[l];
    locations.push_back({{"column", location_column(l)},
                         {"structure_tag", meta.structure_tag},
                         {"antenna_class", meta.antenna_class},
                         {"adjacency_index", meta.adjacency_index}});
  }
  const auto& ref = bits.reference();
  json doc = {{"format", "puf-bitmatrix-v1"},
              {"chips", bits.chips()},
              {"locations", locations},
              {"reference",
               {{"corner_v", ref.corner.voltage},
                {"corner_t", ref.corner.temperature},
                {"repeat", ref.repeat}}}};
  return doc.dump(2) + "\n";
}

BitMatrix parse_bit_matrix(const std::string& csv_text, const std::string& sidecar_text) {
  json meta;
  try {
    meta = json::parse(sidecar_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("sidecar JSON: ") + e.what());
  }

  std::vector<LocationMeta> locations;
  Corner ref_corner;
  int ref_repeat = 0;
  try {
    for (const auto& loc : meta.at("locations")) {
      locations.push_back({loc.at("structure_tag").get<std::string>(),
                           loc.value("antenna_class", loc.at("structure_tag").get<std::string>()),
                           loc.at("adjacency_index").get<int>()});
    }
    const auto& ref = meta.at("reference");
    ref_corner = {ref.at("corner_v").get<double>(), ref.at("corner_t").get<double>()};
    ref_repeat = ref.at("repeat").get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("sidecar JSON: ") + e.what());
  }
  if (locations.empty()) throw ValidationError("sidecar JSON: no locations");

  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("bit matrix CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Diagnostics diag;
  const auto header = split(line, ',');
  const std::vector<std::string> fixed = {"chip_id", "corner_v", "corner_t", "repeat"};
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (i >= header.size() || header[i] != fixed[i]) {
      diag.add("header column " + std::to_string(i + 1) + ": expected '" + fixed[i] + "'");
    }
  }
  if (header.size() != fixed.size() + locations.size()) {
    diag.add("header: " + std::to_string(header.size() - std::min(header.size(), fixed.size())) +
             " location columns, sidecar lists " + std::to_string(locations.size()));
  } else {
    for (std::size_t l = 0; l < locations.size(); ++l) {
      if (header[fixed.size() + l] != location_column(l)) {
        diag.add("header column " + std::to_string(fixed.size() + l + 1) + ": expected '" +
                 location_column(l) + "'");
      }
    }
  }
  if (!diag.empty()) diag.raise("bit matrix CSV");

  struct Row {
    int chip;
    Corner corner;
    int repeat;
    std::vector<std::uint8_t> bits;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      diag.add("row " + std::to_string(line_no) + ": " + std::to_string(fields.size()) +
               " fields, expected " + std::to_string(header.size()));
      continue;
    }
    Row row;
    bool ok = true;
    if (!parse_value(fields[0], row.chip)) {
      diag.add("row " + std::to_string(line_no) + " column chip_id: not an integer");
      ok = false;
    }
    if (!parse_value(fields[1], row.corner.voltage) || !(row.corner.voltage > 0.0)) {
      diag.add("row " + std::to_string(line_no) + " column corner_v: expected positive number");
      ok = false;
    }
    if (!parse_value(fields[2], row.corner.temperature)) {
      diag.add("row " + std::to_string(line_no) + " column corner_t: not a number");
      ok = false;
    }
    if (!parse_value(fields[3], row.repeat) || row.repeat < 0) {
      diag.add("row " + std::to_string(line_no) + " column repeat: expected integer >= 0");
      ok = false;
    }
    row.bits.resize(locations.size());
    for (std::size_t l = 0; l < locations.size(); ++l) {
      const auto& f = fields[fixed.size() + l];
      if (f == "0" || f == "1") {
        row.bits[l] = static_cast<std::uint8_t>(f[0] - '0');
      } else {
        diag.add("row " + std::to_string(line_no) + " column " + location_column(l) +
                 ": expected 0 or 1, got '" + f + "'");
        ok = false;
      }
    }
    if (ok) rows.push_back(std::move(row));
  }
  if (!diag.empty()) diag.raise("bit matrix CSV");
  if (rows.empty()) throw ValidationError("bit matrix CSV has no data rows");

  std::vector<int> chip_ids;
  std::map<int, std::size_t> chip_index;
  for (const auto& r : rows) {
    if (chip_index.emplace(r.chip, chip_ids.size()).second) chip_ids.push_back(r.chip);
  }

  std::vector<MeasurementSet> sets;
  std::vector<std::vector<bool>> seen;
  const std::size_t width = locations.size();
  for (const auto& r : rows) {
    auto it = std::find_if(sets.begin(), sets.end(), [&](const MeasurementSet& s) {
      return s.corner.matches(r.corner) && s.repeat == r.repeat;
    });
    if (it == sets.end()) {
      sets.push_back({r.corner, r.repeat, std::vector<std::uint8_t>(chip_ids.size() * width, 0)});
      seen.emplace_back(chip_ids.size(), false);
      it = sets.end() - 1;
    }
    const auto s = static_cast<std::size_t>(it - sets.begin());
    const std::size_t c = chip_index.at(r.chip);
    if (seen[s][c]) {
      diag.add("chip " + std::to_string(r.chip) + " appears twice at " + r.corner.label() +
               " repeat " + std::to_string(r.repeat));
      continue;
    }
    seen[s][c] = true;
    std::copy(r.bits.begin(), r.bits.end(), it->data.begin() + static_cast<std::ptrdiff_t>(c * width));
  }
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t c = 0; c < chip_ids.size(); ++c) {
      if (!seen[s][c]) {
        diag.add("chip " + std::to_string(chip_ids[c]) + " missing at " + sets[s].corner.label() +
                 " repeat " + std::to_string(sets[s].repeat));
      }
    }
  }
  if (!diag.empty()) diag.raise("bit matrix CSV");

  auto ref = std::find_if(sets.begin(), sets.end(), [&](const MeasurementSet& s) {
    return s.corner.matches(ref_corner) && s.repeat == ref_repeat;
  });
  if (ref == sets.end()) {
    throw ValidationError("missing reference measurement set " + ref_corner.label() + " repeat " +
                          std::to_string(ref_repeat));
  }
  const auto ref_index = static_cast<std::size_t>(ref - sets.begin());
  return BitMatrix(std::move(chip_ids), std::move(locations), std::move(sets), ref_index);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void write_bit_matrix(const BitMatrix& bits, const std::filesystem::path& csv_path,
                      const std::filesystem::path& sidecar_path) {
  write_text_file(csv_path, bit_matrix_csv(bits));
  write_text_file(sidecar_path, bit_matrix_sidecar_json(bits));
}

BitMatrix read_bit_matrix(const std::filesystem::path& csv_path,
                          const std::filesystem::path& sidecar_path) {
  return parse_bit_matrix(read_text_file(csv_path), read_text_file(sidecar_path));
}

}  // namespace puf
