#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace puf {

/// Operating point: supply voltage (V) and temperature (degC).
struct Corner {
  double voltage = 1.0;
  double temperature = 25.0;

  bool matches(const Corner& other) const;
  std::string label() const;
};

/// The six stability corners: {0.8, 1.0, 1.2} V x {25, 100} degC.
std::vector<Corner> default_corners();
inline constexpr Corner kReferenceCorner{1.0, 25.0};

struct LocationMeta {
  std::string structure_tag;
  std::string antenna_class;
  int adjacency_index = 0;
};

/// One read of every cell on every chip at a corner; data is row-major
/// chips x locations with entries 0/1.
struct MeasurementSet {
  Corner corner;
  int repeat = 0;
  std::vector<std::uint8_t> data;
};

class BitMatrix {
 public:
  BitMatrix(std::vector<int> chip_ids, std::vector<LocationMeta> locations,
            std::vector<MeasurementSet> sets, std::size_t reference_index);

  std::size_t chips() const { return chip_ids_.size(); }
  std::size_t locations() const { return locations_.size(); }
  const std::vector<int>& chip_ids() const { return chip_ids_; }
  const std::vector<LocationMeta>& location_meta() const { return locations_; }
  const std::vector<MeasurementSet>& sets() const { return sets_; }
  std::size_t reference_index() const { return reference_index_; }
  const MeasurementSet& reference() const { return sets_[reference_index_]; }

  /// Indices of the measurement sets taken at `corner`.
  std::vector<std::size_t> sets_at(const Corner& corner) const;
  /// Distinct corners in order of first appearance.
  std::vector<Corner> corners() const;

  std::uint8_t bit(const MeasurementSet& set, std::size_t chip, std::size_t loc) const {
    return set.data[chip * locations() + loc];
  }
  std::span<const std::uint8_t> row(const MeasurementSet& set, std::size_t chip) const {
    return std::span<const std::uint8_t>(set.data).subspan(chip * locations(), locations());
  }

 private:
  std::vector<int> chip_ids_;
  std::vector<LocationMeta> locations_;
  std::vector<MeasurementSet> sets_;
  std::size_t reference_index_;
};

std::string location_column(std::size_t index);

// CSV layout: header `chip_id,corner_v,corner_t,repeat,loc_000,...`, one row
// per (chip, corner, repeat). The sidecar JSON carries per-location metadata
// and identifies the reference measurement set.
std::string bit_matrix_csv(const BitMatrix& bits);
std::string bit_matrix_sidecar_json(const BitMatrix& bits);

/// Parses CSV text plus sidecar JSON text. Schema violations raise
/// ValidationError listing every offending row/column.
BitMatrix parse_bit_matrix(const std::string& csv_text, const std::string& sidecar_text);

void write_bit_matrix(const BitMatrix& bits, const std::filesystem::path& csv_path,
                      const std::filesystem::path& sidecar_path);
BitMatrix read_bit_matrix(const std::filesystem::path& csv_path,
                          const std::filesystem::path& sidecar_path);

// Shared text helpers.
std::string format_number(double value);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace puf
