#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "puf/bit_matrix.hpp"
#include "puf/error.hpp"

using namespace puf;

namespace {

BitMatrix small_matrix() {
  std::vector<LocationMeta> meta = {{"V_T1", "V1", 0}, {"M_T2", "M2", 1}, {"P_T3", "P3", 2}};
  std::vector<MeasurementSet> sets = {
      {kReferenceCorner, 0, {1, 0, 1, 0, 0, 1}},
      {Corner{1.2, 100.0}, 0, {1, 0, 1, 0, 1, 1}},
      {Corner{1.2, 100.0}, 1, {1, 0, 1, 0, 0, 1}},
  };
  return BitMatrix({3, 8}, meta, sets, 0);
}

const char* kSidecar = R"({"format":"puf-bitmatrix-v1","chips":[1,2],
  "locations":[{"column":"loc_000","structure_tag":"V_T1","antenna_class":"V1","adjacency_index":0},
               {"column":"loc_001","structure_tag":"V_T2","antenna_class":"V2","adjacency_index":1}],
  "reference":{"corner_v":1.0,"corner_t":25.0,"repeat":0}})";

}  // namespace

TEST_CASE("bit matrix CSV round trip") {
  const auto bits = small_matrix();
  const auto csv = bit_matrix_csv(bits);
  CHECK(csv.rfind("chip_id,corner_v,corner_t,repeat,loc_000,loc_001,loc_002\n", 0) == 0);
  const auto back = parse_bit_matrix(csv, bit_matrix_sidecar_json(bits));
  CHECK(back.chip_ids() == bits.chip_ids());
  CHECK(back.locations() == 3);
  CHECK(back.location_meta()[1].structure_tag == "M_T2");
  CHECK(back.location_meta()[2].adjacency_index == 2);
  REQUIRE(back.sets().size() == 3);
  CHECK(back.reference().corner.matches(kReferenceCorner));
  CHECK(back.sets()[1].data == bits.sets()[1].data);
  CHECK(bit_matrix_csv(back) == csv);
  CHECK(back.corners().size() == 2);
  CHECK(back.sets_at(Corner{1.2, 100.0}).size() == 2);
}

TEST_CASE("bit matrix files") {
  const auto dir = std::filesystem::temp_directory_path() / "puf_forge_bitmatrix_test";
  std::filesystem::create_directories(dir);
  write_bit_matrix(small_matrix(), dir / "m.csv", dir / "m.json");
  const auto back = read_bit_matrix(dir / "m.csv", dir / "m.json");
  CHECK(back.chips() == 2);
  CHECK_THROWS_AS(read_bit_matrix(dir / "missing.csv", dir / "m.json"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("schema violations list rows and columns") {
  const std::string csv =
      "chip_id,corner_v,corner_t,repeat,loc_000,loc_001\n"
      "1,1,25,0,1,0\n"
      "2,1,25,0,2,0\n"
      "x,1,25,0,1,1\n"
      "3,1,25,0,1\n";
  try {
    parse_bit_matrix(csv, kSidecar);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3 column loc_000") != std::string::npos);
    CHECK(msg.find("row 4 column chip_id") != std::string::npos);
    CHECK(msg.find("row 5") != std::string::npos);
  }
}

TEST_CASE("header and sidecar mismatches") {
  CHECK_THROWS_WITH_AS(parse_bit_matrix("chip,corner_v,corner_t,repeat,loc_000,loc_001\n1,1,25,0,1,0\n", kSidecar),
                       doctest::Contains("chip_id"), ValidationError);
  CHECK_THROWS_AS(parse_bit_matrix("chip_id,corner_v,corner_t,repeat,loc_000\n1,1,25,0,1\n", kSidecar),
                  ValidationError);
  CHECK_THROWS_AS(parse_bit_matrix("chip_id,corner_v,corner_t,repeat,loc_000,loc_001\n1,1,25,0,1,0\n", "{"),
                  ValidationError);
}

TEST_CASE("missing reference is an error") {
  const std::string csv =
      "chip_id,corner_v,corner_t,repeat,loc_000,loc_001\n"
      "1,1.2,25,0,1,0\n"
      "2,1.2,25,0,0,0\n";
  CHECK_THROWS_WITH_AS(parse_bit_matrix(csv, kSidecar), doctest::Contains("reference"), ValidationError);
}

TEST_CASE("incomplete measurement sets are rejected") {
  const std::string csv =
      "chip_id,corner_v,corner_t,repeat,loc_000,loc_001\n"
      "1,1,25,0,1,0\n"
      "2,1,25,0,0,0\n"
      "1,1.2,25,0,1,0\n";
  CHECK_THROWS_AS(parse_bit_matrix(csv, kSidecar), ValidationError);
}

TEST_CASE("corner labels and number formatting") {
  CHECK(Corner{1.2, 25.0}.label() == "1.2V_25C");
  CHECK(Corner{1.0, 100.0}.label() == "1V_100C");
  CHECK(default_corners().size() == 6);
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(128.0) == "128");
  CHECK(location_column(7) == "loc_007");
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(BitMatrix({1, 2}, {{"A", "a", 0}}, {{kReferenceCorner, 0, {1, 2}}}, 0), ValidationError);
  CHECK_THROWS_AS(BitMatrix({1, 2}, {{"A", "a", 0}}, {{kReferenceCorner, 0, {1}}}, 0), ValidationError);
  CHECK_THROWS_AS(BitMatrix({1, 2}, {{"A", "a", 0}}, {{kReferenceCorner, 0, {1, 0}}}, 3), ValidationError);
}
