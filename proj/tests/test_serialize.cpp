#include <gtest/gtest.h>

#include <filesystem>
#include <unistd.h>

#include "equilie/serialize.hpp"

using namespace equilie;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("equilie_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(RepJson, RoundTripIsBitExact) {
  for (const Rep& r : {su2_irrep(3), o3_irrep(2, -1), so13_irrep(1, 2), sun_irrep({2, 1, 0})}) {
    const Rep back = rep_from_json(Json::parse(dump_json(rep_to_json(r))));
    ASSERT_EQ(back.dim(), r.dim());
    ASSERT_EQ(back.num_discrete(), r.num_discrete());
    for (std::size_t i = 0; i < r.infinitesimal().size(); ++i)
      EXPECT_EQ(max_abs(back.infinitesimal()[i] - r.infinitesimal()[i]), 0.0);
    for (std::size_t i = 0; i < r.discrete().size(); ++i)
      EXPECT_EQ(max_abs(back.discrete()[i] - r.discrete()[i]), 0.0);
    EXPECT_TRUE(back.algebra()->same_structure(*r.algebra(), 0.0));
    EXPECT_EQ(rep_hash(back), rep_hash(r));
  }
}

TEST(RepJson, MalformedInputThrows) {
  Json j = rep_to_json(su2_irrep(1));
  j["infinitesimal"][0][0][0] = "x";
  EXPECT_THROW(rep_from_json(j), std::invalid_argument);
  Json k = rep_to_json(su2_irrep(1));
  k["dim"] = 3;
  EXPECT_THROW(rep_from_json(k), std::invalid_argument);
  Json m = rep_to_json(su2_irrep(1));
  m.erase("algebra");
  EXPECT_THROW(rep_from_json(m), std::invalid_argument);
}

TEST(RepHash, DistinguishesReps) {
  EXPECT_NE(rep_hash(o3_irrep(1, -1)), rep_hash(o3_irrep(1, 1)));
  EXPECT_NE(rep_hash(su2_irrep(1)), rep_hash(su2_irrep(2)));
  EXPECT_EQ(generic_label(su2_irrep(1)).rfind("generic:", 0), 0u);
}

TEST(CouplingJson, RoundTripAndSortedEntries) {
  const CouplingTensor ct = clebsch_gordan(su2_irrep(2), su2_irrep(1), su2_irrep(1));
  const Json j = coupling_to_json(ct);
  EXPECT_EQ(j.at("multiplicity").get<int>(), 1);
  EXPECT_EQ(j.at("order").get<int>(), 2);
  EXPECT_FALSE(j.at("symmetric").get<bool>());
  std::vector<std::vector<double>> keys;
  for (const Json& e : j.at("entries")) {
    std::vector<double> k;
    for (int i = 0; i < 4; ++i) k.push_back(e[i].get<double>());
    keys.push_back(k);
  }
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));

  const Rep ins[] = {su2_irrep(2), su2_irrep(1)};
  const CouplingTensor back = coupling_from_json(Json::parse(dump_json(j)), ins, su2_irrep(1));
  ASSERT_EQ(back.multiplicity(), 1);
  EXPECT_EQ(max_abs(back.solutions[0] - ct.solutions[0]), 0.0);
}

TEST(CouplingJson, SymmetricRoundTrip) {
  const CouplingTensor ct = symmetric_coupling(so3_irrep(1), 3, so3_irrep(1));
  const Rep ins[] = {so3_irrep(1)};
  const CouplingTensor back = coupling_from_json(coupling_to_json(ct), ins, so3_irrep(1));
  ASSERT_EQ(back.multiplicity(), ct.multiplicity());
  EXPECT_TRUE(back.symmetric);
  for (int a = 0; a < ct.multiplicity(); ++a) EXPECT_EQ(max_abs(back.solutions[a] - ct.solutions[a]), 0.0);
}

TEST(CouplingJson, BadEntriesThrow) {
  Json j = coupling_to_json(clebsch_gordan(su2_irrep(1), su2_irrep(1), su2_irrep(0)));
  j["entries"][0][0] = 7;
  const Rep ins[] = {su2_irrep(1), su2_irrep(1)};
  EXPECT_THROW(coupling_from_json(j, ins, su2_irrep(0)), std::invalid_argument);
}

TEST(CouplingStore, CacheFileEqualsFreshComputation) {
  const fs::path dir = scratch("cache");
  const Rep in = so3_irrep(1), out = so3_irrep(2);
  {
    CouplingStore store(dir);
    store.symmetric(in, "SO3(1)", 2, out, "SO3(2)");
    EXPECT_EQ(store.computed_count(), 1u);
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  ASSERT_EQ(files.size(), 1u);
  SymmetricCouplingOptions opt;
  opt.input_label = "SO3(1)";
  opt.output_label = "SO3(2)";
  EXPECT_EQ(read_text_file(files[0]), dump_json(coupling_to_json(symmetric_coupling(in, 2, out, opt))));

  CouplingStore reader(dir, false);
  const CouplingTensor ct = reader.symmetric(in, "SO3(1)", 2, out, "SO3(2)");
  EXPECT_EQ(reader.computed_count(), 0u);
  EXPECT_EQ(ct.multiplicity(), 1);
  fs::remove_all(dir);
}

TEST(CouplingStore, MissingWithoutComputeThrows) {
  CouplingStore store(std::nullopt, false);
  EXPECT_THROW(store.pair(su2_irrep(1), "SU2(1)", su2_irrep(1), "SU2(1)", su2_irrep(0), "SU2(0)"),
               MissingCouplingError);
}

TEST(CouplingStore, PreloadedTableIsUsedAndChecked) {
  const fs::path dir = scratch("preload");
  const CouplingTensor ct = clebsch_gordan(su2_irrep(1), su2_irrep(1), su2_irrep(2));
  CouplingTensor labeled = ct;
  labeled.input_labels = {"SU2(1)", "SU2(1)"};
  labeled.output_label = "SU2(2)";
  write_text_file(dir / "t.json", dump_json(coupling_to_json(labeled)));

  CouplingStore store(std::nullopt, false);
  store.preload(dir / "t.json");
  const CouplingTensor got = store.pair(su2_irrep(1), "SU2(1)", su2_irrep(1), "SU2(1)", su2_irrep(2), "SU2(2)");
  EXPECT_EQ(max_abs(got.solutions[0] - ct.solutions[0]), 0.0);

  // a table whose coefficients were tampered with is rejected
  Json bad = coupling_to_json(labeled);
  bad["entries"][0][5] = 0.9;
  write_text_file(dir / "bad.json", dump_json(bad));
  CouplingStore other(std::nullopt, false);
  other.preload(dir / "bad.json");
  EXPECT_THROW(other.pair(su2_irrep(1), "SU2(1)", su2_irrep(1), "SU2(1)", su2_irrep(2), "SU2(2)"),
               ConfigurationError);
  fs::remove_all(dir);
}

TEST(TextFiles, WriteIsAtomicAndReadable) {
  const fs::path dir = scratch("text");
  write_text_file(dir / "sub" / "a.txt", "hello\n");
  EXPECT_EQ(read_text_file(dir / "sub" / "a.txt"), "hello\n");
  EXPECT_FALSE(fs::exists(dir / "sub" / "a.txt.tmp"));
  EXPECT_THROW(read_text_file(dir / "missing.txt"), std::runtime_error);
  fs::remove_all(dir);
}
