#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "equilie/cluster.hpp"
#include "equilie/fit.hpp"
#include "equilie/serialize.hpp"

using namespace equilie;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("equilie_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

constexpr const char* kScalarConfig = R"J({"group": "O3",
  "embedding": {"kind": "radial_harmonic", "l_max": 2, "n_max": 3, "r_cut": 3.0},
  "channels": 3, "correlation_order": 3, "outputs": ["O3(0,1)"], "seed": 4})J";

}  // namespace

TEST_F(CliTest, CgSpinHalfSinglet) {
  const Result r = call({"cg", "SU2", "1", "1", "0", "--out", path("t.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "multiplicity 1\n");
  const Json j = Json::parse(read_text_file(path("t.json")));
  EXPECT_EQ(j["multiplicity"], 1);
  EXPECT_EQ(j["inputs"], Json::array({"SU2(1)", "SU2(1)"}));
  EXPECT_EQ(j["entries"].size(), 2u);
}

TEST_F(CliTest, CgForbiddenWritesEmptyTableWithWarning) {
  const Result r = call({"cg", "SU2", "0", "0", "2", "-o", path("t.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_TRUE(Json::parse(read_text_file(path("t.json")))["entries"].empty());
}

TEST_F(CliTest, CgSU3Singlet) {
  const Result r = call({"cg", "SU3", "[1,0,0]", "[1,1,0]", "[0,0,0]"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, 15), "multiplicity 1\n");
}

TEST_F(CliTest, CgAcceptsFullLabels) {
  EXPECT_EQ(call({"cg", "O3", "O3(1,-1)", "1", "0,1"}).code, 0);
  EXPECT_EQ(call({"cg", "O3", "SO3(1)", "1", "0"}).code, 2);
}

TEST_F(CliTest, ParseFailuresExitTwo) {
  EXPECT_EQ(call({"cg", "SU2", "one", "1", "0"}).code, 2);
  EXPECT_EQ(call({"cg", "SU9x", "1", "1", "0"}).code, 2);
  EXPECT_EQ(call({"cg", "SU2", "1", "1"}).code, 2);
  EXPECT_EQ(call({"cg", "SU2", "1", "1", "0", "--frobnicate"}).code, 2);
  EXPECT_EQ(call({"--threads", "0", "demo", "o3-invariant"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"demo", "top-tagging"}).code, 2);
  EXPECT_EQ(call({"cg", "SU2", "1", "1", "0", "-o", path("no/such/dir/t.json")}).code, 2);
}

TEST_F(CliTest, CheckPassFailMalformed) {
  write_text_file(path("good.json"), dump_json(rep_to_json(su2_irrep(2))));
  const Result good = call({"check", path("good.json")});
  EXPECT_EQ(good.code, 0);
  EXPECT_EQ(good.out.rfind("result PASS\n", 0), 0u);
  EXPECT_NE(good.out.find("max_residual "), std::string::npos);
  EXPECT_NE(good.out.find("jacobi_residual "), std::string::npos);

  Json bad = rep_to_json(su2_irrep(2));
  bad["infinitesimal"][1][0][0][0] = 0.25;
  write_text_file(path("bad.json"), dump_json(bad));
  const Result fail = call({"check", path("bad.json")});
  EXPECT_EQ(fail.code, 1);
  EXPECT_EQ(fail.out.rfind("result FAIL\n", 0), 0u);

  const std::string text = read_text_file(path("good.json"));
  write_text_file(path("cut.json"), text.substr(0, text.size() / 2));
  EXPECT_EQ(call({"check", path("cut.json")}).code, 2);
  EXPECT_EQ(call({"check", path("absent.json")}).code, 2);
}

TEST_F(CliTest, CheckToleranceOverride) {
  Json j = rep_to_json(su2_irrep(2));
  j["infinitesimal"][1][0][0][0] = 1e-7;
  write_text_file(path("r.json"), dump_json(j));
  EXPECT_EQ(call({"check", path("r.json")}).code, 1);
  EXPECT_EQ(call({"--tol", "1e-5", "check", path("r.json")}).code, 0);
}

TEST_F(CliTest, CoupleExamples) {
  EXPECT_EQ(call({"couple", "SO3", "1", "2", "0"}).out.substr(0, 15), "multiplicity 1\n");
  const Result zero = call({"couple", "SO3", "1", "2", "1", "-o", path("z.json")});
  EXPECT_EQ(zero.out, "multiplicity 0\n");
  EXPECT_NE(zero.err.find("warning"), std::string::npos);
  EXPECT_EQ(call({"couple", "SU2", "1", "3", "3", "-o", path("s.json")}).out, "multiplicity 1\n");
  EXPECT_TRUE(Json::parse(read_text_file(path("s.json")))["symmetric"].get<bool>());
  EXPECT_EQ(call({"couple", "SO3", "1", "0", "0"}).code, 2);
}

TEST_F(CliTest, FeaturesPermutationAndEmptyCloud) {
  write_text_file(path("cfg.json"), kScalarConfig);
  write_text_file(path("a.txt"), "0.1 0.2 0.3\n-0.4 0.5 0.1\n0.9 -0.3 0.2\n");
  write_text_file(path("b.txt"), "0.9 -0.3 0.2\n0.1 0.2 0.3\n-0.4 0.5 0.1\n");
  write_text_file(path("e.json"), R"({"particles": []})");
  ASSERT_EQ(call({"features", path("cfg.json"), path("a.txt"), "-o", path("fa.json")}).code, 0);
  ASSERT_EQ(call({"features", path("cfg.json"), path("b.txt"), "-o", path("fb.json")}).code, 0);
  EXPECT_EQ(read_text_file(path("fa.json")), read_text_file(path("fb.json")));

  const Result empty = call({"features", path("cfg.json"), path("e.json")});
  ASSERT_EQ(empty.code, 0);
  for (const Json& b : Json::parse(empty.out)["blocks"])
    for (const Json& v : b["values"]) EXPECT_EQ(v, Json::array({0.0, 0.0}));
}

TEST_F(CliTest, FeaturesRotatedCloudKeepsInvariants) {
  write_text_file(path("cfg.json"), kScalarConfig);
  const PointCloud cloud = parse_cloud("0.1 0.2 0.3\n-0.4 0.5 0.1\n0.9 -0.3 0.2\n0.0 0.0 -0.7\n");
  CouplingStore store;
  const Model model(ModelConfig::from_json(Json::parse(kScalarConfig)), store);
  GroupSample g = sample_for(model, 9, 3.0);
  g.discrete_index = 0;
  write_text_file(path("a.json"), dump_json(cloud_to_json(cloud)));
  write_text_file(path("r.json"), dump_json(cloud_to_json(transform_cloud(model.embedding(), cloud, g))));
  const Result a = call({"features", path("cfg.json"), path("a.json")});
  const Result r = call({"features", path("cfg.json"), path("r.json")});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(r.code, 0);
  const Json ja = Json::parse(a.out)["blocks"], jr = Json::parse(r.out)["blocks"];
  ASSERT_EQ(ja.size(), jr.size());
  double diff = 0.0;
  for (std::size_t b = 0; b < ja.size(); ++b)
    for (std::size_t k = 0; k < ja[b]["values"].size(); ++k)
      for (int c = 0; c < 2; ++c)
        diff = std::max(diff, std::abs(ja[b]["values"][k][c].get<double>() - jr[b]["values"][k][c].get<double>()));
  EXPECT_LT(diff, 1e-8) << "max invariant difference " << diff;
}

TEST_F(CliTest, FeaturesMissingTablesExitThree) {
  write_text_file(path("cfg.json"), kScalarConfig);
  write_text_file(path("a.txt"), "0.1 0.2 0.3\n");
  const std::string cache = path("cache");
  EXPECT_EQ(call({"features", path("cfg.json"), path("a.txt"), "--no-compute", "--cache-dir", cache}).code, 3);
  const Result filled = call({"--cache-dir", cache, "features", path("cfg.json"), path("a.txt")});
  ASSERT_EQ(filled.code, 0);
  const Result cached = call({"features", path("cfg.json"), path("a.txt"), "--no-compute", "--cache-dir", cache});
  EXPECT_EQ(cached.code, 0);
  EXPECT_EQ(cached.out, filled.out);
}

TEST_F(CliTest, FeaturesUsesTablesNamedInConfig) {
  ASSERT_EQ(call({"couple", "SO3", "1", "2", "0", "-o", path("t1.json")}).code, 0);
  write_text_file(path("cfg.json"), R"J({"group": "SO3",
    "embedding": {"kind": "rep_coordinates", "base": "SO3(1)"}, "channels": 1, "mix": "identity",
    "correlation_order": 2, "outputs": ["SO3(0)"], "coupling_tables": ["t1.json"]})J");
  write_text_file(path("a.txt"), "0.1 0.2 0.3\n");
  // order-1 tables are still missing, so computation must be allowed
  EXPECT_EQ(call({"features", path("cfg.json"), path("a.txt"), "--no-compute"}).code, 3);
  EXPECT_EQ(call({"features", path("cfg.json"), path("a.txt")}).code, 0);
  write_text_file(path("cfg2.json"), R"J({"group": "SO3",
    "embedding": {"kind": "rep_coordinates", "base": "SO3(1)"}, "channels": 1,
    "coupling_tables": ["missing.json"]})J");
  EXPECT_EQ(call({"features", path("cfg2.json"), path("a.txt")}).code, 2);
}

TEST_F(CliTest, DemoIsDeterministic) {
  const Result a = call({"demo", "lorentz-mass", "--seed", "7"});
  const Result b = call({"--seed", "7", "demo", "lorentz-mass", "-o", path("r.txt")});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(read_text_file(path("r.txt")), a.out);
  EXPECT_NE(a.out.find("result PASS"), std::string::npos);
}

TEST(CliLabels, Shorthand) {
  EXPECT_EQ(cli::parse_cli_label(GroupKind::SU2, 0, "3"), IrrepLabel::su2(3));
  EXPECT_EQ(cli::parse_cli_label(GroupKind::O3, 0, "1"), IrrepLabel::o3(1, -1));
  EXPECT_EQ(cli::parse_cli_label(GroupKind::O3, 0, "1,1"), IrrepLabel::o3(1, 1));
  EXPECT_EQ(cli::parse_cli_label(GroupKind::SO13, 0, "1,1"), IrrepLabel::so13(1, 1));
  EXPECT_EQ(cli::parse_cli_label(GroupKind::SUN, 3, "[2,1,0]"), IrrepLabel::sun({2, 1, 0}));
  EXPECT_THROW(cli::parse_cli_label(GroupKind::SUN, 3, "[2,1]"), std::invalid_argument);
  EXPECT_THROW(cli::parse_cli_label(GroupKind::SU2, 0, "1.5"), std::invalid_argument);
}
