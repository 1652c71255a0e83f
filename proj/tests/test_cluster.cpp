#include <gtest/gtest.h>

#include <atomic>
#include <random>

#include "equilie/cluster.hpp"
#include "equilie/fit.hpp"
#include "oracles.hpp"

using namespace equilie;

namespace {

ModelConfig o3_config(int layers) {
  return ModelConfig::from_json(nlohmann::json::parse(R"J({
    "group": "O3",
    "embedding": {"kind": "radial_harmonic", "l_max": 1, "n_max": 2, "r_cut": 3.0, "num_species": 2},
    "channels": 2, "correlation_order": 3,
    "outputs": ["O3(0,1)", "O3(1,-1)", "O3(2,1)"],
    "layers": )J" + std::to_string(layers) + R"J(,
    "hidden": ["O3(0,1)", "O3(1,-1)"], "hidden_channels": 2, "residual": true, "seed": 5})J"));
}

PointCloud random_cloud(int n, std::uint64_t seed, int species = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointCloud c;
  for (int i = 0; i < n; ++i) c.particles.push_back({{u(rng), u(rng), u(rng), static_cast<double>(i % species)}});
  return c;
}

}  // namespace

TEST(ProductBasis, MatchesNestedSum) {
  CouplingStore store;
  const Model model(o3_config(0), store);
  const Embedding& e = model.embedding();
  Matrix w(2, e.channels());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = Complex(nd(rng), nd(rng));
  for (int n = 1; n <= 4; ++n) {
    const PointCloud cloud = random_cloud(n, 10 + n);
    std::vector<Matrix> phi;
    for (const Particle& p : cloud.particles) phi.push_back(w * e.embed(p));
    for (int nu = 1; nu <= 3; ++nu) {
      const Matrix fast = product_basis(mix_channels(pool_atomic_basis(e, cloud), w), nu);
      const Matrix ref = oracle::nested_product_basis(phi, nu);
      EXPECT_LT(max_abs(fast - ref), 1e-10 * std::max(1.0, max_abs(ref))) << n << " " << nu;
    }
  }
}

TEST(ProductBasis, RejectsOrderZero) { EXPECT_THROW(product_basis(Matrix::Ones(1, 2), 0), std::invalid_argument); }

TEST(Features, PermutationGivesIdenticalBytes) {
  CouplingStore store;
  const Model model(o3_config(2), store);
  const PointCloud c = random_cloud(5, 3);
  PointCloud p = c;
  std::reverse(p.particles.begin(), p.particles.end());
  std::swap(p.particles[0], p.particles[2]);
  EXPECT_EQ(model.features(c).to_json().dump(), model.features(p).to_json().dump());
}

TEST(Features, EmptyCloudIsZero) {
  CouplingStore store;
  const Model model(o3_config(2), store);
  const FeatureField f = model.features(PointCloud{});
  ASSERT_FALSE(f.blocks.empty());
  for (const FeatureBlock& b : f.blocks) EXPECT_EQ(max_abs(b.values), 0.0) << b.family << " " << b.irrep;
}

TEST(Features, EquivariantIncludingInversion) {
  CouplingStore store;
  const Model model(o3_config(2), store);
  for (int s = 0; s < 6; ++s) {
    GroupSample g = sample_for(model, 100 + s, 2.0);
    g.discrete_index = s % 2 ? 0 : -1;
    EXPECT_LT(equivariance_residual(model, random_cloud(2 + s % 4, s), g), 1e-10);
  }
}

TEST(Features, BlocksHaveDeclaredIrrepDimensions) {
  CouplingStore store;
  const Model model(o3_config(1), store);
  const FeatureField f = model.features(random_cloud(3, 1));
  bool saw_layer = false;
  for (const FeatureBlock& b : f.blocks) {
    EXPECT_EQ(b.values.size(), dimension(IrrepLabel::parse(b.irrep)));
    saw_layer |= b.family == "layer=1";
  }
  EXPECT_TRUE(saw_layer);
}

TEST(Mace, StatesHaveExpectedShapes) {
  CouplingStore store;
  const Model model(o3_config(2), store);
  const MaceStates st = model.mace_states(random_cloud(4, 2));
  ASSERT_EQ(st.states.size(), 3u);
  for (int t = 0; t < 3; ++t) {
    ASSERT_EQ(st.states[t].size(), 4u);
    EXPECT_EQ(st.states[t][0].cols(), model.state_rep(t).dim());
  }
  EXPECT_EQ(model.state_rep(1).dim(), 4);
  EXPECT_TRUE(Model(o3_config(0), store).mace_states(random_cloud(3, 1)).states.empty());
}

TEST(Mace, ReadoutsAreInvariantAndRequireTrivialSlot) {
  CouplingStore store;
  const Model model(o3_config(2), store);
  const std::vector<Vector> w{Vector::Ones(2), Vector::Constant(2, Complex(0.5, -1.0))};
  const PointCloud c = random_cloud(4, 8);
  GroupSample g = sample_for(model, 3, 2.0);
  g.discrete_index = 0;
  const PointCloud moved = transform_cloud(model.embedding(), c, g);
  const Complex a = model.global_readout(model.mace_states(c), w);
  const Complex b = model.global_readout(model.mace_states(moved), w);
  EXPECT_LT(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a)));

  ModelConfig cfg = o3_config(1);
  cfg.hidden = {IrrepLabel::o3(1, -1)};
  const Model vec(cfg, store);
  EXPECT_THROW(vec.global_readout(vec.mace_states(c), {Vector::Ones(2)}), ConfigurationError);
}

TEST(ModelConfig, JsonRoundTripAndValidation) {
  const ModelConfig c = o3_config(2);
  EXPECT_EQ(ModelConfig::from_json(c.to_json()).to_json(), c.to_json());
  nlohmann::json j = c.to_json();
  j["colour"] = "blue";
  EXPECT_THROW(ModelConfig::from_json(j), std::invalid_argument);
  nlohmann::json k = c.to_json();
  k["mix"] = "shuffle";
  EXPECT_THROW(ModelConfig::from_json(k), std::invalid_argument);
}

TEST(Model, MissingTablesWithoutComputeThrow) {
  CouplingStore store(std::nullopt, false);
  EXPECT_THROW(Model(o3_config(0), store), MissingCouplingError);
}

TEST(Clouds, TextAndJsonParseAlike) {
  const PointCloud a = parse_cloud("# comment\n1 2 3\n\n4.5 -1e-3 0\n");
  const PointCloud b = parse_cloud(R"({"particles": [{"raw": [1, 2, 3]}, {"raw": [4.5, -0.001, 0]}]})");
  ASSERT_EQ(a.particles.size(), 2u);
  EXPECT_EQ(cloud_to_json(a), cloud_to_json(b));
  EXPECT_EQ(cloud_to_json(cloud_from_json(cloud_to_json(a))), cloud_to_json(a));
  EXPECT_THROW(parse_cloud("1 2 x\n"), std::invalid_argument);
  EXPECT_THROW(parse_cloud("1 2 3\n4 5\n"), std::invalid_argument);
}

TEST(Parallel, EachIndexRunsOnce) {
  std::vector<std::atomic<int>> hits(97);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, DesignMatrixIndependentOfThreads) {
  CouplingStore store;
  const Model model(o3_config(1), store);
  std::vector<LabeledCloud> data;
  for (int i = 0; i < 9; ++i) data.push_back({random_cloud(3 + i % 3, i), 0.0});
  const RealMatrix a = design_matrix(model, data, 1);
  const RealMatrix b = design_matrix(model, data, 3);
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
}
