#include <gtest/gtest.h>

#include "equilie/fit.hpp"

using namespace equilie;

TEST(Ridge, RecoversTargetInFeatureSpan) {
  CouplingStore store;
  const ModelConfig cfg = demo_config(DemoTask::O3Invariant, 1);
  const Model model(cfg, store);
  auto data = demo_dataset(DemoTask::O3Invariant, 2, 60);
  const RealMatrix x = design_matrix(model, data);
  RealVector w = RealVector::LinSpaced(x.cols(), -1.0, 1.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) data[i].target = x.row(i).dot(w) + 0.25;
  const std::span<const LabeledCloud> all(data);
  const FitReport fit = fit_linear(model, all.subspan(0, 45), all.subspan(45), 1e-12);
  EXPECT_LT(fit.rmse_train, 1e-8);
  EXPECT_LT(fit.rmse_test, 1e-6);
  EXPECT_EQ(fit.num_train, 45);
  EXPECT_EQ(fit.num_test, 15);
  EXPECT_NEAR(predict(fit, x.row(50).transpose()), data[50].target, 1e-6);
}

TEST(Ridge, ShrinkageIncreasesTrainingError) {
  CouplingStore store;
  const Model model(demo_config(DemoTask::O3Invariant, 1), store);
  const auto data = demo_dataset(DemoTask::O3Invariant, 4, 80);
  const FitReport tight = fit_linear(model, data, {}, 1e-10);
  const FitReport loose = fit_linear(model, data, {}, 1e2);
  EXPECT_LT(tight.rmse_train, loose.rmse_train);
  EXPECT_EQ(tight.num_test, 0);
}

TEST(Ridge, RejectsBadArguments) {
  CouplingStore store;
  const Model model(demo_config(DemoTask::LorentzMass, 1), store);
  EXPECT_THROW(fit_linear(model, {}, {}, 0.0), std::invalid_argument);
  const auto data = demo_dataset(DemoTask::LorentzMass, 1, 5);
  EXPECT_THROW(fit_linear(model, data, {}, -1.0), std::invalid_argument);
}

TEST(Demo, DatasetIsSeededAndSized) {
  const auto a = demo_dataset(DemoTask::LorentzMass, 3);
  const auto b = demo_dataset(DemoTask::LorentzMass, 3);
  ASSERT_EQ(a.size(), 200u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].target, b[i].target);
    EXPECT_GE(a[i].cloud.particles.size(), 3u);
    EXPECT_LE(a[i].cloud.particles.size(), 8u);
  }
  EXPECT_NE(demo_dataset(DemoTask::LorentzMass, 4)[0].target, a[0].target);
  // invariant masses of physical momenta are positive
  for (const auto& lc : a) EXPECT_GT(lc.target, 0.0);
}

TEST(Demo, TaskNames) {
  EXPECT_EQ(parse_demo_task("o3-invariant"), DemoTask::O3Invariant);
  EXPECT_EQ(demo_task_name(DemoTask::LorentzMass), "lorentz-mass");
  EXPECT_THROW(parse_demo_task("top-tagging"), std::invalid_argument);
}

TEST(Demo, BothTasksPassAndRepeat) {
  for (DemoTask t : {DemoTask::O3Invariant, DemoTask::LorentzMass}) {
    CouplingStore s1, s2;
    const DemoReport a = run_demo(t, 7, s1);
    const DemoReport b = run_demo(t, 7, s2, 2);
    EXPECT_TRUE(a.pass) << a.text();
    EXPECT_EQ(a.text(), b.text());
  }
}

TEST(Equivariance, VectorFeaturesMoveButResidualStaysSmall) {
  CouplingStore store;
  ModelConfig cfg = demo_config(DemoTask::O3Invariant, 1);
  cfg.outputs = {IrrepLabel::o3(0, 1), IrrepLabel::o3(1, -1)};
  const Model model(cfg, store);
  const auto data = demo_dataset(DemoTask::O3Invariant, 1, 1);
  const GroupSample g = sample_for(model, 1, 1.0);
  EXPECT_LT(equivariance_residual(model, data[0].cloud, g), 1e-12);
  const PointCloud moved = transform_cloud(model.embedding(), data[0].cloud, g);
  const FeatureField f = model.features(data[0].cloud), fg = model.features(moved);
  double diff = 0.0;
  for (std::size_t b = 0; b < f.blocks.size(); ++b)
    if (f.blocks[b].values.size() > 1) diff = std::max(diff, max_abs(f.blocks[b].values - fg.blocks[b].values));
  EXPECT_GT(diff, 1e-3);
}
