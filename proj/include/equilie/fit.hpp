#pragma once

// Linear models on invariant features, equivariance diagnostics, and the
// synthetic desk-scale demonstrations.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "equilie/cluster.hpp"

namespace equilie {

struct LabeledCloud {
  PointCloud cloud;
  double target = 0.0;
};

struct FitReport {
  RealVector weights;  // one per invariant feature column
  double intercept = 0.0;
  double lambda = 0.0;
  double rmse_train = 0.0;
  double rmse_test = 0.0;  // 0 when no held-out split was given
  int num_train = 0;
  int num_test = 0;
  int num_features = 0;
  nlohmann::json to_json() const;
};

// Ridge regression y ≈ X w + b over invariant features, solved through the
// SVD of the column-standardized design with filter factors σ/(σ² + λ).
FitReport fit_linear(const Model& model, std::span<const LabeledCloud> train, std::span<const LabeledCloud> test,
                     double lambda, int threads = 1);

// Invariant-feature design matrix, one row per cloud.
RealMatrix design_matrix(const Model& model, std::span<const LabeledCloud> data, int threads = 1);

double predict(const FitReport& fit, const RealVector& features);

// Largest relative deviation of F(g·X) from ρ_K(g) F(X) over every feature
// block and every per-particle state. Deviations are scaled by the largest
// magnitude within the same family (correlation order or layer).
double equivariance_residual(const Model& model, const PointCloud& cloud, const GroupSample& sample);

GroupSample sample_for(const Model& model, std::uint64_t seed, double scale);

enum class DemoTask { O3Invariant, LorentzMass };

DemoTask parse_demo_task(const std::string& name);
std::string demo_task_name(DemoTask task);

ModelConfig demo_config(DemoTask task, std::uint64_t seed);
std::vector<LabeledCloud> demo_dataset(DemoTask task, std::uint64_t seed, int count = 200);

struct DemoReport {
  DemoTask task = DemoTask::O3Invariant;
  std::uint64_t seed = 0;
  FitReport fit;
  double equivariance_max = 0.0;
  int equivariance_checks = 0;
  double rmse_threshold = 0.0;
  double equivariance_threshold = 1e-8;
  bool pass = false;
  std::string text() const;
};

DemoReport run_demo(DemoTask task, std::uint64_t seed, CouplingStore& store, int threads = 1);

}  // namespace equilie
