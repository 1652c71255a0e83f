#include "equilie/fit.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>

#include <Eigen/SVD>

namespace equilie {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double rmse(const RealMatrix& x, const RealVector& y, const FitReport& fit) {
  if (y.size() == 0) return 0.0;
  const RealVector pred = (x * fit.weights).array() + fit.intercept;
  return std::sqrt((pred - y).squaredNorm() / static_cast<double>(y.size()));
}

RealVector targets(std::span<const LabeledCloud> data) {
  RealVector y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) y(static_cast<Eigen::Index>(i)) = data[i].target;
  return y;
}

}  // namespace

nlohmann::json FitReport::to_json() const {
  std::vector<double> w(weights.data(), weights.data() + weights.size());
  return {{"weights", w},           {"intercept", intercept},   {"lambda", lambda},
          {"rmse_train", rmse_train}, {"rmse_test", rmse_test}, {"num_train", num_train},
          {"num_test", num_test},   {"num_features", num_features}};
}

RealMatrix design_matrix(const Model& model, std::span<const LabeledCloud> data, int threads) {
  RealMatrix x(static_cast<Eigen::Index>(data.size()), model.num_invariant_features());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    x.row(static_cast<Eigen::Index>(i)) = model.invariant_features(data[i].cloud).transpose();
  });
  return x;
}

FitReport fit_linear(const Model& model, std::span<const LabeledCloud> train, std::span<const LabeledCloud> test,
                     double lambda, int threads) {
  if (train.empty()) throw std::invalid_argument("fit_linear: empty training set");
  if (!(lambda >= 0.0)) throw std::invalid_argument("fit_linear: lambda must be non-negative");
  const RealMatrix x = design_matrix(model, train, threads);
  const RealVector y = targets(train);
  const Eigen::Index n = x.rows(), p = x.cols();

  // standardize columns; the intercept column is the constant 1
  RealVector scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double rms = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n));
    scale(j) = rms > 0.0 ? rms : 1.0;
  }
  RealMatrix z(n, p + 1);
  for (Eigen::Index j = 0; j < p; ++j) z.col(j) = x.col(j) / scale(j);
  z.col(p).setOnes();

  Eigen::BDCSVD<RealMatrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  RealVector filt(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double denom = s(i) * s(i) + lambda;
    filt(i) = denom > 0.0 ? s(i) / denom : 0.0;
  }
  const RealVector coef = svd.matrixV() * filt.asDiagonal() * (svd.matrixU().transpose() * y);

  FitReport fit;
  fit.lambda = lambda;
  fit.weights = coef.head(p).cwiseQuotient(scale);
  fit.intercept = coef(p);
  fit.num_train = static_cast<int>(n);
  fit.num_features = static_cast<int>(p);
  fit.rmse_train = rmse(x, y, fit);
  if (!test.empty()) {
    fit.num_test = static_cast<int>(test.size());
    fit.rmse_test = rmse(design_matrix(model, test, threads), targets(test), fit);
  }
  return fit;
}

double predict(const FitReport& fit, const RealVector& features) { return fit.weights.dot(features) + fit.intercept; }

GroupSample sample_for(const Model& model, std::uint64_t seed, double scale) {
  const Rep& raw = model.embedding().raw_rep();
  return sample_group_parameters(raw.algebra()->num_generators(), raw.num_discrete(), seed, scale);
}

double equivariance_residual(const Model& model, const PointCloud& cloud, const GroupSample& sample) {
  const PointCloud moved = transform_cloud(model.embedding(), cloud, sample);
  std::map<std::string, Matrix> actions;
  auto action = [&](const std::string& label) -> const Matrix& {
    auto it = actions.find(label);
    if (it == actions.end()) it = actions.emplace(label, group_action(irrep(IrrepLabel::parse(label)), sample)).first;
    return it->second;
  };

  const FeatureField f = model.features(cloud);
  const FeatureField fg = model.features(moved);
  std::map<std::string, double> scale, worst;
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    const std::string& fam = f.blocks[b].family;
    const Vector expected = action(f.blocks[b].irrep) * f.blocks[b].values;
    const double mag = std::max(f.blocks[b].values.cwiseAbs().maxCoeff(), fg.blocks[b].values.cwiseAbs().maxCoeff());
    scale[fam] = std::max(scale[fam], mag);
    worst[fam] = std::max(worst[fam], (fg.blocks[b].values - expected).cwiseAbs().maxCoeff());
  }

  const MaceStates st = model.mace_states(cloud);
  const MaceStates stg = model.mace_states(moved);
  for (std::size_t t = 1; t < st.states.size(); ++t) {
    const std::string fam = "state=" + std::to_string(t);
    const Matrix g = group_action(model.state_rep(static_cast<int>(t)), sample);
    for (std::size_t i = 0; i < st.states[t].size(); ++i) {
      const Matrix expected = st.states[t][i] * g.transpose();
      scale[fam] = std::max({scale[fam], max_abs(st.states[t][i]), max_abs(stg.states[t][i])});
      worst[fam] = std::max(worst[fam], max_abs(stg.states[t][i] - expected));
    }
  }

  double result = 0.0;
  for (const auto& [fam, w] : worst) {
    const double s = scale[fam];
    result = std::max(result, s > 0.0 ? w / s : w);
  }
  return result;
}

DemoTask parse_demo_task(const std::string& name) {
  if (name == "o3-invariant") return DemoTask::O3Invariant;
  if (name == "lorentz-mass") return DemoTask::LorentzMass;
  throw std::invalid_argument("unknown demo task '" + name + "' (expected o3-invariant or lorentz-mass)");
}

std::string demo_task_name(DemoTask task) {
  return task == DemoTask::O3Invariant ? "o3-invariant" : "lorentz-mass";
}

ModelConfig demo_config(DemoTask task, std::uint64_t seed) {
  ModelConfig c;
  c.seed = seed;
  c.correlation_order = 2;
  if (task == DemoTask::O3Invariant) {
    // r^n Y_l^m with n <= 2, l <= 1 contains Σ|r|^2 at order 1 and |Σr|^2 at order 2
    c.group = GroupKind::O3;
    c.embedding.kind = EmbeddingKind::RadialHarmonic;
    c.embedding.l_max = 1;
    c.embedding.radial = RadialKind::Polynomial;
    c.embedding.n_max = 3;
    c.channels = 10;
  } else {
    c.group = GroupKind::SO13;
    c.embedding.kind = EmbeddingKind::RepCoordinates;
    c.embedding.base = "SO13(vector)";
    c.channels = 2;
  }
  return c;
}

std::vector<LabeledCloud> demo_dataset(DemoTask task, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(3, 8);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> mass(0.1, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<LabeledCloud> out;
  for (int s = 0; s < count; ++s) {
    LabeledCloud lc;
    const int n = size(rng);
    if (task == DemoTask::O3Invariant) {
      double sq = 0.0, sx = 0.0, sy = 0.0, sz = 0.0;
      for (int i = 0; i < n; ++i) {
        const double x = uni(rng), y = uni(rng), z = uni(rng);
        lc.cloud.particles.push_back({{x, y, z}});
        sq += x * x + y * y + z * z;
        sx += x;
        sy += y;
        sz += z;
      }
      lc.target = sq + 0.5 * (sx * sx + sy * sy + sz * sz);
    } else {
      double e = 0.0, px = 0.0, py = 0.0, pz = 0.0;
      for (int i = 0; i < n; ++i) {
        const double x = normal(rng), y = normal(rng), z = normal(rng), m = mass(rng);
        const double en = std::sqrt(m * m + x * x + y * y + z * z);
        lc.cloud.particles.push_back({{en, x, y, z}});
        e += en;
        px += x;
        py += y;
        pz += z;
      }
      lc.target = e * e - px * px - py * py - pz * pz;
    }
    out.push_back(std::move(lc));
  }
  return out;
}

std::string DemoReport::text() const {
  std::string s;
  s += "task " + demo_task_name(task) + "\n";
  s += "seed " + std::to_string(seed) + "\n";
  s += "train " + std::to_string(fit.num_train) + " test " + std::to_string(fit.num_test) + " features " +
       std::to_string(fit.num_features) + "\n";
  s += "rmse_train " + fmt17(fit.rmse_train) + "\n";
  s += "rmse_test " + fmt17(fit.rmse_test) + " (threshold " + fmt17(rmse_threshold) + ")\n";
  s += "equivariance_max_relative " + fmt17(equivariance_max) + " over " + std::to_string(equivariance_checks) +
       " clouds (threshold " + fmt17(equivariance_threshold) + ")\n";
  s += std::string("result ") + (pass ? "PASS" : "FAIL") + "\n";
  return s;
}

DemoReport run_demo(DemoTask task, std::uint64_t seed, CouplingStore& store, int threads) {
  const ModelConfig config = demo_config(task, seed);
  const Model model(config, store);
  const std::vector<LabeledCloud> data = demo_dataset(task, seed, 200);
  const std::span<const LabeledCloud> all(data);

  DemoReport r;
  r.task = task;
  r.seed = seed;
  r.fit = fit_linear(model, all.subspan(0, 150), all.subspan(150), config.ridge_lambda, threads);
  r.rmse_threshold = task == DemoTask::O3Invariant ? 1e-6 : 1e-5;

  const double scale = task == DemoTask::O3Invariant ? 3.0 : 1.0;
  constexpr int kChecks = 20;
  std::vector<double> res(kChecks, 0.0);
  parallel_for(kChecks, threads, [&](std::size_t i) {
    res[i] = equivariance_residual(model, data[i].cloud, sample_for(model, seed * 1000003ULL + i, scale));
  });
  for (double v : res) r.equivariance_max = std::max(r.equivariance_max, v);
  r.equivariance_checks = kChecks;
  if (!std::isfinite(r.fit.rmse_test) || !std::isfinite(r.equivariance_max))
    throw std::runtime_error("demo produced non-finite diagnostics");
  r.pass = r.fit.rmse_test < r.rmse_threshold && r.equivariance_max < r.equivariance_threshold;
  return r;
}

}  // namespace equilie
