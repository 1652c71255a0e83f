#pragma once

// G-equivariant cluster expansion: pooled atomic basis, channel mixing,
// product basis over ordered tuples, symmetrized basis, and multi-layer
// message passing with linear readouts.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "equilie/embedding.hpp"
#include "equilie/serialize.hpp"

namespace equilie {

// A_{ck} = Σ_x φ_{ck}(x), accumulated in lexicographic order of the raw attributes.
Matrix pool_atomic_basis(const Embedding& embedding, const PointCloud& cloud);

// Ã = w A.
Matrix mix_channels(const Matrix& a, const Matrix& w);

// Per channel, Π_t Ã_{c,k_t} over non-decreasing tuples (channels × #tuples).
Matrix product_basis(const Matrix& a_tilde, int order);

// B^α_{c} = C^α · (product row c); result[α] is channels × dim(K).
std::vector<Matrix> symmetrize_basis(const Matrix& products, const CouplingTensor& coupling);

struct FeatureBlock {
  std::string family;  // "nu=2" for TRACE features, "layer=1" for summed MACE states
  std::string irrep;   // output irrep label
  int channel = 0;
  int alpha = 0;
  Vector values;
};

struct FeatureField {
  std::vector<FeatureBlock> blocks;
  nlohmann::json to_json() const;
};

struct ModelConfig {
  GroupKind group = GroupKind::SO3;
  int group_n = 0;
  EmbeddingConfig embedding;
  int channels = 4;
  bool random_mix = true;
  int correlation_order = 2;
  std::vector<IrrepLabel> outputs;  // TRACE output irreps; default: trivial
  int layers = 0;                   // MACE layers; 0 = TRACE features only
  std::vector<IrrepLabel> hidden;   // MACE state irreps; default: trivial
  int hidden_channels = 4;
  bool residual = false;
  std::uint64_t seed = 0;
  double ridge_lambda = 1e-10;
  std::vector<std::string> coupling_tables;

  static ModelConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string group_name() const;
};

// Per-particle MACE states: states[t][i] is hidden_channels × dim(H_t).
struct MaceStates {
  std::vector<std::vector<Matrix>> states;
};

class Model {
 public:
  // Resolves every coupling table through the store; evaluation is then read-only.
  Model(const ModelConfig& config, CouplingStore& store);

  const ModelConfig& config() const noexcept { return config_; }
  const Embedding& embedding() const noexcept { return embedding_; }

  // Per-cloud TRACE features through all correlation orders and output irreps.
  FeatureField trace_features(const PointCloud& cloud) const;

  // h^0 ... h^T for every particle (empty when no layers are configured).
  MaceStates mace_states(const PointCloud& cloud) const;

  // Layer state irreps: H_0 is trivial, H_t (t >= 1) the configured hidden irreps.
  const std::vector<IrrepLabel>& state_labels(int t) const { return t == 0 ? h0_labels_ : config_.hidden; }
  const Rep& state_rep(int t) const { return t == 0 ? h0_rep_ : hidden_rep_; }

  // TRACE features plus Σ_i h_i^t for t >= 1 (all permutation invariant).
  FeatureField features(const PointCloud& cloud) const;

  // Real design vector: Re/Im of every invariant block (trivial irreps only).
  RealVector invariant_features(const PointCloud& cloud) const;
  int num_invariant_features() const noexcept { return num_invariant_; }

  // Σ_t Σ_c weights[t-1](c) h_i^t[c, trivial] per particle; throws ConfigurationError
  // when the hidden irreps carry no trivial slot.
  std::vector<Complex> local_readout(const MaceStates& states, const std::vector<Vector>& weights) const;
  Complex global_readout(const MaceStates& states, const std::vector<Vector>& weights) const;

 private:
  struct SymmetricTerm {
    int order;
    IrrepLabel output;
    CouplingTensor coupling;
  };
  struct Layer {
    Matrix embed_mix;                  // hidden_channels × embedding channels
    std::vector<CouplingTensor> pair;  // H_t ⊗ V -> each one-particle irrep
    std::vector<Matrix> pair_weights;  // hidden_channels × multiplicity
    Matrix mix;                        // hidden_channels × hidden_channels
    std::vector<SymmetricTerm> terms;  // Sym^ν(U_t) -> each hidden irrep
    std::vector<Matrix> message_weights;  // per hidden irrep: hidden_channels × (Σ_ν multiplicity)
    std::vector<Matrix> update;           // per hidden irrep: hidden_channels × hidden_channels
  };

  std::vector<Matrix> layer_step(int t, const std::vector<Matrix>& h, const std::vector<Matrix>& phi,
                                 const std::vector<std::size_t>& order) const;

  ModelConfig config_;
  Embedding embedding_;
  Matrix mix_;  // channels × embedding channels
  std::vector<SymmetricTerm> trace_terms_;
  std::vector<IrrepLabel> h0_labels_;
  Rep h0_rep_;
  Rep hidden_rep_;
  std::vector<int> hidden_offset_;
  Matrix h0_weights_;  // hidden_channels × num_species
  std::vector<Layer> layers_;
  int num_invariant_ = 0;
};

// Indices of particles sorted lexicographically by raw attributes.
std::vector<std::size_t> canonical_order(const PointCloud& cloud);

// Runs body(i) for i in [0, n) on up to `threads` workers; each index runs exactly once.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

// Applies a group sample to every particle's raw attributes.
PointCloud transform_cloud(const Embedding& embedding, const PointCloud& cloud, const GroupSample& sample);

PointCloud cloud_from_json(const nlohmann::json& j);
nlohmann::json cloud_to_json(const PointCloud& cloud);
// JSON document or whitespace-separated text, one particle per line.
PointCloud parse_cloud(const std::string& text);

}  // namespace equilie
