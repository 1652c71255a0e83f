#pragma once

// One-particle embeddings φ_{ck}(x): raw particle attributes -> per-channel
// vectors in a (generally reducible) representation V = ⊕ slots.

#include <string>
#include <vector>

#include <json.hpp>

#include "equilie/coupling.hpp"

namespace equilie {

struct Particle {
  std::vector<double> raw;
};

struct PointCloud {
  std::vector<Particle> particles;
};

enum class EmbeddingKind { RepCoordinates, RadialHarmonic };
enum class RadialKind { Gaussian, Polynomial };

struct EmbeddingConfig {
  EmbeddingKind kind = EmbeddingKind::RepCoordinates;
  int num_species = 1;
  // RadialHarmonic (SO3 / O3)
  int l_max = 1;
  RadialKind radial = RadialKind::Gaussian;
  int n_max = 4;
  double r_cut = 3.0;
  // RepCoordinates
  std::string base;  // irrep label, or "SO13(vector)", "SO3(vector)", "O3(vector)"
  bool complex_input = false;
  bool conjugate = false;
  int tensor_power = 1;

  static EmbeddingConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct Slot {
  std::string label;
  std::optional<IrrepLabel> irrep;  // set when the slot is a built-in irrep
  Rep rep;
  int offset = 0;
  int dim = 0;
};

class Embedding {
 public:
  Embedding(GroupKind group, int group_n, const EmbeddingConfig& config);

  GroupKind group() const noexcept { return group_; }
  int group_n() const noexcept { return group_n_; }
  const EmbeddingConfig& config() const noexcept { return config_; }
  const std::vector<Slot>& slots() const noexcept { return slots_; }
  const Rep& rep() const noexcept { return rep_; }  // V = ⊕ slot reps
  const std::string& label() const noexcept { return label_; }
  int dim() const noexcept { return rep_.dim(); }
  int channels() const noexcept { return channels_; }
  int raw_arity() const noexcept;

  // Species index of a particle (0 when there is a single species).
  int species(const Particle& p) const;

  // channels() × dim() block φ_{ck}(x).
  Matrix embed(const Particle& p) const;

  // Raw attributes of g·x for a sampled group element (species untouched).
  std::vector<double> act_on_raw(const std::vector<double>& raw, const GroupSample& sample) const;

  // Representation acting on the raw coordinates (Cartesian, vector or base rep).
  const Rep& raw_rep() const noexcept { return raw_rep_; }

 private:
  Matrix embed_radial(const Particle& p) const;
  Matrix embed_coordinates(const Particle& p) const;
  Vector coordinates(const Particle& p) const;

  GroupKind group_;
  int group_n_;
  EmbeddingConfig config_;
  std::vector<Slot> slots_;
  Rep rep_;
  Rep raw_rep_;
  std::string label_;
  int channels_ = 1;
  std::vector<Matrix> power_rows_;  // per tensor power q >= 2: rows of the decomposing change of basis
};

// Trivial irrep label of a group.
IrrepLabel trivial_label(GroupKind group, int n);

// Irrep labels of a group whose dimension is at most max_dim.
std::vector<IrrepLabel> labels_up_to(GroupKind group, int n, int max_dim);

// Values of conj(Y_l^m(r̂)) · sqrt(4π) for m = l, ..., -l.
Vector spherical_harmonics_conj(int l, double x, double y, double z);

double radial_basis(RadialKind kind, int n, int n_max, double r_cut, double r);

}  // namespace equilie
