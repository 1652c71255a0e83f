#pragma once

// Lie algebras given by structure constants, and finite-dimensional
// representations given by generator matrices.
//
// A representation is the tuple (algebra, dim, infinitesimal generators,
// discrete generators). Infinitesimal generators are the images dρ(X_i) of a
// fixed basis of the real Lie algebra, so that exp(Σ a_i dρ(X_i)) with real
// a_i is a group element. Discrete generators are one representative per
// non-identity connected component; an empty list means a connected group.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "equilie/types.hpp"

namespace equilie {

class LieAlgebra {
 public:
  // constants are laid out densely as A[(i * n + j) * n + k].
  LieAlgebra(std::string name, int num_generators, std::vector<Complex> constants);

  // Solves [G_i, G_j] = Σ_k A_ijk G_k for a linearly independent generator set.
  static LieAlgebra from_generators(std::string name, std::span<const Matrix> generators);

  // Block-diagonal structure constants of g1 ⊕ g2.
  static LieAlgebra direct_sum(const LieAlgebra& a, const LieAlgebra& b);

  const std::string& name() const noexcept { return name_; }
  int num_generators() const noexcept { return n_; }
  Complex constant(int i, int j, int k) const { return constants_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k]; }
  const std::vector<Complex>& structure_constants() const noexcept { return constants_; }

  double antisymmetry_residual() const;
  double jacobi_residual() const;
  bool has_real_constants(double tol = 1e-14) const;

  // Same dimension and structure constants within tol; the name is ignored.
  bool same_structure(const LieAlgebra& other, double tol = 1e-12) const;

 private:
  std::string name_;
  int n_;
  std::vector<Complex> constants_;
};

using AlgebraPtr = std::shared_ptr<const LieAlgebra>;

bool same_algebra(const AlgebraPtr& a, const AlgebraPtr& b);

class Rep {
 public:
  // Throws std::invalid_argument on generator-count mismatch, non-square or
  // inconsistently sized matrices, or non-finite entries.
  Rep(AlgebraPtr algebra, std::vector<Matrix> infinitesimal, std::vector<Matrix> discrete = {});

  const AlgebraPtr& algebra() const noexcept { return algebra_; }
  int dim() const noexcept { return dim_; }
  const std::vector<Matrix>& infinitesimal() const noexcept { return infinitesimal_; }
  const std::vector<Matrix>& discrete() const noexcept { return discrete_; }
  int num_discrete() const noexcept { return static_cast<int>(discrete_.size()); }

  // ρ(h) for discrete generator index h; identity when h is out of range
  // (reps built without a discrete part act trivially on the other components).
  Matrix discrete_or_identity(int h) const;

 private:
  AlgebraPtr algebra_;
  int dim_;
  std::vector<Matrix> infinitesimal_;
  std::vector<Matrix> discrete_;
};

using RepPtr = std::shared_ptr<const Rep>;

struct ValidationReport {
  bool pass = false;
  double max_residual = 0.0;
  int worst_i = -1;
  int worst_j = -1;
  double min_abs_det = 0.0;  // smallest |det ρ(h)| over discrete generators (1 if none)
  double tolerance = 1e-9;
};

// Commutator closure [dρ(X_i), dρ(X_j)] = Σ_k A_ijk dρ(X_k) in the max norm,
// plus invertibility of the discrete matrices.
ValidationReport validate_rep(const Rep& rep, double tol = 1e-9);

// Algebra coefficients and discrete index (-1 for the identity component).
struct GroupSample {
  std::vector<double> coefficients;
  int discrete_index = -1;
};

struct GroupElement {
  Matrix matrix;
  GroupSample provenance;
};

Matrix matrix_exponential(const Matrix& x);

// exp(Σ a_i dρ(X_i)) · ρ(h).
Matrix group_action(const Rep& rep, const GroupSample& sample);

// Draws a_i ~ U[-scale, scale] and a discrete index uniformly from
// {none, 0, ..., num_discrete-1}. Deterministic in (num_generators,
// num_discrete, seed, scale).
GroupSample sample_group_parameters(int num_generators, int num_discrete, std::uint64_t seed, double scale);

GroupElement sample_group_element(const Rep& rep, std::uint64_t seed, double scale);

// One-dimensional rep with zero generators and num_discrete unit discrete matrices.
Rep trivial_rep(const AlgebraPtr& algebra, int num_discrete = 0);

bool is_trivial(const Rep& rep, double tol = 1e-14);

Rep tensor_product(const Rep& a, const Rep& b);
Rep direct_sum(const Rep& a, const Rep& b);
Rep direct_sum(std::span<const Rep> reps);

// Complex-conjugate representation; requires real structure constants.
Rep conjugate_rep(const Rep& rep);

// S dρ S^{-1} for an invertible change of basis S.
Rep conjugate_by(const Rep& rep, const Matrix& basis_change);

// Representation of G1 × G2 on V1 ⊗ V2 over the direct-sum algebra.
Rep product_group_rep(const Rep& a, const Rep& b);

// Kronecker product of two complex matrices.
Matrix kron(const Matrix& a, const Matrix& b);

// Kronecker sum a ⊗ 1 + 1 ⊗ b.
Matrix kron_sum(const Matrix& a, const Matrix& b);

}  // namespace equilie
