#pragma once

// Generalized Clebsch-Gordan coefficients by the numerical null-space method.
//
// A coupling tensor C^{α,K}_k is stored per solution α as a dim(K) × #tuples
// matrix. For a plain coupling the columns run over all index tuples
// (k1, ..., kn) in Kronecker order (k1 slowest); for a symmetric coupling
// they run over non-decreasing tuples only, and C maps the ordered
// coordinates a_k of a symmetric tensor to the output irrep.
//
// Solutions are canonical: the solution space is brought to reduced row
// echelon form over unknowns ordered by (K, tuple), orthonormalized in that
// order, and each solution is rotated so that its first non-negligible
// coefficient is real and positive.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "equilie/algebra.hpp"
#include "equilie/irreps.hpp"

namespace equilie {

using Tuple = std::vector<int>;

struct CouplingTensor {
  std::vector<RepPtr> inputs;  // n entries; a symmetric coupling repeats the same rep n times
  RepPtr output;
  std::vector<std::string> input_labels;
  std::string output_label;
  int order = 0;
  bool symmetric = false;
  std::vector<Tuple> tuples;      // column index -> index tuple
  std::vector<Matrix> solutions;  // each dim(output) × tuples.size()

  int multiplicity() const noexcept { return static_cast<int>(solutions.size()); }

  struct Entry {
    Tuple k;
    int out = 0;
    int alpha = 0;
    Complex value;
  };
  // Non-zero entries sorted lexicographically by (k1, ..., kn, K, alpha).
  std::vector<Entry> entries() const;
};

// Plain intertwiners V1 ⊗ ... ⊗ Vn -> out.
CouplingTensor intertwiners(std::span<const Rep> inputs, const Rep& output);

CouplingTensor clebsch_gordan(const Rep& rep1, const Rep& rep2, const Rep& rep_out);

struct SelectionRule {
  std::vector<std::pair<IrrepLabel, int>> terms;  // zero multiplicities omitted
  int total_dimension() const;
};

SelectionRule selection_rule(const Rep& rep1, const Rep& rep2, std::span<const IrrepLabel> candidates);

// All non-decreasing tuples of length n over {0, ..., dim-1}, lexicographic.
std::vector<Tuple> ordered_tuples(int dim, int n);

// Number of distinct permutations of a tuple.
long long orbit_size(const Tuple& t);

// Binomial(dim + n - 1, n), the dimension of Sym^n of a dim-dimensional space.
long long symmetric_power_dim(int dim, int n);

// Action of the group element g on ordered coordinates of Sym^n:
// ρ̄_{k,k'} = Σ over distinct permutations k'' of k' of Π_t g_{k_t, k''_t}.
Matrix symmetric_power_action(const Matrix& g, int n);

// Derivative of symmetric_power_action at the identity in direction x.
Matrix symmetric_power_generator(const Matrix& x, int n);

struct SymmetricCouplingOptions {
  long long cap = 20000;  // maximum dim Sym^n(V)
  // Irreps used to decompose intermediate symmetric powers in the recursive
  // construction. Empty: solve directly on the symmetric subspace.
  std::vector<IrrepLabel> intermediate_candidates;
  std::string input_label;
  std::string output_label;
};

enum class CouplingMethod { Direct, Tree };

// Intertwiners Sym^n(V) -> out in ordered coordinates.
CouplingTensor symmetric_coupling(const Rep& rep, int order, const Rep& rep_out,
                                  const SymmetricCouplingOptions& options = {},
                                  CouplingMethod* method_used = nullptr);

// Full-tensor form B^α_{K; k1...kn} = C^α_{K; sort(k)} / orbit(sort(k)).
std::vector<Matrix> expand_symmetric(const CouplingTensor& coupling);

// max_α ‖C^α ρ_in(g) − ρ_out(g) C^α‖_max for one group sample.
double intertwiner_residual(const CouplingTensor& coupling, const GroupSample& sample);

struct Decomposition {
  struct Block {
    IrrepLabel label;
    int alpha = 0;
    int offset = 0;
    int dim = 0;
  };
  Matrix change_of_basis;  // Q with Q dρ Q^{-1} block diagonal
  std::vector<Block> blocks;
  std::vector<std::pair<IrrepLabel, int>> multiplicities;
  double condition_number = 0.0;
};

// Throws DecompositionIncompleteError when the candidates miss part of the rep.
Decomposition decompose_rep(const Rep& rep, std::span<const IrrepLabel> candidates);

// Largest deviation of Q dρ(X) Q^{-1} (and discrete) from the candidate blocks.
double block_residual(const Rep& rep, const Decomposition& decomposition);

// Reps compared through characters tr ρ(g) on count sampled elements.
bool equivalent_by_character(const Rep& a, const Rep& b, int count = 20, std::uint64_t seed = 1, double tol = 1e-8);

}  // namespace equilie
