#pragma once

// Built-in irreducible representations.
//
// Generator convention: every built-in rep stores dρ(X) = -i·J for the
// Hermitian "physics" generators J, so real algebra coefficients give
// unitary elements of compact groups and real Lorentz transformations for
// the four-vector rep.
//
//   su(2):    X_a = -i J_a,   [X_a, X_b] = ε_abc X_c.  Basis |j, m⟩ with
//             m = j, j-1, ..., -j (Condon-Shortley phases).
//   so(1,3):  (L_1, L_2, L_3, M_1, M_2, M_3) with [L,L] = εL, [L,M] = εM,
//             [M,M] = -εL; L rotations, M boosts.
//   su(N):    for each pair i < j: -i/2 (E_ij + E_ji), -1/2 (E_ij - E_ji);
//             then -i/2 (E_kk - E_k+1,k+1). For N = 2 this is the su(2) basis.

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "equilie/algebra.hpp"

namespace equilie {

enum class GroupKind { SU2, SO3, O3, SO13, SUN };

struct IrrepLabel {
  GroupKind group = GroupKind::SU2;
  int n = 0;                // N for SU(N); 0 otherwise
  std::vector<int> weight;  // SU2: (2j); SO3: (l); O3: (l, p); SO13: (2j1, 2j2); SUN: λ, last entry 0

  static IrrepLabel su2(int two_j);
  static IrrepLabel so3(int l);
  static IrrepLabel o3(int l, int parity);
  static IrrepLabel so13(int two_j1, int two_j2);
  // Subtracts the last entry so that λ_N = 0.
  static IrrepLabel sun(std::vector<int> weight);

  // "SU2(2j)", "SO3(l)", "O3(l,p)", "SO13(2j1,2j2)", "SU(N)[λ1,...,λN]".
  std::string str() const;
  static IrrepLabel parse(std::string_view text);

  auto operator<=>(const IrrepLabel&) const = default;
};

int dimension(const IrrepLabel& label);
Rep irrep(const IrrepLabel& label);

AlgebraPtr su2_algebra();
AlgebraPtr so13_algebra();
AlgebraPtr sun_algebra(int n);

// Hermitian J_x, J_y, J_z in the |j, m⟩ basis.
std::vector<Matrix> angular_momentum(int two_j);

Rep su2_irrep(int two_j);
Rep so3_irrep(int l);
Rep o3_irrep(int l, int parity);
Rep so13_irrep(int two_j1, int two_j2);
Rep sun_irrep(std::vector<int> weight);

// Real 3×3 rotation generators (L_a)_bc = -ε_abc; the O(3) variant adds -I.
Rep so3_cartesian_rep();
Rep o3_cartesian_rep();
// Defining four-vector rep of SO+(1,3) on (E, p_x, p_y, p_z).
Rep so13_vector_rep();

struct GTPattern {
  std::vector<std::vector<int>> rows;  // rows[0] is the highest weight, row r has N - r entries
  auto operator<=>(const GTPattern&) const = default;
};

// Weakly decreasing, non-negative, last entry 0; throws std::invalid_argument otherwise.
void check_sun_weight(std::span<const int> weight);

// All patterns satisfying betweenness, lexicographic on the flattened rows.
std::vector<GTPattern> enumerate_gt_patterns(std::span<const int> weight);

long long weyl_dimension(std::span<const int> weight);

// All labels of a family with dimension <= max_dim (SU(N) needs n).
std::vector<IrrepLabel> candidate_labels(GroupKind group, int max_dim, int n = 0);

GroupKind parse_group_kind(std::string_view text, int* n = nullptr);

}  // namespace equilie
