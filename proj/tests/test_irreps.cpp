#include <gtest/gtest.h>

#include <set>

#include "equilie/coupling.hpp"
#include "equilie/irreps.hpp"
#include "oracles.hpp"

using namespace equilie;

TEST(Labels, RoundTrip) {
  const std::vector<IrrepLabel> labels{IrrepLabel::su2(3), IrrepLabel::so3(2), IrrepLabel::o3(1, -1),
                                       IrrepLabel::so13(1, 2), IrrepLabel::sun({2, 1, 0}),
                                       IrrepLabel::sun({1, 1, 0, 0})};
  for (const auto& l : labels) EXPECT_EQ(IrrepLabel::parse(l.str()), l) << l.str();
  EXPECT_EQ(IrrepLabel::su2(3).str(), "SU2(3)");
  EXPECT_EQ(IrrepLabel::o3(1, -1).str(), "O3(1,-1)");
  EXPECT_EQ(IrrepLabel::sun({2, 1, 0}).str(), "SU(3)[2,1,0]");
  EXPECT_EQ(IrrepLabel::sun({3, 2, 1}), IrrepLabel::sun({2, 1, 0}));
}

TEST(Labels, ParseRejectsGarbage) {
  for (const char* s : {"", "SU2", "SU2(a)", "SO3(1,2)", "O3(1)", "SU(3)[1,0]", "XY(1)", "SU2(1"})
    EXPECT_THROW(IrrepLabel::parse(s), std::invalid_argument) << s;
}

TEST(Groups, ParseKinds) {
  int n = 0;
  EXPECT_EQ(parse_group_kind("SO13"), GroupKind::SO13);
  EXPECT_EQ(parse_group_kind("SU3", &n), GroupKind::SUN);
  EXPECT_EQ(n, 3);
  EXPECT_EQ(parse_group_kind("SU(4)", &n), GroupKind::SUN);
  EXPECT_EQ(n, 4);
  EXPECT_THROW(parse_group_kind("SO5"), std::invalid_argument);
}

TEST(Irreps, DimensionsMatchMatrices) {
  for (int tj = 0; tj <= 6; ++tj) EXPECT_EQ(su2_irrep(tj).dim(), tj + 1);
  for (int l = 0; l <= 4; ++l) EXPECT_EQ(so3_irrep(l).dim(), 2 * l + 1);
  EXPECT_EQ(so13_irrep(1, 2).dim(), 6);
  EXPECT_EQ(sun_irrep({2, 1, 0}).dim(), 8);
  EXPECT_EQ(sun_irrep({1, 1, 0, 0}).dim(), 6);
  EXPECT_EQ(dimension(IrrepLabel::sun({3, 0, 0})), 10);
}

TEST(Irreps, CasimirOfSpinJ) {
  for (int tj = 0; tj <= 6; ++tj) {
    const Rep r = su2_irrep(tj);
    Matrix c = Matrix::Zero(r.dim(), r.dim());
    for (const Matrix& x : r.infinitesimal()) c += x * x;
    const double j = tj / 2.0;
    EXPECT_LT(max_abs(c + j * (j + 1) * Matrix::Identity(r.dim(), r.dim())), 1e-12) << tj;
  }
}

TEST(Irreps, CondonShortleyRaisingOperator) {
  // J+ = J_x + i J_y has non-negative entries sqrt(j(j+1) - m(m+1)) above the diagonal
  const auto j = angular_momentum(3);
  const Matrix jp = j[0] + Complex(0, 1) * j[1];
  for (int r = 0; r < 3; ++r) {
    const double jj = 1.5, m = jj - r - 1;
    EXPECT_NEAR(jp(r, r + 1).real(), std::sqrt(jj * (jj + 1) - m * (m + 1)), 1e-14);
    EXPECT_NEAR(jp(r, r + 1).imag(), 0.0, 1e-14);
  }
}

TEST(Irreps, InvalidArgumentsThrow) {
  EXPECT_THROW(su2_irrep(-1), std::invalid_argument);
  EXPECT_THROW(o3_irrep(1, 0), std::invalid_argument);
  EXPECT_THROW(sun_irrep({0, 1, 0}), std::invalid_argument);
  EXPECT_EQ(sun_irrep({2, 1, 1}).dim(), 3);  // shifted to [1,0,0]
  EXPECT_THROW(check_sun_weight(std::vector<int>{1}), std::invalid_argument);
}

TEST(Irreps, CartesianRepsEquivalentToSpherical) {
  EXPECT_TRUE(equivalent_by_character(so3_cartesian_rep(), so3_irrep(1)));
  EXPECT_TRUE(equivalent_by_character(o3_cartesian_rep(), o3_irrep(1, -1)));
  EXPECT_FALSE(equivalent_by_character(o3_cartesian_rep(), o3_irrep(1, 1)));
  EXPECT_TRUE(equivalent_by_character(so13_vector_rep(), so13_irrep(1, 1)));
}

TEST(Irreps, LorentzVectorPreservesMetric) {
  const Rep v = so13_vector_rep();
  Matrix eta = Matrix::Identity(4, 4);
  eta(1, 1) = eta(2, 2) = eta(3, 3) = -1.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Matrix l = group_action(v, sample_group_parameters(6, 0, s, 1.5));
    EXPECT_LT(max_abs(l.transpose() * eta * l - eta), 1e-12);
    EXPECT_LT(max_abs(l.imag()), 1e-14);
  }
}

TEST(GelfandTsetlin, PatternsAreDistinctAndSatisfyBetweenness) {
  const std::vector<int> w{3, 1, 0};
  const auto patterns = enumerate_gt_patterns(w);
  EXPECT_EQ(static_cast<long long>(patterns.size()), oracle::gt_count_bruteforce(w));
  EXPECT_TRUE(std::is_sorted(patterns.begin(), patterns.end()));
  std::set<GTPattern> unique(patterns.begin(), patterns.end());
  EXPECT_EQ(unique.size(), patterns.size());
}

TEST(GelfandTsetlin, WeylDimensionMatchesBruteForce) {
  for (const std::vector<int>& w : std::vector<std::vector<int>>{
           {0, 0}, {3, 0}, {2, 1, 0}, {4, 2, 0}, {1, 0, 0, 0}, {2, 1, 1, 0}, {2, 2, 1, 0}, {1, 1, 0, 0, 0}})
    EXPECT_EQ(weyl_dimension(w), oracle::gt_count_bruteforce(w));
}

TEST(Candidates, AllWithinDimension) {
  for (GroupKind g : {GroupKind::SU2, GroupKind::SO3, GroupKind::O3, GroupKind::SO13}) {
    const auto c = candidate_labels(g, 9);
    EXPECT_FALSE(c.empty());
    for (const auto& l : c) EXPECT_LE(dimension(l), 9);
  }
  const auto su3 = candidate_labels(GroupKind::SUN, 10, 3);
  EXPECT_NE(std::find(su3.begin(), su3.end(), IrrepLabel::sun({3, 0, 0})), su3.end());
  const auto o3 = candidate_labels(GroupKind::O3, 3);
  EXPECT_NE(std::find(o3.begin(), o3.end(), IrrepLabel::o3(1, 1)), o3.end());
  EXPECT_NE(std::find(o3.begin(), o3.end(), IrrepLabel::o3(0, -1)), o3.end());
}
