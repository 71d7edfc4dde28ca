#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace lk {

using Complex = std::complex<double>;

// Matrices are at most 3x3, so Eigen keeps them on the stack.
using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;
using Coords = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using CoordMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

enum class GroupKind { UnitCircle, SU2, SO3 };

/// Element of the Lie algebra: anti-Hermitian (traceless for SU2) or real
/// skew-symmetric (SO3) matrix.
struct AlgebraElement {
  Mat m;

  AlgebraElement& operator+=(const AlgebraElement& o) { m += o.m; return *this; }
  AlgebraElement& operator-=(const AlgebraElement& o) { m -= o.m; return *this; }
  AlgebraElement& operator*=(double s) { m *= s; return *this; }
};

inline AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
inline AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
inline AlgebraElement operator-(AlgebraElement a) { a.m = -a.m; return a; }
inline AlgebraElement operator*(double s, AlgebraElement a) { return a *= s; }
inline AlgebraElement operator*(AlgebraElement a, double s) { return a *= s; }

/// Unitary (U1, SU2) or real orthogonal (SO3) matrix.
struct GroupElement {
  Mat m;

  GroupElement inverse() const { return {m.adjoint()}; }
};

inline GroupElement operator*(const GroupElement& a, const GroupElement& b) { return {a.m * b.m}; }

/// A compact connected matrix group with a fixed Ad-invariant inner product:
///   U(1):  <X,Y> = -Re tr(XY)
///   SU(2): <X,Y> = -Re tr(XY)
///   SO(3): <X,Y> = -1/2 tr(XY)
/// Coordinates are taken in a basis that is orthonormal for that product.
class LieGroup {
 public:
  explicit LieGroup(GroupKind kind);

  /// Accepts "u1", "su2", "so3" (case-insensitive); throws ParseError otherwise.
  static LieGroup from_name(std::string_view name);

  GroupKind kind() const { return kind_; }
  std::string_view name() const;
  int matrix_dim() const { return n_; }
  int dim() const { return d_; }

  bool operator==(const LieGroup& o) const { return kind_ == o.kind_; }

  AlgebraElement zero() const;
  GroupElement identity() const;
  AlgebraElement basis(int a) const;

  Coords coords(const AlgebraElement& x) const;
  AlgebraElement from_coords(const Coords& c) const;

  AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) const;
  AlgebraElement ad(const AlgebraElement& x, const AlgebraElement& y) const { return bracket(x, y); }
  AlgebraElement Ad(const GroupElement& g, const AlgebraElement& x) const;
  double inner(const AlgebraElement& x, const AlgebraElement& y) const;
  double norm(const AlgebraElement& x) const;

  /// Matrix of ad_X (resp. Ad_g) acting on coordinates.
  CoordMatrix ad_matrix(const AlgebraElement& x) const;
  CoordMatrix Ad_matrix(const GroupElement& g) const;

  GroupElement exp(const AlgebraElement& x) const;
  /// Principal logarithm. Throws LogBranchIllConditioned within kLogBranchTol
  /// (in rotation angle) of the cut.
  AlgebraElement log(const GroupElement& g) const;

  AlgebraElement project_to_algebra(const Mat& m) const;
  /// Nearest group element by polar decomposition (determinant fixed to 1 for
  /// SU2/SO3). Throws TooFarFromGroup beyond operator-norm distance 0.5.
  GroupElement project_to_group(const Mat& m) const;

  double algebra_defect(const Mat& m) const;
  double group_defect(const Mat& m) const;

  AlgebraElement random_algebra(std::uint64_t seed, double scale) const;
  GroupElement random_group(std::uint64_t seed) const;
  AlgebraElement random_algebra(std::mt19937_64& rng, double scale) const;
  GroupElement random_group(std::mt19937_64& rng, double scale = 1.0) const;

  void check(const Mat& m) const;

  static constexpr double kLogBranchTol = 1e-6;

 private:
  GroupKind kind_;
  int n_;
  int d_;
  double trace_factor_;
};

/// Frobenius distance, used for comparing group elements.
inline double distance(const GroupElement& a, const GroupElement& b) { return (a.m - b.m).norm(); }

}  // namespace lk
