#include "lk/liegroup.hpp"

#include "lk/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

namespace lk {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr Complex kI{0.0, 1.0};

// x / sin(x), accurate near 0.
double x_over_sin(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0;
  }
  return x / std::sin(x);
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// (1 - cos x) / x^2
double one_minus_cos_over_sq(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 0.5 - x2 / 24.0 + x2 * x2 / 720.0;
  }
  return (1.0 - std::cos(x)) / (x * x);
}

}  // namespace

LieGroup::LieGroup(GroupKind kind) : kind_(kind) {
  switch (kind) {
    case GroupKind::UnitCircle: n_ = 1; d_ = 1; trace_factor_ = 1.0; break;
    case GroupKind::SU2: n_ = 2; d_ = 3; trace_factor_ = 1.0; break;
    case GroupKind::SO3: n_ = 3; d_ = 3; trace_factor_ = 0.5; break;
  }
}

LieGroup LieGroup::from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "u1") return LieGroup(GroupKind::UnitCircle);
  if (lower == "su2") return LieGroup(GroupKind::SU2);
  if (lower == "so3") return LieGroup(GroupKind::SO3);
  throw Error(ErrorCode::ParseError, "unknown group '" + std::string(name) + "' (expected u1|su2|so3)");
}

std::string_view LieGroup::name() const {
  switch (kind_) {
    case GroupKind::UnitCircle: return "u1";
    case GroupKind::SU2: return "su2";
    case GroupKind::SO3: return "so3";
  }
  return "?";
}

void LieGroup::check(const Mat& m) const {
  if (m.rows() != n_ || m.cols() != n_) {
    throw Error(ErrorCode::SpecMismatch, "expected " + std::to_string(n_) + "x" + std::to_string(n_) +
                                             " matrix for " + std::string(name()) + ", got " +
                                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

AlgebraElement LieGroup::zero() const { return {Mat::Zero(n_, n_)}; }

GroupElement LieGroup::identity() const { return {Mat::Identity(n_, n_)}; }

AlgebraElement LieGroup::basis(int a) const {
  Coords c = Coords::Zero(d_);
  c(a) = 1.0;
  return from_coords(c);
}

Coords LieGroup::coords(const AlgebraElement& x) const {
  check(x.m);
  Coords c(d_);
  switch (kind_) {
    case GroupKind::UnitCircle:
      c(0) = x.m(0, 0).imag();
      break;
    case GroupKind::SU2:
      // x = (1/sqrt2) [[i c1, c2 + i c3], [-c2 + i c3, -i c1]]
      c(0) = kSqrt2 * 0.5 * (x.m(0, 0).imag() - x.m(1, 1).imag());
      c(1) = kSqrt2 * 0.5 * (x.m(0, 1).real() - x.m(1, 0).real());
      c(2) = kSqrt2 * 0.5 * (x.m(0, 1).imag() + x.m(1, 0).imag());
      break;
    case GroupKind::SO3:
      c(0) = 0.5 * (x.m(2, 1).real() - x.m(1, 2).real());
      c(1) = 0.5 * (x.m(0, 2).real() - x.m(2, 0).real());
      c(2) = 0.5 * (x.m(1, 0).real() - x.m(0, 1).real());
      break;
  }
  return c;
}

AlgebraElement LieGroup::from_coords(const Coords& c) const {
  Mat m = Mat::Zero(n_, n_);
  switch (kind_) {
    case GroupKind::UnitCircle:
      m(0, 0) = kI * c(0);
      break;
    case GroupKind::SU2: {
      const double s = 1.0 / kSqrt2;
      m(0, 0) = kI * (s * c(0));
      m(1, 1) = -kI * (s * c(0));
      m(0, 1) = Complex(s * c(1), s * c(2));
      m(1, 0) = Complex(-s * c(1), s * c(2));
      break;
    }
    case GroupKind::SO3:
      m(2, 1) = c(0);
      m(1, 2) = -c(0);
      m(0, 2) = c(1);
      m(2, 0) = -c(1);
      m(1, 0) = c(2);
      m(0, 1) = -c(2);
      break;
  }
  return {m};
}

AlgebraElement LieGroup::bracket(const AlgebraElement& x, const AlgebraElement& y) const {
  check(x.m);
  check(y.m);
  return {x.m * y.m - y.m * x.m};
}

AlgebraElement LieGroup::Ad(const GroupElement& g, const AlgebraElement& x) const {
  check(g.m);
  check(x.m);
  return {g.m * x.m * g.m.adjoint()};
}

double LieGroup::inner(const AlgebraElement& x, const AlgebraElement& y) const {
  check(x.m);
  check(y.m);
  // tr(XY) without forming the product.
  Complex tr = (x.m.transpose().cwiseProduct(y.m)).sum();
  return -trace_factor_ * tr.real();
}

double LieGroup::norm(const AlgebraElement& x) const { return std::sqrt(std::max(0.0, inner(x, x))); }

CoordMatrix LieGroup::ad_matrix(const AlgebraElement& x) const {
  CoordMatrix out(d_, d_);
  for (int b = 0; b < d_; ++b) out.col(b) = coords(bracket(x, basis(b)));
  return out;
}

CoordMatrix LieGroup::Ad_matrix(const GroupElement& g) const {
  CoordMatrix out(d_, d_);
  for (int b = 0; b < d_; ++b) out.col(b) = coords(Ad(g, basis(b)));
  return out;
}

GroupElement LieGroup::exp(const AlgebraElement& x) const {
  check(x.m);
  switch (kind_) {
    case GroupKind::UnitCircle: {
      Mat m(1, 1);
      m(0, 0) = std::exp(kI * x.m(0, 0).imag());
      return {m};
    }
    case GroupKind::SU2: {
      // X^2 = -alpha^2 I for traceless anti-Hermitian X.
      const double alpha2 = std::max(0.0, -0.5 * (x.m * x.m).trace().real());
      const double alpha = std::sqrt(alpha2);
      Mat m = std::cos(alpha) * Mat::Identity(2, 2) + sinc(alpha) * x.m;
      return {m};
    }
    case GroupKind::SO3: {
      const Coords w = coords(x);
      const double theta = w.norm();
      Mat m = Mat::Identity(3, 3) + sinc(theta) * x.m + one_minus_cos_over_sq(theta) * (x.m * x.m);
      return {m};
    }
  }
  return identity();
}

AlgebraElement LieGroup::log(const GroupElement& g) const {
  check(g.m);
  const double pi = std::numbers::pi;
  switch (kind_) {
    case GroupKind::UnitCircle: {
      const double theta = std::arg(g.m(0, 0));
      if (pi - std::abs(theta) < kLogBranchTol) {
        throw Error(ErrorCode::LogBranchIllConditioned, "U(1) element near -1");
      }
      Mat m(1, 1);
      m(0, 0) = kI * theta;
      return {m};
    }
    case GroupKind::SU2: {
      const double c = 0.5 * g.m.trace().real();
      Mat s = 0.5 * (g.m - g.m.adjoint());
      s -= (s.trace() / 2.0) * Mat::Identity(2, 2);
      const double sin_alpha = std::sqrt(std::max(0.0, -0.5 * (s * s).trace().real()));
      const double alpha = std::atan2(sin_alpha, c);
      if (pi - alpha < kLogBranchTol) {
        throw Error(ErrorCode::LogBranchIllConditioned, "SU(2) element near -I (trace ~ -2)");
      }
      return project_to_algebra(x_over_sin(alpha) * s);
    }
    case GroupKind::SO3: {
      const double c = 0.5 * (g.m.trace().real() - 1.0);
      Mat s = 0.5 * (g.m - g.m.transpose());
      const AlgebraElement sk = project_to_algebra(s);
      const double sin_theta = coords(sk).norm();
      const double theta = std::atan2(sin_theta, c);
      if (pi - theta < kLogBranchTol) {
        throw Error(ErrorCode::LogBranchIllConditioned, "SO(3) rotation angle near pi");
      }
      return x_over_sin(theta) * sk;
    }
  }
  return zero();
}

AlgebraElement LieGroup::project_to_algebra(const Mat& m) const {
  check(m);
  switch (kind_) {
    case GroupKind::UnitCircle: {
      Mat out(1, 1);
      out(0, 0) = kI * m(0, 0).imag();
      return {out};
    }
    case GroupKind::SU2: {
      Mat out = 0.5 * (m - m.adjoint());
      out -= (out.trace() / 2.0) * Mat::Identity(2, 2);
      return {out};
    }
    case GroupKind::SO3: {
      Mat re = m.real().cast<Complex>();
      return {0.5 * (re - re.transpose())};
    }
  }
  return zero();
}

GroupElement LieGroup::project_to_group(const Mat& m) const {
  check(m);
  if (kind_ == GroupKind::UnitCircle) {
    const double r = std::abs(m(0, 0));
    if (std::abs(r - 1.0) > 0.5) throw Error(ErrorCode::TooFarFromGroup, "|z| far from 1");
    Mat out(1, 1);
    out(0, 0) = m(0, 0) / r;
    return {out};
  }
  Mat src = m;
  if (kind_ == GroupKind::SO3) src = m.real().cast<Complex>();
  Eigen::JacobiSVD<Mat> svd(src, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double dist = 0.0;
  for (int i = 0; i < sv.size(); ++i) dist = std::max(dist, std::abs(sv(i) - 1.0));
  if (dist > 0.5) {
    throw Error(ErrorCode::TooFarFromGroup, "operator-norm distance " + std::to_string(dist));
  }
  Mat u = svd.matrixU();
  const Mat v = svd.matrixV();
  Mat q = u * v.adjoint();
  if (kind_ == GroupKind::SU2) {
    const Complex det = q.determinant();
    q *= std::exp(-0.5 * kI * std::arg(det));
  } else {
    if (q.determinant().real() < 0.0) {
      u.col(n_ - 1) *= -1.0;
      q = u * v.adjoint();
    }
    q = q.real().cast<Complex>();
  }
  return {q};
}

double LieGroup::algebra_defect(const Mat& m) const {
  check(m);
  return (m - project_to_algebra(m).m).norm();
}

double LieGroup::group_defect(const Mat& m) const {
  check(m);
  double defect = (m.adjoint() * m - Mat::Identity(n_, n_)).norm();
  if (kind_ != GroupKind::UnitCircle) defect = std::max(defect, std::abs(m.determinant() - 1.0));
  if (kind_ == GroupKind::SO3) defect = std::max(defect, m.imag().norm());
  return defect;
}

AlgebraElement LieGroup::random_algebra(std::mt19937_64& rng, double scale) const {
  std::normal_distribution<double> normal(0.0, scale);
  Coords c(d_);
  for (int a = 0; a < d_; ++a) c(a) = normal(rng);
  return from_coords(c);
}

GroupElement LieGroup::random_group(std::mt19937_64& rng, double scale) const {
  return exp(random_algebra(rng, scale));
}

AlgebraElement LieGroup::random_algebra(std::uint64_t seed, double scale) const {
  std::mt19937_64 rng(seed);
  return random_algebra(rng, scale);
}

GroupElement LieGroup::random_group(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return random_group(rng, 1.0);
}

}  // namespace lk
