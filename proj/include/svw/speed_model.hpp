#ifndef SVW_SPEED_MODEL_HPP_
#define SVW_SPEED_MODEL_HPP_

#include <filesystem>
#include <vector>

namespace svw {

enum class SpeedKind { Tanh, Constant, Table };

// Wave speed c(u) with 0 < c1 <= c <= c2 and 0 <= c' <= c3, together with
// the maps derived from it: ctilde' = c'/(4c), the primitive
// C(r) = int_0^r c, and its inverse. Immutable after construction.
class SpeedModel {
 public:
  // c(u) = c_base + c_amp * tanh(u); requires c_base > c_amp >= 0.
  static SpeedModel tanh(double c_base = 2.0, double c_amp = 1.0);
  static SpeedModel constant(double c);
  // Monotone piecewise-cubic (Fritsch-Carlson) interpolant of the samples,
  // held constant outside [u.front(), u.back()]. Samples must have strictly
  // increasing u and nondecreasing positive c.
  static SpeedModel table(std::vector<double> u, std::vector<double> c);
  // Two-column CSV "u,c" (header line optional).
  static SpeedModel table_from_file(const std::filesystem::path& path);

  SpeedKind kind() const { return kind_; }
  double c_base() const { return c_base_; }
  double c_amp() const { return c_amp_; }

  double c(double u) const;
  double c_prime(double u) const;
  double ctilde_prime(double u) const { return c_prime(u) / (4.0 * c(u)); }

  double primitive(double r) const;
  // Safeguarded Newton; throws Error(IterationFailure) on non-convergence.
  double inverse_primitive(double y) const;
  // Same, starting Newton from `guess`.
  double inverse_primitive(double y, double guess) const;

  struct Sample {
    double c;
    double ctilde_prime;
  };
  // c and ctilde' together (one tanh for the default model).
  Sample sample(double u) const;

  double c1() const { return c1_; }
  double c2() const { return c2_; }
  double c3() const { return c3_; }

 private:
  SpeedModel() = default;

  double table_c(double u) const;
  double table_c_prime(double u) const;
  double table_antiderivative(double u) const;  // from the first node

  SpeedKind kind_ = SpeedKind::Constant;
  double c_base_ = 1.0;
  double c_amp_ = 0.0;
  double c1_ = 1.0;
  double c2_ = 1.0;
  double c3_ = 0.0;

  // table representation
  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  std::vector<double> cumulative_;  // antiderivative at each node
  double offset_at_zero_ = 0.0;
};

// Quadratic cut-off (xi - 1/eps)^2 above the threshold 1/eps, zero below.
inline double chi_eps(double xi, double eps) {
  const double threshold = 1.0 / eps;
  if (xi < threshold) return 0.0;
  const double d = xi - threshold;
  return d * d;
}

}  // namespace svw

#endif  // SVW_SPEED_MODEL_HPP_
