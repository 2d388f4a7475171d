#ifndef SVW_GRID_HPP_
#define SVW_GRID_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace svw {

// Uniform grid on the torus [0,1): nodes x_i = i/n.
class Grid {
 public:
  explicit Grid(int n);

  int n() const { return n_; }
  double dx() const { return dx_; }
  double x(int i) const { return i * dx_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_;
  double dx_;
};

// Periodic samples of a scalar function on a Grid.
class Field {
 public:
  explicit Field(Grid grid, double value = 0.0);
  Field(Grid grid, std::vector<double> values);

  template <class F>
  static Field sample(Grid grid, F&& f) {
    Field out(grid);
    for (int i = 0; i < grid.n(); ++i) out[i] = f(grid.x(i));
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  // periodic index
  double wrap(long i) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double max() const;
  double min() const;
  double sup_norm() const;
  bool all_finite() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

// Cubic: Hermite with centered slopes, each value clipped to the range of
// the two bracketing nodes, so no new extrema appear.
enum class Interpolation { Cubic, Linear };

// Discrete normalized bump kernel rho_eps on the grid offsets -m..m.
std::vector<double> mollifier_weights(const Grid& grid, double eps);

// Periodic convolution with the discrete bump kernel of width eps.
Field mollify(const Field& f, double eps);

// Rectangle rule sum_i f(x_i) dx.
double periodic_integral(const Field& f);
double periodic_integral(std::span<const double> f, double dx);

// F(x_0) = 0, F(x_{i+1}) = F(x_i) + (f_i + f_{i+1}) dx / 2.
Field antiderivative_from_zero(const Field& f);

// Centered difference (f_{i+1} - f_{i-1}) / (2 dx).
Field centered_difference(const Field& f);

// Periodic interpolation at x mod 1.
double interpolate(const Field& f, double x,
                   Interpolation kind = Interpolation::Cubic);

// Interpolant with precomputed node slopes, for evaluating one field at many
// points.
class PeriodicInterpolant {
 public:
  PeriodicInterpolant(const Field& f, Interpolation kind);
  double operator()(double x) const;

 private:
  const Field* f_;
  Interpolation kind_;
  std::vector<double> slopes_;
};

}  // namespace svw

#endif  // SVW_GRID_HPP_
