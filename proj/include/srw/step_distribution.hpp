#pragma once

// Typical-step laws with exact analytic moments.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srw/matrix.hpp"
#include "srw/random_stream.hpp"

namespace srw {

enum class StepKind { rademacher, gaussian, lattice, indicator_grid, discrete };

/// One support point of a finitely supported law.
struct Atom {
  Vector value;
  double probability = 0.0;
};

/// Optional clipping of a gaussian law at |x| <= bound. Keeping the inside
/// part gives the truncated step X 1{|X|<=b} - E(X 1{|X|<=b}); keeping the
/// outside part gives the centred residual X 1{|X|>b} - E(X 1{|X|>b}).
struct GaussianClip {
  double bound = 0.0;
  bool keep_inside = true;
  double offset = 0.0;
};

class StepDistribution {
public:
  StepKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  bool bounded() const { return bound_.has_value(); }
  /// Sup-norm bound on a step, when finite.
  std::optional<double> bound() const { return bound_; }
  /// Canonical descriptor (matches the CLI grammar where one exists).
  const std::string& descriptor() const { return descriptor_; }

  /// Finite support, or nullopt for continuous laws.
  const std::optional<std::vector<Atom>>& support() const { return support_; }

  /// Grid points for indicator_grid laws (empty otherwise).
  const std::vector<double>& grid() const { return grid_; }

  /// Draws one step into out (size dim()).
  void sample(RandomStream& rng, std::span<double> out) const;

  friend StepDistribution make_rademacher();
  friend StepDistribution make_gaussian(double mean, double sd);
  friend StepDistribution make_lattice(std::size_t d);
  friend StepDistribution make_indicator_grid(std::vector<double> grid);
  friend StepDistribution make_discrete(std::vector<double> values,
                                        std::vector<double> probabilities);
  friend StepDistribution make_discrete_atoms(std::vector<Atom> atoms, std::string descriptor);
  friend StepDistribution clip_gaussian(const StepDistribution& base, GaussianClip clip);

private:
  StepDistribution() = default;
  void finish_from_support();

  StepKind kind_ = StepKind::rademacher;
  std::size_t dim_ = 1;
  Vector mean_;
  Matrix covariance_;
  std::optional<double> bound_;
  std::string descriptor_;
  std::optional<std::vector<Atom>> support_;
  std::vector<double> cumulative_;  // discrete sampling table
  std::vector<double> grid_;
  double gauss_mean_ = 0.0;
  double gauss_sd_ = 1.0;
  std::optional<GaussianClip> clip_;
};

StepDistribution make_rademacher();
StepDistribution make_gaussian(double mean, double sd);
/// Uniform on the 2d unit steps {+-e_1, ..., +-e_d}.
StepDistribution make_lattice(std::size_t d);
/// Steps (1{U<=x_1} - x_1, ..., 1{U<=x_k} - x_k) for U uniform on [0,1].
StepDistribution make_indicator_grid(std::vector<double> grid);
/// One-dimensional law on values with the given probabilities.
StepDistribution make_discrete(std::vector<double> values, std::vector<double> probabilities);

/// Parses `rademacher`, `gaussian:MEAN,SD`, `lattice:D`, `indicator:x1,...`,
/// or `discrete:PATH` (two-column CSV value,probability).
/// Throws std::invalid_argument on malformed descriptors.
StepDistribution make_distribution(std::string_view descriptor);

struct Truncation {
  StepDistribution law;
  double sigma_b = 0.0;  // std of X^(b)
  double zeta_b = 0.0;   // std of X - X^(b)
};

/// X^(b) = X 1{|X|<=b} - E(X 1{|X|<=b}) with its own and the residual's
/// standard deviation. One-dimensional laws only.
Truncation truncate_distribution(const StepDistribution& d, double b);

/// Centred residual X - X^(b) - E(X).
StepDistribution residual_distribution(const StepDistribution& d, double b);

}  // namespace srw
