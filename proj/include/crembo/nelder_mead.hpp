#pragma once

#include <functional>

#include <Eigen/Dense>

namespace crembo {

struct NelderMeadOptions {
  int max_evaluations = 200;
  double initial_step = 0.5;     // simplex edge, in parameter units
  double value_tolerance = 1e-7; // spread of simplex values
  double size_tolerance = 1e-5;  // max vertex distance from best
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
};

/// Box-constrained Nelder–Mead minimization; trial vertices are clipped into
/// [lo, hi]. Non-finite objective values count as +inf.
NelderMeadResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                                      const Eigen::VectorXd& start, const Eigen::VectorXd& lo,
                                      const Eigen::VectorXd& hi, const NelderMeadOptions& options = {});

}  // namespace crembo
