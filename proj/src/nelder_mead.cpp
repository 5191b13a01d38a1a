#include "crembo/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace crembo {

NelderMeadResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                                      const Eigen::VectorXd& start, const Eigen::VectorXd& lo,
                                      const Eigen::VectorXd& hi, const NelderMeadOptions& options) {
  const Eigen::Index n = start.size();
  int evaluations = 0;
  auto clip = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return v.cwiseMax(lo).cwiseMin(hi); };
  auto eval = [&](const Eigen::VectorXd& v) {
    ++evaluations;
    const double f = objective(v);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.push_back(clip(start));
  values.push_back(eval(simplex[0]));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = simplex[0];
    // Step away from whichever bound is closer so the vertex is not degenerate.
    v(i) += (v(i) + options.initial_step <= hi(i)) ? options.initial_step : -options.initial_step;
    v = clip(v);
    simplex.push_back(v);
    values.push_back(eval(v));
  }

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Eigen::VectorXd> s;
    std::vector<double> f;
    for (auto i : order) {
      s.push_back(simplex[i]);
      f.push_back(values[i]);
    }
    simplex = std::move(s);
    values = std::move(f);
  };

  const std::size_t worst = simplex.size() - 1;
  while (evaluations < options.max_evaluations) {
    sort_simplex();
    double size = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i)
      size = std::max(size, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    if (std::abs(values[worst] - values[0]) <= options.value_tolerance && size <= options.size_tolerance) break;
    if (size <= 1e-12) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < worst; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(worst);

    const Eigen::VectorXd reflected = clip(centroid + (centroid - simplex[worst]));
    const double f_reflected = eval(reflected);
    if (f_reflected < values[0]) {
      const Eigen::VectorXd expanded = clip(centroid + 2.0 * (centroid - simplex[worst]));
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[worst - 1]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted =
        outside ? clip(centroid + 0.5 * (reflected - centroid)) : clip(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      simplex[i] = clip(simplex[0] + 0.5 * (simplex[i] - simplex[0]));
      values[i] = eval(simplex[i]);
    }
  }
  sort_simplex();
  return {simplex[0], values[0], evaluations};
}

}  // namespace crembo
