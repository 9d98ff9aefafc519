#include "foldscan/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "foldscan/error.hpp"

namespace foldscan {

namespace {

// Lazily computed kernel matrix rows with least-recently-used eviction once
// the byte budget is exhausted. At least two rows are always resident.
class KernelRows {
 public:
  KernelRows(const std::vector<std::vector<double>>& x, const KernelSpec& spec,
             std::size_t cache_bytes)
      : x_(x), spec_(spec), slot_of_(x.size(), -1) {
    const std::size_t n = x.size();
    const std::size_t per_row = std::max<std::size_t>(1, n * sizeof(double));
    capacity_ = std::clamp<std::size_t>(cache_bytes / per_row, 2, std::max<std::size_t>(n, 2));
  }

  std::span<const double> row(std::size_t i) {
    ++clock_;
    if (slot_of_[i] >= 0) {
      const auto s = static_cast<std::size_t>(slot_of_[i]);
      last_used_[s] = clock_;
      return rows_[s];
    }
    std::size_t s;
    if (rows_.size() < capacity_) {
      s = rows_.size();
      rows_.emplace_back(x_.size());
      owner_.push_back(i);
      last_used_.push_back(clock_);
    } else {
      s = static_cast<std::size_t>(
          std::min_element(last_used_.begin(), last_used_.end()) - last_used_.begin());
      slot_of_[owner_[s]] = -1;
      owner_[s] = i;
      last_used_[s] = clock_;
    }
    slot_of_[i] = static_cast<long>(s);
    auto& r = rows_[s];
    for (std::size_t t = 0; t < x_.size(); ++t) r[t] = kernel(spec_, x_[i], x_[t]);
    return r;
  }

 private:
  const std::vector<std::vector<double>>& x_;
  KernelSpec spec_;
  std::size_t capacity_ = 2;
  std::vector<long> slot_of_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::size_t> owner_;
  std::vector<std::size_t> last_used_;
  std::size_t clock_ = 0;
};

}  // namespace

DualSolution solve_dual(const std::vector<std::vector<double>>& x, std::span<const int> y,
                        std::span<const double> upper, const SvmOptions& options) {
  const std::size_t n = x.size();
  if (y.size() != n || upper.size() != n)
    throw std::invalid_argument("solve_dual: x, y and upper must have equal length");
  options.kernel.validate();
  for (double u : upper)
    if (!(u > 0.0)) throw std::invalid_argument("box constraints must be positive");

  KernelRows rows(x, options.kernel, options.cache_bytes);
  std::vector<double> diag(n);
  for (std::size_t t = 0; t < n; ++t) diag[t] = kernel(options.kernel, x[t], x[t]);

  DualSolution sol;
  auto& alpha = sol.alpha;
  alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  constexpr double kTau = 1e-12;

  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < upper[t] : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < upper[t]; };

  // Maximal violating pair: i maximizes -y G over I_up, j minimizes it over I_low.
  auto select = [&](std::size_t& i, std::size_t& j) {
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    i = j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > m) {
        m = v;
        i = t;
      }
      if (in_low(t) && v < M) {
        M = v;
        j = t;
      }
    }
    return (i == n || j == n) ? 0.0 : m - M;
  };

  std::size_t it = 0;
  for (;; ++it) {
    std::size_t i, j;
    const double violation = select(i, j);
    sol.report.max_violation = std::max(violation, 0.0);
    if (i == n || j == n || violation < options.tol) {
      sol.report.converged = true;
      break;
    }
    if (it >= options.max_iterations) break;

    const auto Ki = rows.row(i);
    const auto Kj = rows.row(j);
    const double Ci = upper[i], Cj = upper[j];
    const double old_i = alpha[i], old_j = alpha[j];
    const double Qij = y[i] * y[j] * Ki[j];

    if (y[i] != y[j]) {
      double quad = diag[i] + diag[j] + 2.0 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > Ci - Cj) {
        if (alpha[i] > Ci) {
          alpha[i] = Ci;
          alpha[j] = Ci - diff;
        }
      } else if (alpha[j] > Cj) {
        alpha[j] = Cj;
        alpha[i] = Cj + diff;
      }
    } else {
      double quad = diag[i] + diag[j] - 2.0 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > Ci) {
        if (alpha[i] > Ci) {
          alpha[i] = Ci;
          alpha[j] = sum - Ci;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > Cj) {
        if (alpha[j] > Cj) {
          alpha[j] = Cj;
          alpha[i] = sum - Cj;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * Ki[t] * di + y[j] * Kj[t] * dj);
  }
  sol.report.iterations = it;

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= upper[t]) {
      if (y[t] < 0)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;
  sol.bias = -rho;

  double objective = 0.0;
  for (std::size_t t = 0; t < n; ++t) objective += alpha[t] * (1.0 - grad[t]);
  sol.report.dual_objective = 0.5 * objective;
  return sol;
}

double SvmModel::decision(std::span<const double> raw) const {
  const auto z = standardization.apply(raw);
  double f = bias;
  for (std::size_t s = 0; s < support_vectors.size(); ++s)
    f += alphas[s] * labels[s] * kernel(kernel_spec, support_vectors[s], z);
  return f;
}

Label SvmModel::predict(std::span<const double> raw) const {
  return decision(raw) >= 0.0 ? Label::folded : Label::normal;
}

SvmModel train_svm(std::span<const FeatureVector> data, const SvmOptions& options) {
  if (!(options.C > 0.0)) throw std::invalid_argument("box constraint C must be positive");
  if (!(options.weight_folded > 0.0) || !(options.weight_normal > 0.0))
    throw std::invalid_argument("class weights must be positive");
  options.kernel.validate();
  uniform_dimension(data);

  std::size_t folded = 0, normal = 0;
  for (const auto& v : data) {
    if (v.label == Label::folded)
      ++folded;
    else if (v.label == Label::normal)
      ++normal;
    else
      throw Error("training data contains an unlabeled vector (source '" + v.source_id + "')");
  }
  if (folded == 0 || normal == 0) throw Error("single-class data: SVM needs both classes");

  SvmModel model;
  model.kernel_spec = options.kernel;
  model.C = options.C;
  model.weight_folded = options.weight_folded;
  model.weight_normal = options.weight_normal;
  model.standardization = Standardization::fit(data);

  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<double> upper;
  x.reserve(data.size());
  for (const auto& v : data) {
    x.push_back(model.standardization.apply(v.values));
    const bool pos = v.label == Label::folded;
    y.push_back(pos ? 1 : -1);
    upper.push_back(options.C * (pos ? options.weight_folded : options.weight_normal));
  }

  const DualSolution sol = solve_dual(x, y, upper, options);
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (sol.alpha[t] <= 0.0) continue;
    model.support_vectors.push_back(std::move(x[t]));
    model.labels.push_back(y[t]);
    model.alphas.push_back(sol.alpha[t]);
  }
  model.bias = sol.bias;
  model.training = sol.report;
  return model;
}

}  // namespace foldscan
