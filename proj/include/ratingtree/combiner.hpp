#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratingtree/eval.hpp"

namespace ratingtree {

class CombinerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row-major feature matrix with binary labels.
struct Dataset {
  std::size_t n_features = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * n_features, n_features);
  }

  void add_row(std::span<const double> x, int label) {
    if (n_features == 0) n_features = x.size();
    if (x.size() != n_features) throw CombinerError("Dataset: inconsistent row width");
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
  }
};

struct CombinerConfig {
  double learning_rate = 0.5;
  double l2 = 1e-6;
  int max_epochs = 500;
  int patience = 20;  // early-stopping evaluations without valid-AUC improvement
  std::uint64_t seed = 42;
};

// Logistic scorer over standardized features. Zero-variance columns are
// frozen at weight 0 instead of erroring; cold-start-heavy data legitimately
// produces constant columns.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> mean;
  std::vector<double> stddev;  // 0 marks a constant column

  std::string setting;
  std::string category_filter;
  std::uint64_t seed = 0;
  int epochs_run = 0;
  std::uint64_t n_train = 0;

  double standardize(std::size_t j, double x) const {
    return stddev[j] > 0.0 ? (x - mean[j]) / stddev[j] : 0.0;
  }
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double predict_proba(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size())
    throw CombinerError("predict_proba: feature length mismatch");
  double z = model.bias;
  for (std::size_t j = 0; j < x.size(); ++j)
    z += model.weights[j] * model.standardize(j, x[j]);
  return sigmoid(z);
}

inline std::vector<double> predict_proba(const LinearModel& model, const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.push_back(predict_proba(model, data.row(i)));
  return out;
}

namespace detail {

// Mean logistic loss with an L2 penalty on the weights (not the bias).
// `xs` is already standardized, row-major.
inline double logistic_loss(std::span<const double> xs, std::span<const int> ys,
                            std::size_t n_features, std::span<const double> w, double b,
                            double l2) {
  const std::size_t n = ys.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = b;
    const double* row = xs.data() + i * n_features;
    for (std::size_t j = 0; j < n_features; ++j) z += w[j] * row[j];
    // log(1 + exp(-y*z)) in a form that never overflows
    loss += (z > 0.0 ? z : 0.0) - ys[i] * z + std::log1p(std::exp(-std::fabs(z)));
  }
  loss /= static_cast<double>(n);
  double penalty = 0.0;
  for (double wj : w) penalty += wj * wj;
  return loss + 0.5 * l2 * penalty;
}

inline void logistic_gradient(std::span<const double> xs, std::span<const int> ys,
                              std::size_t n_features, std::span<const double> w, double b,
                              double l2, std::span<double> grad_w, double& grad_b) {
  const std::size_t n = ys.size();
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = b;
    const double* row = xs.data() + i * n_features;
    for (std::size_t j = 0; j < n_features; ++j) z += w[j] * row[j];
    const double residual = sigmoid(z) - ys[i];
    for (std::size_t j = 0; j < n_features; ++j) grad_w[j] += residual * row[j];
    grad_b += residual;
  }
  for (std::size_t j = 0; j < n_features; ++j)
    grad_w[j] = grad_w[j] / static_cast<double>(n) + l2 * w[j];
  grad_b /= static_cast<double>(n);
}

inline std::vector<double> standardized_matrix(const Dataset& data, const LinearModel& model) {
  std::vector<double> xs(data.features.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = 0; j < data.n_features; ++j)
      xs[i * data.n_features + j] = model.standardize(j, data.features[i * data.n_features + j]);
  return xs;
}

}  // namespace detail

// Full-batch gradient descent on logistic loss; deterministic given the
// config and input order. Standardization statistics come from the training
// data. When `valid` is non-empty and two-class, training keeps the weights
// from the best validation AUC and stops after `patience` stale evaluations.
inline LinearModel fit(const Dataset& train, const Dataset& valid,
                       const CombinerConfig& config = {}) {
  if (train.empty()) throw CombinerError("fit: empty training data");
  std::int64_t n_pos = 0;
  for (int y : train.labels) n_pos += y;
  if (n_pos == 0 || n_pos == static_cast<std::int64_t>(train.size()))
    throw CombinerError("fit: single-class training data");
  if (!valid.empty() && valid.n_features != train.n_features)
    throw CombinerError("fit: train/valid feature width mismatch");

  const std::size_t F = train.n_features;
  const std::size_t n = train.size();

  LinearModel model;
  model.weights.assign(F, 0.0);
  model.mean.assign(F, 0.0);
  model.stddev.assign(F, 0.0);
  model.seed = config.seed;
  model.n_train = n;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < F; ++j) model.mean[j] += train.features[i * F + j];
  for (std::size_t j = 0; j < F; ++j) model.mean[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < F; ++j) {
      const double d = train.features[i * F + j] - model.mean[j];
      model.stddev[j] += d * d;
    }
  for (std::size_t j = 0; j < F; ++j)
    model.stddev[j] = std::sqrt(model.stddev[j] / static_cast<double>(n));

  const std::vector<double> xs = detail::standardized_matrix(train, model);
  const std::vector<double> xs_valid =
      valid.empty() ? std::vector<double>{} : detail::standardized_matrix(valid, model);

  std::vector<double> grad_w(F, 0.0);
  double grad_b = 0.0;
  std::vector<double> best_w = model.weights;
  double best_b = model.bias;
  std::optional<double> best_auc;
  int best_epoch = 0;
  int stale = 0;

  std::vector<double> valid_scores(valid.size(), 0.0);

  int epoch = 0;
  for (; epoch < config.max_epochs; ++epoch) {
    const double loss = detail::logistic_loss(xs, train.labels, F, model.weights, model.bias,
                                              config.l2);
    if (!std::isfinite(loss))
      throw CombinerError("fit: non-finite loss at epoch " + std::to_string(epoch));
    detail::logistic_gradient(xs, train.labels, F, model.weights, model.bias, config.l2,
                              grad_w, grad_b);
    for (std::size_t j = 0; j < F; ++j) {
      model.weights[j] -= config.learning_rate * grad_w[j];
      if (model.stddev[j] <= 0.0) model.weights[j] = 0.0;  // frozen constant column
    }
    model.bias -= config.learning_rate * grad_b;

    if (!valid.empty() && config.patience > 0) {
      for (std::size_t i = 0; i < valid.size(); ++i) {
        double z = model.bias;
        const double* row = xs_valid.data() + i * F;
        for (std::size_t j = 0; j < F; ++j) z += model.weights[j] * row[j];
        valid_scores[i] = z;  // sigmoid is monotone; the logit ranks identically
      }
      const auto auc = compute_auc(valid_scores, valid.labels);
      if (auc) {
        if (!best_auc || *auc > *best_auc) {
          best_auc = auc;
          best_w = model.weights;
          best_b = model.bias;
          best_epoch = epoch + 1;
          stale = 0;
        } else if (++stale >= config.patience) {
          model.weights = best_w;
          model.bias = best_b;
          model.epochs_run = best_epoch;
          return model;
        }
      }
    }
  }
  if (best_auc) {
    model.weights = best_w;
    model.bias = best_b;
    model.epochs_run = best_epoch;
  } else {
    model.epochs_run = epoch;
  }
  return model;
}

// Max relative error between the analytic gradient and central finite
// differences at the model's current state, over all coordinates.
inline double gradient_check(const LinearModel& model, const Dataset& batch,
                             double step = 1e-5, double l2 = 0.0) {
  if (batch.empty()) throw CombinerError("gradient_check: empty batch");
  if (batch.n_features != model.weights.size())
    throw CombinerError("gradient_check: feature length mismatch");
  const std::size_t F = batch.n_features;
  const std::vector<double> xs = detail::standardized_matrix(batch, model);

  std::vector<double> analytic(F, 0.0);
  double analytic_b = 0.0;
  detail::logistic_gradient(xs, batch.labels, F, model.weights, model.bias, l2, analytic,
                            analytic_b);

  std::vector<double> w = model.weights;
  double max_rel = 0.0;
  auto relative = [](double a, double b) {
    const double denom = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) / denom;
  };
  for (std::size_t j = 0; j <= F; ++j) {
    double* coord = j < F ? &w[j] : nullptr;
    double b_plus = model.bias, b_minus = model.bias;
    double saved = 0.0;
    if (coord) {
      saved = *coord;
      *coord = saved + step;
    } else {
      b_plus += step;
    }
    const double loss_plus =
        detail::logistic_loss(xs, batch.labels, F, w, coord ? model.bias : b_plus, l2);
    if (coord) {
      *coord = saved - step;
    } else {
      b_minus -= step;
    }
    const double loss_minus =
        detail::logistic_loss(xs, batch.labels, F, w, coord ? model.bias : b_minus, l2);
    if (coord) *coord = saved;
    const double numeric = (loss_plus - loss_minus) / (2.0 * step);
    const double exact = j < F ? analytic[j] : analytic_b;
    max_rel = std::max(max_rel, relative(exact, numeric));
  }
  return max_rel;
}

// --- model (de)serialization -------------------------------------------------
// Text format with hexfloat numbers: round-trips are bit-exact.

namespace detail {

inline std::string hex_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  (void)ec;
  return std::string(buf, ptr);
}

inline double parse_hex_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw CombinerError("model file: bad hexfloat '" + s + "'");
  return v;
}

}  // namespace detail

inline void save_model(const LinearModel& model, std::ostream& out) {
  out << "ratingtree-linear-model v1\n";
  out << "setting " << (model.setting.empty() ? "-" : model.setting) << '\n';
  out << "category " << (model.category_filter.empty() ? "-" : model.category_filter) << '\n';
  out << "seed " << model.seed << '\n';
  out << "epochs " << model.epochs_run << '\n';
  out << "n_train " << model.n_train << '\n';
  out << "n_features " << model.weights.size() << '\n';
  for (std::size_t j = 0; j < model.weights.size(); ++j)
    out << detail::hex_double(model.mean[j]) << ' ' << detail::hex_double(model.stddev[j]) << ' '
        << detail::hex_double(model.weights[j]) << '\n';
  out << "bias " << detail::hex_double(model.bias) << '\n';
}

inline LinearModel load_model(std::istream& in) {
  auto next_line = [&in]() {
    std::string line;
    if (!std::getline(in, line)) throw CombinerError("model file: truncated");
    return line;
  };
  auto field = [](const std::string& line, std::string_view key) {
    if (line.rfind(key, 0) != 0 || line.size() < key.size() + 2)
      throw CombinerError("model file: expected '" + std::string(key) + "' line");
    return line.substr(key.size() + 1);
  };
  if (next_line() != "ratingtree-linear-model v1")
    throw CombinerError("model file: unknown header");
  LinearModel model;
  model.setting = field(next_line(), "setting");
  if (model.setting == "-") model.setting.clear();
  model.category_filter = field(next_line(), "category");
  if (model.category_filter == "-") model.category_filter.clear();
  model.seed = std::stoull(field(next_line(), "seed"));
  model.epochs_run = std::stoi(field(next_line(), "epochs"));
  model.n_train = std::stoull(field(next_line(), "n_train"));
  const std::size_t F = std::stoull(field(next_line(), "n_features"));
  model.mean.resize(F);
  model.stddev.resize(F);
  model.weights.resize(F);
  for (std::size_t j = 0; j < F; ++j) {
    std::istringstream row(next_line());
    std::string m, s, w;
    if (!(row >> m >> s >> w)) throw CombinerError("model file: bad feature row");
    model.mean[j] = detail::parse_hex_double(m);
    model.stddev[j] = detail::parse_hex_double(s);
    model.weights[j] = detail::parse_hex_double(w);
  }
  model.bias = detail::parse_hex_double(field(next_line(), "bias"));
  return model;
}

}  // namespace ratingtree
