#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "joci/ordinal_model.hpp"

using namespace joci;

namespace {

// noise-free 1-D data: x = y, 20 points per class
std::pair<std::vector<std::vector<double>>, std::vector<int>> separable_data() {
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  for (int label = 1; label <= 5; ++label)
    for (int i = 0; i < 20; ++i) {
      X.push_back({static_cast<double>(label)});
      y.push_back(label);
    }
  return {X, y};
}

double train_mse(const OrdinalModel& m, const std::vector<std::vector<double>>& X,
                 const std::vector<int>& y) {
  double total = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    double d = predict_ordinal(m, X[i]) - y[i];
    total += d * d;
  }
  return total / static_cast<double>(X.size());
}

}  // namespace

TEST_CASE("prediction counts crossed thresholds") {
  OrdinalModel m;
  m.weights = {1.0};
  m.thresholds = {0.0, 1.0, 2.0, 3.0};
  CHECK(predict_ordinal(m, {0.5}) == 2);
  CHECK(predict_ordinal(m, {-1.0}) == 1);
  CHECK(predict_ordinal(m, {9.0}) == 5);
}

TEST_CASE("both loss gradients match central finite differences") {
  std::mt19937 rng(71);
  auto noise = [&] { return (static_cast<double>(rng() % 2000) - 1000.0) / 1000.0; };
  for (LossVariant variant :
       {LossVariant::all_threshold_logistic, LossVariant::squared_error_link}) {
    for (int trial = 0; trial < 10; ++trial) {
      size_t n = 6 + rng() % 6, d = 1 + rng() % 4;
      std::vector<std::vector<double>> X(n, std::vector<double>(d));
      std::vector<int> y(n);
      for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < d; ++j) X[i][j] = noise() * 2.0;
        y[i] = 1 + static_cast<int>(rng() % 5);
      }
      std::vector<double> packed(d + 4);
      for (double& p : packed) p = noise();
      double lambda = 0.05;

      std::vector<double> grad;
      ordinal::loss_grad(packed, X, y, lambda, variant, &grad);

      const double eps = 1e-5;
      double worst = 0.0;
      for (size_t j = 0; j < packed.size(); ++j) {
        std::vector<double> up = packed, down = packed;
        up[j] += eps;
        down[j] -= eps;
        double numeric = (ordinal::loss_grad(up, X, y, lambda, variant, nullptr) -
                          ordinal::loss_grad(down, X, y, lambda, variant, nullptr)) /
                         (2.0 * eps);
        double denom = std::max({std::abs(numeric), std::abs(grad[j]), 1.0});
        worst = std::max(worst, std::abs(numeric - grad[j]) / denom);
      }
      CHECK(worst <= 1e-6);
    }
  }
}

TEST_CASE("thresholds are monotone after every training run") {
  std::mt19937 rng(5);
  auto noise = [&] { return (static_cast<double>(rng() % 2000) - 1000.0) / 500.0; };
  for (int trial = 0; trial < 5; ++trial) {
    size_t n = 30;
    std::vector<std::vector<double>> X(n, std::vector<double>(3));
    std::vector<int> y(n);
    for (size_t i = 0; i < n; ++i) {
      for (double& v : X[i]) v = noise();
      y[i] = 1 + static_cast<int>(rng() % 5);
    }
    for (LossVariant variant :
         {LossVariant::all_threshold_logistic, LossVariant::squared_error_link}) {
      OrdinalTrainConfig cfg;
      cfg.variant = variant;
      OrdinalModel m = train_ordinal(X, y, cfg);
      CHECK(m.thresholds[0] <= m.thresholds[1]);
      CHECK(m.thresholds[1] <= m.thresholds[2]);
      CHECK(m.thresholds[2] <= m.thresholds[3]);
    }
  }
}

TEST_CASE("noise-free one-dimensional data reaches zero train MSE") {
  auto [X, y] = separable_data();
  OrdinalTrainConfig cfg;
  cfg.lambda = 0.0;
  cfg.gd.max_iters = 5000;
  OrdinalModel m = train_ordinal(X, y, cfg);
  CHECK(train_mse(m, X, y) == 0.0);
}

TEST_CASE("huge regularization collapses predictions to one class") {
  auto [X, y] = separable_data();
  OrdinalTrainConfig cfg;
  cfg.lambda = 1e7;
  OrdinalModel m = train_ordinal(X, y, cfg);
  CHECK(std::abs(m.weights[0]) < 1e-3);
  int first = predict_ordinal(m, X[0]);
  for (const auto& x : X) CHECK(predict_ordinal(m, x) == first);
}

TEST_CASE("prediction is monotone in the raw score") {
  std::mt19937 rng(9);
  auto noise = [&] { return (static_cast<double>(rng() % 2000) - 1000.0) / 500.0; };
  std::vector<std::vector<double>> X(40, std::vector<double>(2));
  std::vector<int> y(40);
  for (size_t i = 0; i < X.size(); ++i) {
    for (double& v : X[i]) v = noise();
    y[i] = 1 + static_cast<int>(rng() % 5);
  }
  OrdinalModel m = train_ordinal(X, y);
  std::vector<std::pair<double, int>> scored;
  for (const auto& x : X) scored.emplace_back(m.raw_score(x), predict_ordinal(m, x));
  std::sort(scored.begin(), scored.end());
  for (size_t i = 0; i + 1 < scored.size(); ++i) CHECK(scored[i].second <= scored[i + 1].second);
}

TEST_CASE("with y copied into the features, regression beats rounded average at lambda zero") {
  auto [X, y] = separable_data();  // feature IS the label
  OrdinalTrainConfig cfg;
  cfg.lambda = 0.0;
  cfg.gd.max_iters = 5000;
  OrdinalModel m = train_ordinal(X, y, cfg);
  BaselineModel avg = fit_baseline(BaselineKind::rounded_average, y);
  double avg_mse = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    double d = predict_baseline(avg) - y[i];
    avg_mse += d * d;
  }
  avg_mse /= static_cast<double>(y.size());
  CHECK(train_mse(m, X, y) <= avg_mse + 1e-9);
}

TEST_CASE("single-class training yields a degenerate constant model with that class") {
  std::vector<std::vector<double>> X(6, {1.0, 2.0});
  std::vector<int> y(6, 4);
  OrdinalModel m = train_ordinal(X, y);
  CHECK(m.degenerate);
  CHECK(predict_ordinal(m, {0.0, 0.0}) == 4);
  CHECK(predict_ordinal(m, {100.0, -100.0}) == 4);
}

TEST_CASE("most frequent baseline breaks ties toward the lower label") {
  CHECK(fit_baseline(BaselineKind::most_frequent, {3, 3, 5}).constant == 3);
  CHECK(fit_baseline(BaselineKind::most_frequent, {5, 5, 3, 3}).constant == 3);
  CHECK(predict_baseline(fit_baseline(BaselineKind::most_frequent, {2, 2, 1})) == 2);
}

TEST_CASE("rounded average rounds half up") {
  CHECK(fit_baseline(BaselineKind::rounded_average, {1, 2, 2}).constant == 2);  // 5/3 -> 2
  CHECK(fit_baseline(BaselineKind::rounded_average, {1, 2}).constant == 2);     // 1.5 -> 2
  CHECK(fit_baseline(BaselineKind::rounded_average, {4, 4, 5}).constant == 4);  // 13/3 -> 4
}

TEST_CASE("frequency sampling is seeded and reproducible") {
  std::vector<int> y{1, 1, 2, 3, 3, 3, 4, 5, 5, 5};
  BaselineTrainConfig cfg;
  cfg.seed = 99;
  BaselineModel a = fit_baseline(BaselineKind::freq_sampling, y, nullptr, cfg);
  BaselineModel b = fit_baseline(BaselineKind::freq_sampling, y, nullptr, cfg);
  std::vector<int> seq_a, seq_b;
  for (int i = 0; i < 50; ++i) {
    seq_a.push_back(predict_baseline(a));
    seq_b.push_back(predict_baseline(b));
  }
  CHECK(seq_a == seq_b);
  double total = 0.0;
  for (double p : a.distribution) total += p;
  CHECK(total == Catch::Approx(1.0));
}

TEST_CASE("one-vs-all svm separates an easy multiclass problem") {
  // class k clustered around (k, -k)
  std::mt19937 rng(21);
  auto jitter = [&] { return (static_cast<double>(rng() % 100) - 50.0) / 500.0; };
  std::vector<std::vector<double>> X;
  std::vector<int> y;
  for (int label = 1; label <= 5; ++label)
    for (int i = 0; i < 12; ++i) {
      X.push_back({label + jitter(), -label + jitter()});
      y.push_back(label);
    }
  BaselineModel svm = fit_baseline(BaselineKind::one_vs_all_svm, y, &X);
  int correct = 0;
  for (size_t i = 0; i < X.size(); ++i)
    if (predict_baseline(svm, &X[i]) == y[i]) ++correct;
  CHECK(static_cast<double>(correct) / static_cast<double>(X.size()) >= 0.9);
}

TEST_CASE("baseline input validation") {
  CHECK_THROWS_AS(fit_baseline(BaselineKind::most_frequent, {}), std::invalid_argument);
  CHECK_THROWS_AS(fit_baseline(BaselineKind::one_vs_all_svm, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(fit_baseline(BaselineKind::most_frequent, {0}), std::invalid_argument);
}

TEST_CASE("ordinal model JSON round-trips") {
  auto [X, y] = separable_data();
  OrdinalModel m = train_ordinal(X, y);
  auto path = (std::filesystem::temp_directory_path() / "ordinal_model.json").string();
  save_ordinal_model(path, m, {"f0"}, 42);
  std::vector<std::string> names;
  OrdinalModel loaded = load_ordinal_model(path, &names);
  std::remove(path.c_str());
  CHECK(names == std::vector<std::string>{"f0"});
  CHECK(loaded.weights == m.weights);
  CHECK(loaded.thresholds == m.thresholds);
  CHECK(loaded.variant == m.variant);
  CHECK(loaded.scaler.mean == m.scaler.mean);
  for (const auto& x : X) CHECK(predict_ordinal(loaded, x) == predict_ordinal(m, x));
}
