//
// Copyright 2026 The dptab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPTAB_EVAL_H_
#define DPTAB_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dptab/csv.h"
#include "dptab/schema.h"
#include "dptab/tensor.h"

namespace dptab {

// A raw table split into typed columns. Numeric kinds hold parsed values,
// categorical columns hold labels.
struct ColumnData {
  std::vector<double> values;
  std::vector<std::string> labels;
};

struct TypedTable {
  TableSchema schema;
  std::vector<ColumnData> columns;
  std::size_t rows = 0;

  TypedTable Subset(std::span<const std::size_t> row_ids) const;
};

// Rows with an unparseable numeric cell are dropped and counted.
TypedTable ToTyped(const StringGrid& grid, const TableSchema& schema,
                   std::size_t* dropped = nullptr);

// ---- statistical similarity -----------------------------------------------

// W1 between the two empirical distributions on the raw scale, i.e. the
// integral of |F_a - F_b|. Fails on empty input.
double Wasserstein1D(std::span<const double> a, std::span<const double> b);
// Wasserstein1D after min-max scaling both samples with their joint range.
double ScaledWasserstein(std::span<const double> a, std::span<const double> b);

using CategoryCounts = std::map<std::string, double>;

// Base-2 Jensen-Shannon divergence of the normalized histograms, in [0, 1].
double JensenShannon(const CategoryCounts& a, const CategoryCounts& b);

CategoryCounts CountLabels(std::span<const std::string> labels);

// Pairwise association matrix: Pearson for numeric pairs, Cramer's V for
// categorical pairs, correlation ratio for mixed pairs. Diagonal is 1.
// Constant columns give 0 and append a message to `warnings`.
Matrix AssociationMatrix(const TypedTable& table,
                         std::vector<std::string>* warnings = nullptr);

// Frobenius norm of the off-diagonal difference of the association matrices.
double DiffCorr(const TypedTable& real, const TypedTable& synth,
                std::vector<std::string>* warnings = nullptr);

double Pearson(std::span<const double> x, std::span<const double> y);
double CramersV(std::span<const std::string> x, std::span<const std::string> y);
double CorrelationRatio(std::span<const std::string> groups,
                        std::span<const double> values);

// ---- downstream utility -----------------------------------------------------

struct ClassificationScores {
  double accuracy = 0.0;  // fraction
  double auc = 0.0;
  double macro_f1 = 0.0;
};

struct ClassificationDiffs {
  double accuracy_pp = 0.0;  // percentage points
  double auc = 0.0;
  double macro_f1 = 0.0;
  ClassificationScores real;
  ClassificationScores synth;
};

struct RegressionScores {
  double mae = 0.0;
  double evs = 0.0;
  double r2 = 0.0;
};

struct RegressionDiffs {
  double mae = 0.0;
  double evs = 0.0;
  double r2 = 0.0;
  RegressionScores real;
  RegressionScores synth;
};

// Multinomial logistic regression fitted by full-batch gradient descent
// from zero weights.
struct LogisticOptions {
  double l2 = 1e-4;
  int epochs = 500;
  double learning_rate = 0.5;
};

struct LogisticModel {
  Matrix weights;  // (features, classes)
  Matrix bias;     // (1, classes)

  Matrix Probabilities(const Matrix& x) const;
};

LogisticModel FitLogistic(const Matrix& x, std::span<const std::size_t> labels,
                          std::size_t classes, const LogisticOptions& options = {});

// Ridge regression in closed form on standardized features; the intercept is
// not penalized. Coefficients are reported on the raw feature scale.
struct RidgeModel {
  Eigen::VectorXd coef;
  double intercept = 0.0;

  Eigen::VectorXd Predict(const Matrix& x) const;
};

RidgeModel FitRidge(const Matrix& x, std::span<const double> y,
                    double regularization = 1.0);

// Binary: ROC AUC of the positive-class probability. Multiclass: macro
// one-vs-rest. Ties get average ranks.
double RocAuc(std::span<const double> scores, std::span<const bool> positive);
ClassificationScores ScoreClassifier(const Matrix& probabilities,
                                     std::span<const std::size_t> labels);
RegressionScores ScoreRegressor(std::span<const double> predicted,
                                std::span<const double> actual);

// Train-on-synthetic / test-on-real against train-on-real, both evaluated on
// real_test. Fails when a training set has a single class.
ClassificationDiffs TstrClassify(const TypedTable& real_train,
                                 const TypedTable& real_test,
                                 const TypedTable& synth, std::size_t target);
RegressionDiffs TstrRegress(const TypedTable& real_train,
                            const TypedTable& real_test,
                            const TypedTable& synth, std::size_t target,
                            double regularization = 1.0);

// ---- membership inference -------------------------------------------------

struct MiaResult {
  double accuracy = 0.5;
  double threshold = 0.0;  // members predicted when distance <= threshold
};

// Scores every record by Euclidean distance to its nearest synthetic row and
// returns the best balanced accuracy over all thresholds. Rows must already
// be encoded in a common space.
MiaResult MembershipAttack(const Tensor& members, const Tensor& nonmembers,
                           const Tensor& synth);

std::vector<double> NearestDistances(const Tensor& records,
                                     const Tensor& synth);

// ---- report ---------------------------------------------------------------

struct ColumnMetric {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  bool is_wd = true;      // WD for numeric kinds, JSD for categorical
  double value = 0.0;
  // Mixed columns: JSD of the singular-vs-continuous indicator.
  std::optional<double> indicator_jsd;
};

struct EvalReport {
  std::vector<ColumnMetric> columns;
  double diff_corr = 0.0;
  std::optional<ClassificationDiffs> classification;
  std::optional<RegressionDiffs> regression;
  std::optional<double> mia_accuracy;
  std::vector<std::string> warnings;

  double TotalWd() const;
};

std::vector<ColumnMetric> ColumnMetrics(const TypedTable& real,
                                        const TypedTable& synth);

// Statistical metrics on the full tables; utility on a seeded 80/20 split of
// `real` when the schema has a target.
EvalReport Evaluate(const TypedTable& real, const TypedTable& synth,
                    std::uint64_t seed);

}  // namespace dptab

#endif  // DPTAB_EVAL_H_
