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

#include "dptab/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>

#include "dptab/codec.h"
#include "dptab/error.h"
#include "dptab/rng.h"
#include "dptab/vgm.h"

namespace dptab {
namespace {

double Mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

bool IsSingularValue(const ColumnSpec& spec, double v) {
  return std::any_of(spec.singular_values.begin(), spec.singular_values.end(),
                     [v](double s) { return std::abs(v - s) <= kSingularTolerance; });
}

// Standardized numeric features plus one-hot categoricals, fitted on one
// table and applied to others. The target column is excluded.
class FeatureMap {
 public:
  FeatureMap(const TypedTable& train, std::size_t target) : target_(target) {
    const auto& cols = train.schema.columns;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c == target) continue;
      Feature f;
      f.column = c;
      f.kind = cols[c].kind;
      if (f.kind == ColumnKind::kCategorical) {
        std::set<std::string> cats(train.columns[c].labels.begin(),
                                   train.columns[c].labels.end());
        f.categories.assign(cats.begin(), cats.end());
        width_ += f.categories.size();
      } else {
        std::vector<double> v = Transform(train.columns[c].values, f.kind);
        f.mean = Mean(v);
        double var = 0.0;
        for (double x : v) var += (x - f.mean) * (x - f.mean);
        f.scale = std::sqrt(var / static_cast<double>(v.size()));
        if (!(f.scale > 0.0)) f.scale = 1.0;
        width_ += 1;
      }
      features_.push_back(std::move(f));
    }
    Require(width_ > 0, "tstr: no feature columns besides the target");
  }

  Matrix Apply(const TypedTable& t) const {
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(t.rows),
                            static_cast<Eigen::Index>(width_));
    Eigen::Index col = 0;
    for (const Feature& f : features_) {
      const ColumnData& d = t.columns[f.column];
      if (f.kind == ColumnKind::kCategorical) {
        for (std::size_t r = 0; r < t.rows; ++r) {
          auto it = std::lower_bound(f.categories.begin(), f.categories.end(),
                                     d.labels[r]);
          if (it != f.categories.end() && *it == d.labels[r]) {
            x(static_cast<Eigen::Index>(r), col + (it - f.categories.begin())) = 1.0;
          }
        }
        col += static_cast<Eigen::Index>(f.categories.size());
      } else {
        const std::vector<double> v = Transform(d.values, f.kind);
        for (std::size_t r = 0; r < t.rows; ++r) {
          x(static_cast<Eigen::Index>(r), col) = (v[r] - f.mean) / f.scale;
        }
        col += 1;
      }
    }
    return x;
  }

 private:
  struct Feature {
    std::size_t column = 0;
    ColumnKind kind = ColumnKind::kContinuous;
    std::vector<std::string> categories;
    double mean = 0.0;
    double scale = 1.0;
  };

  static std::vector<double> Transform(const std::vector<double>& v,
                                       ColumnKind kind) {
    if (kind != ColumnKind::kLongtail) return v;
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), LongtailForward);
    return out;
  }

  std::size_t target_;
  std::size_t width_ = 0;
  std::vector<Feature> features_;
};

// Maps labels onto class indices; rows with an unknown label are reported
// through `keep`.
std::vector<std::size_t> ClassIndices(const std::vector<std::string>& labels,
                                      const std::vector<std::string>& classes,
                                      std::vector<std::size_t>* keep) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    auto it = std::lower_bound(classes.begin(), classes.end(), labels[r]);
    if (it != classes.end() && *it == labels[r]) {
      out.push_back(static_cast<std::size_t>(it - classes.begin()));
      keep->push_back(r);
    }
  }
  return out;
}

void RequireTwoClasses(std::span<const std::size_t> labels, const char* which) {
  std::set<std::size_t> seen(labels.begin(), labels.end());
  if (seen.size() < 2) {
    Fail(ErrorCode::kData, std::string("tstr: ") + which +
                               " training target has a single class");
  }
}

std::vector<double> Ranks(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> ranks(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

TypedTable TypedTable::Subset(std::span<const std::size_t> row_ids) const {
  TypedTable out;
  out.schema = schema;
  out.columns.resize(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t r : row_ids) {
      if (IsNumeric(schema.columns[c].kind)) {
        out.columns[c].values.push_back(columns[c].values[r]);
      } else {
        out.columns[c].labels.push_back(columns[c].labels[r]);
      }
    }
  }
  out.rows = row_ids.size();
  return out;
}

TypedTable ToTyped(const StringGrid& grid, const TableSchema& schema,
                   std::size_t* dropped) {
  TypedTable t;
  t.schema = schema;
  t.columns.resize(schema.size());
  std::size_t skipped = 0;
  std::vector<double> parsed(schema.size());
  for (const auto& row : grid) {
    if (row.size() != schema.size()) {
      Fail(ErrorCode::kData, "row has " + std::to_string(row.size()) +
                                 " fields, schema has " +
                                 std::to_string(schema.size()));
    }
    bool ok = true;
    for (std::size_t c = 0; ok && c < schema.size(); ++c) {
      if (IsNumeric(schema.columns[c].kind)) ok = ParseDouble(row[c], &parsed[c]);
    }
    if (!ok) {
      ++skipped;
      continue;
    }
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (IsNumeric(schema.columns[c].kind)) {
        t.columns[c].values.push_back(parsed[c]);
      } else {
        t.columns[c].labels.push_back(row[c]);
      }
    }
    ++t.rows;
  }
  if (dropped != nullptr) *dropped = skipped;
  return t;
}

double Wasserstein1D(std::span<const double> a, std::span<const double> b) {
  Require(!a.empty() && !b.empty(), "wasserstein: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<double> all;
  all.reserve(sa.size() + sb.size());
  std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(all));
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  double total = 0.0;
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    while (ia < sa.size() && sa[ia] <= all[i]) ++ia;
    while (ib < sb.size() && sb[ib] <= all[i]) ++ib;
    const double width = all[i + 1] - all[i];
    if (width > 0.0) {
      total += std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb) *
               width;
    }
  }
  return total;
}

double ScaledWasserstein(std::span<const double> a, std::span<const double> b) {
  Require(!a.empty() && !b.empty(), "wasserstein: empty sample");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin);
  const double hi = std::max(*amax, *bmax);
  if (!(hi > lo)) return 0.0;
  std::vector<double> sa(a.size()), sb(b.size());
  std::transform(a.begin(), a.end(), sa.begin(),
                 [&](double v) { return (v - lo) / (hi - lo); });
  std::transform(b.begin(), b.end(), sb.begin(),
                 [&](double v) { return (v - lo) / (hi - lo); });
  return Wasserstein1D(sa, sb);
}

double JensenShannon(const CategoryCounts& a, const CategoryCounts& b) {
  double ta = 0.0, tb = 0.0;
  for (const auto& [k, v] : a) {
    Require(v >= 0.0, "jsd: negative count");
    ta += v;
  }
  for (const auto& [k, v] : b) {
    Require(v >= 0.0, "jsd: negative count");
    tb += v;
  }
  Require(ta > 0.0 || tb > 0.0, "jsd: both histograms are empty");
  Require(ta > 0.0 && tb > 0.0, "jsd: one histogram is empty");
  std::set<std::string> support;
  for (const auto& [k, v] : a) support.insert(k);
  for (const auto& [k, v] : b) support.insert(k);
  double js = 0.0;
  for (const std::string& k : support) {
    const double p = a.contains(k) ? a.at(k) / ta : 0.0;
    const double q = b.contains(k) ? b.at(k) / tb : 0.0;
    const double m = 0.5 * (p + q);
    if (p > 0.0) js += 0.5 * p * std::log2(p / m);
    if (q > 0.0) js += 0.5 * q * std::log2(q / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

CategoryCounts CountLabels(std::span<const std::string> labels) {
  CategoryCounts counts;
  for (const std::string& l : labels) counts[l] += 1.0;
  return counts;
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  Require(x.size() == y.size() && !x.empty(), "pearson: size mismatch");
  const double mx = Mean(x), my = Mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double CramersV(std::span<const std::string> x, std::span<const std::string> y) {
  Require(x.size() == y.size() && !x.empty(), "cramers_v: size mismatch");
  std::map<std::string, std::size_t> xi, yi;
  for (const auto& v : x) xi.emplace(v, xi.size());
  for (const auto& v : y) yi.emplace(v, yi.size());
  if (xi.size() < 2 || yi.size() < 2) return 0.0;
  Matrix table = Matrix::Zero(static_cast<Eigen::Index>(xi.size()),
                              static_cast<Eigen::Index>(yi.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    table(static_cast<Eigen::Index>(xi[x[i]]), static_cast<Eigen::Index>(yi[y[i]])) += 1.0;
  }
  const double n = static_cast<double>(x.size());
  const Eigen::VectorXd rows = table.rowwise().sum();
  const Eigen::RowVectorXd cols = table.colwise().sum();
  double chi2 = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      const double expected = rows(i) * cols(j) / n;
      const double d = table(i, j) - expected;
      chi2 += d * d / expected;
    }
  }
  const double k = static_cast<double>(std::min(xi.size(), yi.size())) - 1.0;
  return std::clamp(std::sqrt(chi2 / (n * k)), 0.0, 1.0);
}

double CorrelationRatio(std::span<const std::string> groups,
                        std::span<const double> values) {
  Require(groups.size() == values.size() && !values.empty(),
          "correlation_ratio: size mismatch");
  const double mean = Mean(values);
  std::map<std::string, std::pair<double, double>> stats;  // sum, count
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& s = stats[groups[i]];
    s.first += values[i];
    s.second += 1.0;
    total += (values[i] - mean) * (values[i] - mean);
  }
  if (total <= 0.0) return 0.0;
  double between = 0.0;
  for (const auto& [g, s] : stats) {
    const double gm = s.first / s.second;
    between += s.second * (gm - mean) * (gm - mean);
  }
  return std::clamp(std::sqrt(between / total), 0.0, 1.0);
}

Matrix AssociationMatrix(const TypedTable& t, std::vector<std::string>* warnings) {
  const std::size_t n = t.schema.size();
  Matrix m = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (warnings != nullptr) {
    for (std::size_t c = 0; c < n; ++c) {
      if (!IsNumeric(t.schema.columns[c].kind) || t.rows == 0) continue;
      const auto& v = t.columns[c].values;
      if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) {
        warnings->push_back("column '" + t.schema.columns[c].name +
                            "' is constant; its correlations are set to 0");
      }
    }
  }
  if (t.rows == 0) return m;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool ni = IsNumeric(t.schema.columns[i].kind);
      const bool nj = IsNumeric(t.schema.columns[j].kind);
      double v;
      if (ni && nj) {
        v = Pearson(t.columns[i].values, t.columns[j].values);
      } else if (!ni && !nj) {
        v = CramersV(t.columns[i].labels, t.columns[j].labels);
      } else if (ni) {
        v = CorrelationRatio(t.columns[j].labels, t.columns[i].values);
      } else {
        v = CorrelationRatio(t.columns[i].labels, t.columns[j].values);
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return m;
}

double DiffCorr(const TypedTable& real, const TypedTable& synth,
                std::vector<std::string>* warnings) {
  Require(real.schema.size() >= 2, "diff_corr: needs at least two columns");
  Require(real.schema.size() == synth.schema.size(), "diff_corr: schema mismatch");
  Matrix d = AssociationMatrix(real, warnings) - AssociationMatrix(synth, warnings);
  d.diagonal().setZero();
  return d.norm();
}

Matrix LogisticModel::Probabilities(const Matrix& x) const {
  Matrix logits = (x * weights).rowwise() + bias.row(0);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - mx).exp().matrix();
    logits.row(r) /= logits.row(r).sum();
  }
  return logits;
}

LogisticModel FitLogistic(const Matrix& x, std::span<const std::size_t> labels,
                          std::size_t classes, const LogisticOptions& options) {
  Require(static_cast<std::size_t>(x.rows()) == labels.size() && x.rows() > 0,
          "logistic: label count does not match rows");
  Require(x.cols() > 0, "logistic: no features");
  const auto k = static_cast<Eigen::Index>(classes);
  LogisticModel m{Matrix::Zero(x.cols(), k), Matrix::Zero(1, k)};
  Matrix onehot = Matrix::Zero(x.rows(), k);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    onehot(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(labels[r])) = 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const Matrix residual = m.Probabilities(x) - onehot;
    const Matrix gw = inv_n * (x.transpose() * residual) + options.l2 * m.weights;
    const Matrix gb = inv_n * residual.colwise().sum();
    m.weights -= options.learning_rate * gw;
    m.bias -= options.learning_rate * gb;
  }
  return m;
}

Eigen::VectorXd RidgeModel::Predict(const Matrix& x) const {
  return (x * coef).array() + intercept;
}

RidgeModel FitRidge(const Matrix& x, std::span<const double> y,
                    double regularization) {
  Require(x.cols() > 0, "ridge: no features");
  Require(static_cast<std::size_t>(x.rows()) == y.size() && x.rows() > 0,
          "ridge: target length does not match rows");
  Require(regularization >= 0.0, "ridge: negative regularization");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Matrix centred = x.rowwise() - mean;
  Eigen::RowVectorXd scale =
      (centred.array().square().colwise().sum() / static_cast<double>(x.rows()))
          .sqrt();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale(j) > 0.0)) scale(j) = 1.0;
  }
  const Matrix z = centred.array().rowwise() / scale.array();
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const double ymean = yv.mean();
  const Eigen::MatrixXd gram =
      z.transpose() * z +
      regularization * Eigen::MatrixXd::Identity(z.cols(), z.cols());
  const Eigen::VectorXd beta =
      gram.ldlt().solve(z.transpose() * (yv.array() - ymean).matrix());
  RidgeModel m;
  m.coef = beta.array() / scale.transpose().array();
  m.intercept = ymean - mean.dot(m.coef);
  return m;
}

double RocAuc(std::span<const double> scores, std::span<const bool> positive) {
  Require(scores.size() == positive.size(), "auc: size mismatch");
  const std::vector<double> ranks = Ranks(scores);
  double pos = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (positive[i]) {
      pos += 1.0;
      rank_sum += ranks[i];
    }
  }
  const double neg = static_cast<double>(scores.size()) - pos;
  if (pos == 0.0 || neg == 0.0) return 0.5;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

ClassificationScores ScoreClassifier(const Matrix& probs,
                                     std::span<const std::size_t> labels) {
  const auto n = static_cast<std::size_t>(probs.rows());
  const auto k = static_cast<std::size_t>(probs.cols());
  Require(n == labels.size() && n > 0, "score: label count does not match rows");
  std::vector<std::size_t> predicted(n);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < n; ++r) {
    Eigen::Index best;
    probs.row(static_cast<Eigen::Index>(r)).maxCoeff(&best);
    predicted[r] = static_cast<std::size_t>(best);
    if (predicted[r] == labels[r]) ++correct;
  }
  ClassificationScores s;
  s.accuracy = static_cast<double>(correct) / static_cast<double>(n);

  auto auc_for = [&](std::size_t cls) {
    std::vector<double> scores(n);
    std::unique_ptr<bool[]> pos(new bool[n]);
    for (std::size_t r = 0; r < n; ++r) {
      scores[r] = probs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cls));
      pos[r] = labels[r] == cls;
    }
    return RocAuc(scores, std::span<const bool>(pos.get(), n));
  };
  if (k == 2) {
    s.auc = auc_for(1);
  } else {
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += auc_for(c);
    s.auc = sum / static_cast<double>(k);
  }

  double f1_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (predicted[r] == c && labels[r] == c) tp += 1;
      if (predicted[r] == c && labels[r] != c) fp += 1;
      if (predicted[r] != c && labels[r] == c) fn += 1;
    }
    f1_sum += (tp == 0) ? 0.0 : 2 * tp / (2 * tp + fp + fn);
  }
  s.macro_f1 = f1_sum / static_cast<double>(k);
  return s;
}

RegressionScores ScoreRegressor(std::span<const double> predicted,
                                std::span<const double> actual) {
  Require(predicted.size() == actual.size() && !actual.empty(),
          "score: size mismatch");
  const double n = static_cast<double>(actual.size());
  const double ymean = Mean(actual);
  double abs_err = 0.0, ss_res = 0.0, ss_tot = 0.0, err_mean = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    abs_err += std::abs(e);
    ss_res += e * e;
    ss_tot += (actual[i] - ymean) * (actual[i] - ymean);
    err_mean += e;
  }
  err_mean /= n;
  double err_var = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i] - err_mean;
    err_var += e * e;
  }
  RegressionScores s;
  s.mae = abs_err / n;
  if (ss_tot > 0.0) {
    s.r2 = 1.0 - ss_res / ss_tot;
    s.evs = 1.0 - err_var / ss_tot;
  }
  return s;
}

ClassificationDiffs TstrClassify(const TypedTable& real_train,
                                 const TypedTable& real_test,
                                 const TypedTable& synth, std::size_t target) {
  Require(target < real_train.schema.size() &&
              real_train.schema.columns[target].kind == ColumnKind::kCategorical,
          "tstr_classify: target must be a categorical column");
  Require(synth.rows > 0, "tstr_classify: synthetic table is empty");
  const auto& train_labels = real_train.columns[target].labels;
  std::set<std::string> class_set(train_labels.begin(), train_labels.end());
  const std::vector<std::string> classes(class_set.begin(), class_set.end());

  FeatureMap features(real_train, target);
  auto prepare = [&](const TypedTable& t, std::vector<std::size_t>* labels) {
    std::vector<std::size_t> keep;
    *labels = ClassIndices(t.columns[target].labels, classes, &keep);
    return features.Apply(t.Subset(keep));
  };
  std::vector<std::size_t> y_train, y_synth, y_test;
  const Matrix x_train = prepare(real_train, &y_train);
  const Matrix x_synth = prepare(synth, &y_synth);
  const Matrix x_test = prepare(real_test, &y_test);
  RequireTwoClasses(y_train, "real");
  RequireTwoClasses(y_synth, "synthetic");
  Require(!y_test.empty(), "tstr_classify: empty test set");

  const LogisticModel real_model = FitLogistic(x_train, y_train, classes.size());
  const LogisticModel synth_model = FitLogistic(x_synth, y_synth, classes.size());
  ClassificationDiffs d;
  d.real = ScoreClassifier(real_model.Probabilities(x_test), y_test);
  d.synth = ScoreClassifier(synth_model.Probabilities(x_test), y_test);
  d.accuracy_pp = 100.0 * std::abs(d.real.accuracy - d.synth.accuracy);
  d.auc = std::abs(d.real.auc - d.synth.auc);
  d.macro_f1 = std::abs(d.real.macro_f1 - d.synth.macro_f1);
  return d;
}

RegressionDiffs TstrRegress(const TypedTable& real_train,
                            const TypedTable& real_test,
                            const TypedTable& synth, std::size_t target,
                            double regularization) {
  Require(target < real_train.schema.size() &&
              IsNumeric(real_train.schema.columns[target].kind),
          "tstr_regress: target must be numeric");
  Require(synth.rows > 0 && real_train.rows > 0 && real_test.rows > 0,
          "tstr_regress: empty table");
  FeatureMap features(real_train, target);
  const Matrix x_train = features.Apply(real_train);
  const Matrix x_synth = features.Apply(synth);
  const Matrix x_test = features.Apply(real_test);
  const RidgeModel real_model =
      FitRidge(x_train, real_train.columns[target].values, regularization);
  const RidgeModel synth_model =
      FitRidge(x_synth, synth.columns[target].values, regularization);
  const Eigen::VectorXd p_real = real_model.Predict(x_test);
  const Eigen::VectorXd p_synth = synth_model.Predict(x_test);
  const auto& y = real_test.columns[target].values;
  RegressionDiffs d;
  d.real = ScoreRegressor(std::span<const double>(p_real.data(), y.size()), y);
  d.synth = ScoreRegressor(std::span<const double>(p_synth.data(), y.size()), y);
  d.mae = std::abs(d.real.mae - d.synth.mae);
  d.evs = std::abs(d.real.evs - d.synth.evs);
  d.r2 = std::abs(d.real.r2 - d.synth.r2);
  return d;
}

std::vector<double> NearestDistances(const Tensor& records, const Tensor& synth) {
  Require(synth.rows() > 0, "mia: synthetic set is empty");
  Require(records.cols() == synth.cols(), "mia: record width mismatch");
  std::vector<double> out(records.rows());
  for (std::size_t r = 0; r < records.rows(); ++r) {
    const auto row = records.mat().row(static_cast<Eigen::Index>(r));
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s < synth.mat().rows(); ++s) {
      best = std::min(best, (synth.mat().row(s) - row).squaredNorm());
    }
    out[r] = std::sqrt(best);
  }
  return out;
}

MiaResult MembershipAttack(const Tensor& members, const Tensor& nonmembers,
                           const Tensor& synth) {
  Require(members.rows() >= 1 && members.rows() == nonmembers.rows(),
          "mia: members and nonmembers must be non-empty and equal in size");
  const std::vector<double> dm = NearestDistances(members, synth);
  const std::vector<double> dn = NearestDistances(nonmembers, synth);

  struct Scored {
    double distance;
    bool member;
  };
  std::vector<Scored> all;
  for (double d : dm) all.push_back({d, true});
  for (double d : dn) all.push_back({d, false});
  std::sort(all.begin(), all.end(),
            [](const Scored& a, const Scored& b) { return a.distance < b.distance; });

  const double m = static_cast<double>(dm.size());
  const double n = static_cast<double>(dn.size());
  MiaResult best{0.5, -std::numeric_limits<double>::infinity()};
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    for (; j < all.size() && all[j].distance == all[i].distance; ++j) {
      (all[j].member ? tp : fp) += 1.0;
    }
    const double acc = 0.5 * (tp / m + (n - fp) / n);
    if (acc > best.accuracy) best = {acc, all[i].distance};
    i = j;
  }
  return best;
}

double EvalReport::TotalWd() const {
  double total = 0.0;
  for (const ColumnMetric& c : columns) {
    if (c.is_wd) total += c.value;
  }
  return total;
}

std::vector<ColumnMetric> ColumnMetrics(const TypedTable& real,
                                        const TypedTable& synth) {
  Require(real.schema.size() == synth.schema.size(), "eval: schema mismatch");
  std::vector<ColumnMetric> out;
  for (std::size_t c = 0; c < real.schema.size(); ++c) {
    const ColumnSpec& spec = real.schema.columns[c];
    ColumnMetric m;
    m.name = spec.name;
    m.kind = spec.kind;
    if (spec.kind == ColumnKind::kCategorical) {
      m.is_wd = false;
      m.value = JensenShannon(CountLabels(real.columns[c].labels),
                              CountLabels(synth.columns[c].labels));
    } else if (spec.kind == ColumnKind::kMixed) {
      // Continuous part to WD, singular-vs-continuous indicator to JSD.
      auto split = [&](const std::vector<double>& v, std::vector<double>* cont) {
        CategoryCounts ind;
        for (double x : v) {
          if (IsSingularValue(spec, x)) {
            ind["singular"] += 1.0;
          } else {
            ind["continuous"] += 1.0;
            cont->push_back(x);
          }
        }
        return ind;
      };
      std::vector<double> ra, sa;
      const CategoryCounts ri = split(real.columns[c].values, &ra);
      const CategoryCounts si = split(synth.columns[c].values, &sa);
      if (ra.empty() && sa.empty()) {
        m.value = 0.0;
      } else if (ra.empty() || sa.empty()) {
        m.value = 1.0;
      } else {
        m.value = ScaledWasserstein(ra, sa);
      }
      m.indicator_jsd = JensenShannon(ri, si);
    } else {
      m.value = ScaledWasserstein(real.columns[c].values, synth.columns[c].values);
    }
    out.push_back(std::move(m));
  }
  return out;
}

EvalReport Evaluate(const TypedTable& real, const TypedTable& synth,
                    std::uint64_t seed) {
  Require(real.rows > 0, "eval: real table is empty");
  Require(synth.rows > 0, "eval: synthetic table is empty");
  EvalReport report;
  report.columns = ColumnMetrics(real, synth);
  if (real.schema.size() >= 2) {
    report.diff_corr = DiffCorr(real, synth, &report.warnings);
  }
  if (auto target = real.schema.TargetIndex()) {
    std::vector<std::size_t> order(real.rows);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.UniformInt(i)]);
    }
    const std::size_t n_train = (real.rows * 4) / 5;
    const TypedTable train =
        real.Subset(std::span<const std::size_t>(order.data(), n_train));
    const TypedTable test = real.Subset(
        std::span<const std::size_t>(order.data() + n_train, order.size() - n_train));
    if (real.schema.columns[*target].kind == ColumnKind::kCategorical) {
      report.classification = TstrClassify(train, test, synth, *target);
    } else {
      report.regression = TstrRegress(train, test, synth, *target);
    }
  }
  return report;
}

}  // namespace dptab
