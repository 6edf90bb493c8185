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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "dptab/error.h"
#include "dptab/eval.h"
#include "dptab/rng.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dptab {
namespace {

TypedTable NumericTable(const std::vector<std::vector<double>>& cols,
                        std::size_t target = SIZE_MAX) {
  TypedTable t;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    ColumnSpec s;
    s.name = "c" + std::to_string(c);
    s.kind = ColumnKind::kContinuous;
    s.is_target = c == target;
    t.schema.columns.push_back(s);
    t.columns.push_back({cols[c], {}});
  }
  t.rows = cols.empty() ? 0 : cols[0].size();
  return t;
}

TEST(WassersteinTest, Examples) {
  const std::vector<double> a = {0, 1}, b = {0.5, 1.5};
  EXPECT_EQ(Wasserstein1D(a, a), 0.0);
  EXPECT_NEAR(Wasserstein1D(a, b), 0.5, 1e-15);
  const std::vector<double> zero = {0, 0, 0}, one = {1, 1};
  EXPECT_EQ(Wasserstein1D(zero, one), 1.0);
  EXPECT_EQ(ScaledWasserstein(zero, one), 1.0);
}

TEST(WassersteinTest, RejectsEmpty) {
  const std::vector<double> a = {1}, none;
  EXPECT_THROW(Wasserstein1D(a, none), Error);
}

TEST(WassersteinTest, MetricProperties) {
  Rng rng(1);
  auto draw = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.Normal(rng.Uniform() * 3, 1 + rng.Uniform());
    return v;
  };
  for (int i = 0; i < 200; ++i) {
    const auto a = draw(1 + rng.UniformInt(30));
    const auto b = draw(1 + rng.UniformInt(30));
    const auto c = draw(1 + rng.UniformInt(30));
    const double ab = Wasserstein1D(a, b), ba = Wasserstein1D(b, a);
    EXPECT_NEAR(ab, ba, 1e-12);
    EXPECT_GT(ab, 0.0);
    EXPECT_LE(ab, Wasserstein1D(a, c) + Wasserstein1D(c, b) + 1e-9);
    auto shuffled = a;
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(Wasserstein1D(a, shuffled), 0.0);
  }
}

TEST(JensenShannonTest, Examples) {
  const CategoryCounts ab = {{"a", 1}, {"b", 1}}, a = {{"a", 1}}, b = {{"b", 4}};
  EXPECT_EQ(JensenShannon(ab, ab), 0.0);
  EXPECT_NEAR(JensenShannon(a, b), 1.0, 1e-15);
  EXPECT_NEAR(JensenShannon(ab, a), 0.3113, 1e-4);
  EXPECT_THROW(JensenShannon({}, {}), Error);
}

TEST(JensenShannonTest, SymmetricAndBounded) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    CategoryCounts p, q;
    for (const char* k : {"x", "y", "z", "w"}) {
      if (rng.Uniform() < 0.8) p[k] = static_cast<double>(rng.UniformInt(10));
      if (rng.Uniform() < 0.8) q[k] = static_cast<double>(rng.UniformInt(10));
    }
    p["x"] += 1;
    q["y"] += 1;
    const double pq = JensenShannon(p, q);
    EXPECT_NEAR(pq, JensenShannon(q, p), 1e-15);
    EXPECT_GE(pq, 0.0);
    EXPECT_LE(pq, 1.0);
    CategoryCounts scaled = p;
    for (auto& [k, v] : scaled) v *= 3;
    EXPECT_NEAR(JensenShannon(p, scaled), 0.0, 1e-15);
  }
}

TEST(DiffCorrTest, SelfIsZero) {
  const auto rows = testing_util::ToyTable(300, 3);
  const TypedTable t = ToTyped(rows, testing_util::ToySchema(), nullptr);
  EXPECT_EQ(DiffCorr(t, t), 0.0);
}

TEST(DiffCorrTest, IndependentVersusPerfectlyCorrelated) {
  Rng rng(4);
  const std::size_t n = 10000;
  std::vector<double> u(n), v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = rng.Uniform();
    v[i] = rng.Uniform();
    w[i] = 2.0 * u[i] + 1.0;
  }
  EXPECT_NEAR(DiffCorr(NumericTable({u, v}), NumericTable({u, w})), std::sqrt(2.0), 0.05);
}

TEST(DiffCorrTest, IdenticalCrosstabIsZero) {
  TypedTable t;
  for (const char* name : {"p", "q"}) {
    ColumnSpec s;
    s.name = name;
    s.kind = ColumnKind::kCategorical;
    t.schema.columns.push_back(s);
  }
  t.columns = {{{}, {"a", "a", "b", "b", "a"}}, {{}, {"x", "y", "y", "y", "x"}}};
  t.rows = 5;
  TypedTable u = t;
  std::reverse(u.columns[0].labels.begin(), u.columns[0].labels.end());
  std::reverse(u.columns[1].labels.begin(), u.columns[1].labels.end());
  EXPECT_NEAR(DiffCorr(t, u), 0.0, 1e-15);
}

TEST(DiffCorrTest, ConstantColumnWarnsAndCountsAsZero) {
  const std::vector<double> c(50, 1.0);
  std::vector<double> x(50);
  std::iota(x.begin(), x.end(), 0.0);
  std::vector<std::string> warnings;
  const Matrix m = AssociationMatrix(NumericTable({c, x}), &warnings);
  EXPECT_EQ(m(0, 1), 0.0);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(AssociationTest, KnownValues) {
  const std::vector<std::string> g = {"a", "a", "b", "b"};
  const std::vector<double> v = {1, 1, 3, 3};
  EXPECT_NEAR(CorrelationRatio(g, v), 1.0, 1e-12);
  const std::vector<std::string> h = {"x", "x", "y", "y"};
  EXPECT_NEAR(CramersV(g, h), 1.0, 1e-12);
  const std::vector<double> a = {1, 2, 3}, b = {3, 2, 1};
  EXPECT_NEAR(Pearson(a, b), -1.0, 1e-12);
}

// Two well separated classes in one feature.
TypedTable SeparableTable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  TypedTable t;
  ColumnSpec x;
  x.name = "x";
  ColumnSpec y;
  y.name = "y";
  y.kind = ColumnKind::kCategorical;
  y.is_target = true;
  t.schema.columns = {x, y};
  t.columns.resize(2);
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = rng.Uniform() < 0.5;
    t.columns[0].values.push_back(rng.Normal(pos ? 3.0 : -3.0, 0.5));
    t.columns[1].labels.push_back(pos ? "yes" : "no");
  }
  t.rows = n;
  return t;
}

TEST(TstrClassifyTest, IdenticalTrainingSetsGiveZeroDiffs) {
  const TypedTable train = SeparableTable(300, 1), test = SeparableTable(100, 2);
  const ClassificationDiffs d = TstrClassify(train, test, train, 1);
  EXPECT_NEAR(d.accuracy_pp, 0.0, 1e-6);
  EXPECT_NEAR(d.auc, 0.0, 1e-6);
  EXPECT_NEAR(d.macro_f1, 0.0, 1e-6);
}

TEST(TstrClassifyTest, ShuffledLabelsLoseHalfTheAccuracy) {
  double total = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const TypedTable train = SeparableTable(400, 10 + s), test = SeparableTable(400, 50 + s);
    TypedTable synth = train;
    Rng rng(90 + s);
    auto& labels = synth.columns[1].labels;
    for (std::size_t i = labels.size(); i > 1; --i) {
      std::swap(labels[i - 1], labels[rng.UniformInt(i)]);
    }
    total += TstrClassify(train, test, synth, 1).accuracy_pp;
  }
  EXPECT_NEAR(total / seeds, 50.0, 5.0);
}

TEST(TstrClassifyTest, SingleClassTrainingIsRejected) {
  TypedTable train = SeparableTable(50, 1);
  for (auto& l : train.columns[1].labels) l = "yes";
  EXPECT_THROW(TstrClassify(train, SeparableTable(20, 2), train, 1), Error);
}

TEST(RidgeTest, UnregularizedLineIsExact) {
  const Matrix x = (Matrix(3, 1) << 1, 2, 3).finished();
  const std::vector<double> y = {1, 2, 3};
  const RidgeModel m = FitRidge(x, y, 0.0);
  EXPECT_NEAR(m.coef(0), 1.0, 1e-12);
  EXPECT_NEAR(m.intercept, 0.0, 1e-12);
  const Eigen::VectorXd p = m.Predict(x);
  EXPECT_NEAR(ScoreRegressor(std::span<const double>(p.data(), 3), y).r2, 1.0, 1e-12);
}

TEST(RidgeTest, RejectsEmptyFeatures) {
  EXPECT_THROW(FitRidge(Matrix(3, 0), std::vector<double>{1, 2, 3}), Error);
}

TypedTable LinearTable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> a(n), b(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.Normal();
    b[i] = rng.Normal();
    y[i] = 2 * a[i] - b[i] + 0.3 * rng.Normal();
  }
  return NumericTable({a, b, y}, 2);
}

TEST(TstrRegressTest, IdenticalTrainingSetsGiveZeroDiffs) {
  const TypedTable train = LinearTable(200, 1), test = LinearTable(80, 2);
  const RegressionDiffs d = TstrRegress(train, test, train, 2);
  EXPECT_EQ(d.mae, 0.0);
  EXPECT_EQ(d.evs, 0.0);
  EXPECT_EQ(d.r2, 0.0);
}

TEST(TstrRegressTest, MeanOnlySyntheticModelLosesAllExplainedVariance) {
  const TypedTable train = LinearTable(200, 3), test = LinearTable(80, 4);
  const auto& yt = test.columns[2].values;
  const double mean = std::accumulate(yt.begin(), yt.end(), 0.0) / yt.size();
  TypedTable synth = train;
  std::fill(synth.columns[2].values.begin(), synth.columns[2].values.end(), mean);
  const RegressionDiffs d = TstrRegress(train, test, synth, 2);
  EXPECT_NEAR(d.r2, d.real.r2, 1e-9);
}

Tensor Rows(const std::vector<std::vector<double>>& rows) {
  Tensor t(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) t(r, c) = rows[r][c];
  }
  return t;
}

Tensor Gaussian(std::size_t n, std::size_t d, Rng& rng) {
  Tensor t(n, d);
  for (double& v : t.values()) v = rng.Normal();
  return t;
}

TEST(MembershipTest, CopiedMembersAreExposed) {
  Rng rng(5);
  const Tensor members = Gaussian(200, 3, rng), nonmembers = Gaussian(200, 3, rng);
  EXPECT_GE(MembershipAttack(members, nonmembers, members).accuracy, 0.95);
}

TEST(MembershipTest, IndependentSetsGiveChance) {
  double total = 0.0;
  for (int s = 0; s < 10; ++s) {
    Rng rng(100 + s);
    const Tensor synth = Gaussian(500, 3, rng), members = Gaussian(500, 3, rng),
                 nonmembers = Gaussian(500, 3, rng);
    const double acc = MembershipAttack(members, nonmembers, synth).accuracy;
    EXPECT_GE(acc, 0.5);
    total += acc;
  }
  EXPECT_NEAR(total / 10, 0.5, 0.05);
}

TEST(MembershipTest, TrivialPair) {
  const Tensor member = Rows({{1, 1}}), far = Rows({{100, -100}});
  EXPECT_EQ(MembershipAttack(member, far, member).accuracy, 1.0);
}

TEST(MembershipTest, RejectsBadInputs) {
  const Tensor a = Rows({{1, 1}}), b = Rows({{0, 0}, {2, 2}});
  EXPECT_THROW(MembershipAttack(a, b, b), Error);
  EXPECT_THROW(MembershipAttack(a, a, Tensor(0, 2)), Error);
}

TEST(EvaluateTest, RealAgainstItself) {
  const auto rows = testing_util::ToyTable(500, 6);
  const TypedTable t = ToTyped(rows, testing_util::ToySchema(), nullptr);
  const EvalReport r = Evaluate(t, t, 1);
  ASSERT_EQ(r.columns.size(), 2u);
  EXPECT_EQ(r.columns[0].name, "X");
  EXPECT_TRUE(r.columns[0].is_wd);
  EXPECT_EQ(r.columns[0].value, 0.0);
  EXPECT_FALSE(r.columns[1].is_wd);
  EXPECT_EQ(r.columns[1].value, 0.0);
  EXPECT_EQ(r.diff_corr, 0.0);
  ASSERT_TRUE(r.classification.has_value());
  EXPECT_LT(r.classification->accuracy_pp, 5.0);
}

TEST(EvaluateTest, EveryColumnReportedOnce) {
  TableSchema s;
  for (auto [name, kind] : {std::pair{"x", ColumnKind::kContinuous},
                            std::pair{"m", ColumnKind::kMixed},
                            std::pair{"l", ColumnKind::kLongtail},
                            std::pair{"c", ColumnKind::kCategorical}}) {
    ColumnSpec c;
    c.name = name;
    c.kind = kind;
    if (kind == ColumnKind::kMixed) c.singular_values = {0.0};
    s.columns.push_back(c);
  }
  Rng rng(7);
  StringGrid rows;
  for (int i = 0; i < 200; ++i) {
    rows.push_back({FormatDouble(rng.Normal()),
                    rng.Uniform() < 0.3 ? "0" : FormatDouble(rng.Normal(9, 1)),
                    FormatDouble(std::exp(rng.Normal())), rng.Uniform() < 0.5 ? "u" : "v"});
  }
  const TypedTable t = ToTyped(rows, s, nullptr);
  const EvalReport r = Evaluate(t, t, 3);
  ASSERT_EQ(r.columns.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(r.columns[i].name, s.columns[i].name);
  EXPECT_TRUE(r.columns[1].indicator_jsd.has_value());
  EXPECT_FALSE(r.columns[3].is_wd);
}

TEST(ToTypedTest, DropsUnparseableNumericRows) {
  std::size_t dropped = 0;
  const TypedTable t =
      ToTyped({{"1", "a"}, {"x", "b"}, {"2", "b"}}, testing_util::ToySchema(), &dropped);
  EXPECT_EQ(t.rows, 2u);
  EXPECT_EQ(dropped, 1u);
}

}  // namespace
}  // namespace dptab
