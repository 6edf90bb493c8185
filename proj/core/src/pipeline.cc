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

#include "dptab/pipeline.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

#include "dptab/checkpoint.h"
#include "dptab/codec.h"
#include "dptab/eval.h"
#include "json_util.h"
#include "serialize.h"

namespace dptab {
namespace {

using internal::Json;
constexpr ErrorCode kCfg = ErrorCode::kConfig;

Json Num(double v) { return Json(Round6(v)); }

Json EpsilonField(const PrivacyLedger& ledger) {
  if (!ledger.is_private()) return "NON-PRIVATE";
  if (ledger.updates() == 0) return Json(nullptr);
  return Num(ledger.Epsilon().epsilon);
}

std::string Finish(const Json& report, const std::string& path) {
  std::string text = report.dump(2) + "\n";
  if (!path.empty()) WriteFileAtomic(path, text);
  return text;
}

std::string Pick(const std::string& flag, const std::string& configured,
                 const char* what) {
  const std::string& p = flag.empty() ? configured : flag;
  if (p.empty()) Fail(kCfg, std::string("no ") + what + " path configured");
  return p;
}

std::uint64_t SeedOf(const RunConfig& config, const Overrides& o) {
  return o.seed.value_or(config.seed);
}

// Stream for sampling; kept apart from the training streams so that
// sampling from a loaded checkpoint matches sampling right after fit.
Rng SampleRng(std::uint64_t seed) { return Rng(seed ^ 0x73616d706c65ULL); }

StringGrid ReadTable(const std::string& path, const TableSchema& schema) {
  return SelectColumns(ReadCsvFile(path), schema);
}

CsvTable WithHeader(const TableSchema& schema, StringGrid rows) {
  CsvTable t;
  for (const ColumnSpec& c : schema.columns) t.header.push_back(c.name);
  t.rows = std::move(rows);
  return t;
}

Json LedgerJson(const PrivacyLedger& ledger) {
  Json j;
  j["epsilon"] = EpsilonField(ledger);
  j["delta"] = Num(ledger.delta());
  j["T"] = ledger.updates();
  j["sigma"] = Num(ledger.config().sigma);
  if (ledger.is_private() && ledger.updates() > 0) {
    j["order"] = ledger.Epsilon().order;
  }
  return j;
}

Json ScoresJson(const ClassificationScores& s) {
  return {{"accuracy", Num(s.accuracy)}, {"auc", Num(s.auc)},
          {"macro_f1", Num(s.macro_f1)}};
}

Json ScoresJson(const RegressionScores& s) {
  return {{"mae", Num(s.mae)}, {"evs", Num(s.evs)}, {"r2", Num(s.r2)}};
}

Tensor EncodeAll(const StringGrid& rows, const CodecState& codec,
                 const char* what) {
  std::size_t dropped = 0;
  Tensor t = EncodeRows(rows, codec, &dropped);
  if (dropped != 0) {
    Fail(ErrorCode::kData, std::string(what) + ": " + std::to_string(dropped) +
                               " rows cannot be encoded with the checkpoint codec");
  }
  return t;
}

}  // namespace

double Round6(double value) {
  double out = 0.0;
  ParseDouble(FormatDouble(value, 6), &out);
  return out;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kData:
      return 3;
    case ErrorCode::kIntegrity:
      return 4;
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kNonPrivate:
      return 2;
  }
  return 2;
}

RunConfig ParseRunConfig(std::string_view json_text) {
  using internal::CheckKeys;
  using internal::Get;
  using internal::GetOr;
  const Json j = internal::ParseJson(json_text, kCfg, "config");
  CheckKeys(j, {"schema", "hyper", "privacy", "io", "seed"}, "config", kCfg);
  RunConfig c;
  if (!j.contains("seed")) Fail(kCfg, "config: missing key 'seed'");
  c.seed = Get<std::uint64_t>(j, "seed", "config", kCfg);
  if (!j.contains("schema")) Fail(kCfg, "config: missing key 'schema'");
  c.schema = ParseSchema(j.at("schema").dump());
  if (j.contains("hyper")) internal::HyperShapeFromJson(j.at("hyper"), c.hyper, kCfg);

  const Json p = j.value("privacy", Json::object());
  CheckKeys(p, {"sigma", "target_epsilon", "clip", "delta", "lambda_grid"},
            "privacy", kCfg);
  if (p.contains("sigma")) c.privacy.sigma = Get<double>(p, "sigma", "privacy", kCfg);
  if (p.contains("target_epsilon")) {
    c.privacy.target_epsilon = Get<double>(p, "target_epsilon", "privacy", kCfg);
  }
  if (c.privacy.sigma.has_value() == c.privacy.target_epsilon.has_value()) {
    Fail(kCfg, "privacy: exactly one of 'sigma' and 'target_epsilon' is required");
  }
  if (p.contains("clip") && p.at("clip").is_null()) {
    c.privacy.clip = std::numeric_limits<double>::infinity();
  } else {
    c.privacy.clip = GetOr<double>(p, "clip", 1.0, "privacy", kCfg);
  }
  c.privacy.delta = GetOr<double>(p, "delta", kDefaultDelta, "privacy", kCfg);
  if (p.contains("lambda_grid")) {
    c.privacy.lambda_grid = Get<std::vector<int>>(p, "lambda_grid", "privacy", kCfg);
  }
  if (c.privacy.sigma && !(*c.privacy.sigma >= 0.0 && std::isfinite(*c.privacy.sigma))) {
    Fail(kCfg, "privacy: sigma must be a non-negative number");
  }
  if (c.privacy.target_epsilon && !(*c.privacy.target_epsilon > 0.0)) {
    Fail(kCfg, "privacy: target_epsilon must be positive");
  }
  if (!(c.privacy.delta > 0.0 && c.privacy.delta < 1.0)) {
    Fail(kCfg, "privacy: delta must be in (0, 1)");
  }
  if (c.privacy.lambda_grid.empty()) Fail(kCfg, "privacy: empty lambda_grid");
  for (int l : c.privacy.lambda_grid) {
    if (l < 2) Fail(kCfg, "privacy: lambda_grid entries must be >= 2");
  }

  const Json io = j.value("io", Json::object());
  CheckKeys(io, {"input", "checkpoint", "synthetic", "report", "members",
                 "nonmembers", "encoded"},
            "io", kCfg);
  auto path = [&](const char* key) {
    if (!io.contains(key)) return std::string();
    std::string v = Get<std::string>(io, key, "io", kCfg);
    if (v.empty()) Fail(kCfg, std::string("io: '") + key + "' is empty");
    return v;
  };
  c.io.input = path("input");
  c.io.checkpoint = path("checkpoint");
  c.io.synthetic = path("synthetic");
  c.io.report = path("report");
  c.io.members = path("members");
  c.io.nonmembers = path("nonmembers");
  c.io.encoded = path("encoded");
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error& e) {
    Fail(kCfg, e.what());
  }
  return ParseRunConfig(text);
}

Hyper ResolveHyper(const RunConfig& config, const Overrides& overrides) {
  Hyper h = config.hyper;
  h.clip = config.privacy.clip;
  h.delta = config.privacy.delta;
  h.lambda_grid = config.privacy.lambda_grid;
  h.seed = SeedOf(config, overrides);
  h.os_entropy = overrides.os_entropy;
  if (config.privacy.sigma) {
    h.sigma = *config.privacy.sigma;
  } else {
    try {
      h.sigma = CalibrateSigma(*config.privacy.target_epsilon, h.delta, h.steps,
                               h.batch, h.lambda_grid);
    } catch (const Error& e) {
      Fail(kCfg, e.what());
    }
  }
  try {
    h.Validate();
    h.sanitizer().Validate();
  } catch (const Error& e) {
    Fail(kCfg, e.what());
  }
  return h;
}

StringGrid SelectColumns(const CsvTable& table, const TableSchema& schema) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (!position.emplace(table.header[i], i).second) {
      Fail(ErrorCode::kData, "csv: duplicate header '" + table.header[i] + "'");
    }
  }
  std::vector<std::size_t> pick;
  for (const ColumnSpec& c : schema.columns) {
    auto it = position.find(c.name);
    if (it == position.end()) {
      Fail(ErrorCode::kData, "csv: schema column '" + c.name + "' is missing");
    }
    pick.push_back(it->second);
  }
  StringGrid out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      Fail(ErrorCode::kData, "csv: record " + std::to_string(r + 1) + " has " +
                                 std::to_string(row.size()) + " fields, header has " +
                                 std::to_string(table.header.size()));
    }
    std::vector<std::string> picked;
    picked.reserve(pick.size());
    for (std::size_t i : pick) picked.push_back(row[i]);
    out.push_back(std::move(picked));
  }
  return out;
}

std::string RunFit(const RunConfig& config, const Overrides& overrides) {
  const auto start = std::chrono::steady_clock::now();
  const Hyper hyper = ResolveHyper(config, overrides);
  const std::string ckpt_path =
      Pick(overrides.checkpoint, config.io.checkpoint, "checkpoint");
  if (config.io.input.empty()) Fail(kCfg, "no input path configured");
  const StringGrid raw = ReadTable(config.io.input, config.schema);
  const Checkpoint ck = Fit(raw, config.schema, hyper);
  SaveCheckpoint(ckpt_path, ck);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json report = LedgerJson(ck.ledger);
  report["command"] = "fit";
  report["version"] = kVersion;
  report["steps"] = ck.step;
  report["clip"] = std::isfinite(hyper.clip) ? Num(hyper.clip) : Json(nullptr);
  report["batch"] = hyper.batch;
  if (config.privacy.target_epsilon) {
    report["target_epsilon"] = Num(*config.privacy.target_epsilon);
  }
  report["dropped_rows"] = ck.codec.dropped_rows;
  report["wall_time_s"] = Num(wall);
  report["checkpoint"] = ckpt_path;
  return Finish(report, config.io.report);
}

std::string RunSample(const std::optional<RunConfig>& config,
                      const Overrides& overrides) {
  const auto start = std::chrono::steady_clock::now();
  const std::string ckpt_path = Pick(
      overrides.checkpoint, config ? config->io.checkpoint : std::string(), "checkpoint");
  const std::string out_path = Pick(
      overrides.out, config ? config->io.synthetic : std::string(), "output");
  const Checkpoint ck = LoadCheckpoint(ckpt_path);
  std::size_t n = 0;
  if (overrides.n) {
    n = *overrides.n;
  } else {
    for (std::uint64_t c : ck.codec.frequency.at(0)) n += c;
  }
  if (n == 0) Fail(kCfg, "sample: --n must be positive");
  std::uint64_t seed = ck.hyper.seed;
  if (config) seed = config->seed;
  if (overrides.seed) seed = *overrides.seed;
  Rng rng = SampleRng(seed);
  WriteCsvFile(out_path, WithHeader(ck.codec.schema, Sample(ck, n, rng)));

  Json report = LedgerJson(ck.ledger);
  report["command"] = "sample";
  report["version"] = kVersion;
  report["rows"] = n;
  report["output"] = out_path;
  report["wall_time_s"] = Num(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return Finish(report, std::string());
}

std::string RunEvaluate(const RunConfig& config, const Overrides& overrides) {
  const auto start = std::chrono::steady_clock::now();
  if (config.io.input.empty()) Fail(kCfg, "no input path configured");
  if (config.io.synthetic.empty()) Fail(kCfg, "no synthetic path configured");
  std::size_t dropped_real = 0, dropped_synth = 0;
  const TypedTable real =
      ToTyped(ReadTable(config.io.input, config.schema), config.schema, &dropped_real);
  const TypedTable synth = ToTyped(ReadTable(config.io.synthetic, config.schema),
                                   config.schema, &dropped_synth);
  if (real.rows == 0 || synth.rows == 0) {
    Fail(ErrorCode::kData, "evaluate: a table is empty after dropping bad rows");
  }
  const EvalReport ev = Evaluate(real, synth, SeedOf(config, overrides));

  Json report;
  report["command"] = "evaluate";
  report["version"] = kVersion;
  const std::string ckpt_path =
      overrides.checkpoint.empty() ? config.io.checkpoint : overrides.checkpoint;
  if (!ckpt_path.empty()) {
    const Checkpoint ck = LoadCheckpoint(ckpt_path);
    report.update(LedgerJson(ck.ledger));
  } else {
    report["epsilon"] = nullptr;
  }
  Json cols = Json::array();
  for (const ColumnMetric& m : ev.columns) {
    Json c = {{"name", m.name},
              {"kind", ColumnKindName(m.kind)},
              {"metric", m.is_wd ? "wd" : "jsd"},
              {"value", Num(m.value)}};
    if (m.indicator_jsd) c["indicator_jsd"] = Num(*m.indicator_jsd);
    cols.push_back(std::move(c));
  }
  report["columns"] = std::move(cols);
  report["total_wd"] = Num(ev.TotalWd());
  report["diff_corr"] = Num(ev.diff_corr);
  if (ev.classification) {
    const auto& d = *ev.classification;
    report["classification"] = {{"accuracy_pp", Num(d.accuracy_pp)},
                                {"auc", Num(d.auc)},
                                {"macro_f1", Num(d.macro_f1)},
                                {"real", ScoresJson(d.real)},
                                {"synthetic", ScoresJson(d.synth)}};
  }
  if (ev.regression) {
    const auto& d = *ev.regression;
    report["regression"] = {{"mae", Num(d.mae)},
                            {"evs", Num(d.evs)},
                            {"r2", Num(d.r2)},
                            {"real", ScoresJson(d.real)},
                            {"synthetic", ScoresJson(d.synth)}};
  }
  report["dropped_rows"] = {{"real", dropped_real}, {"synthetic", dropped_synth}};
  report["warnings"] = ev.warnings;
  report["wall_time_s"] = Num(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return Finish(report, overrides.out.empty() ? config.io.report : overrides.out);
}

std::string RunAttack(const RunConfig& config, const Overrides& overrides) {
  const std::string ckpt_path =
      Pick(overrides.checkpoint, config.io.checkpoint, "checkpoint");
  if (config.io.members.empty() || config.io.nonmembers.empty()) {
    Fail(kCfg, "attack: members and nonmembers paths are required");
  }
  const Checkpoint ck = LoadCheckpoint(ckpt_path);
  const TableSchema& schema = ck.codec.schema;
  const StringGrid members = ReadTable(config.io.members, schema);
  const StringGrid nonmembers = ReadTable(config.io.nonmembers, schema);
  if (members.empty() || members.size() != nonmembers.size()) {
    Fail(ErrorCode::kData, "attack: member and nonmember sets must be non-empty and "
                           "the same size (" + std::to_string(members.size()) +
                               " vs " + std::to_string(nonmembers.size()) + ")");
  }
  StringGrid synth;
  if (!config.io.synthetic.empty()) {
    synth = ReadTable(config.io.synthetic, schema);
  } else {
    Rng rng = SampleRng(SeedOf(config, overrides));
    synth = Sample(ck, overrides.n.value_or(members.size()), rng);
  }
  const MiaResult r = MembershipAttack(EncodeAll(members, ck.codec, "members"),
                                       EncodeAll(nonmembers, ck.codec, "nonmembers"),
                                       EncodeAll(synth, ck.codec, "synthetic"));
  Json report = LedgerJson(ck.ledger);
  report["command"] = "attack";
  report["version"] = kVersion;
  report["mia_accuracy"] = Num(r.accuracy);
  report["threshold"] = std::isfinite(r.threshold) ? Num(r.threshold) : Json(nullptr);
  report["members"] = members.size();
  report["synthetic_rows"] = synth.size();
  return Finish(report, overrides.out.empty() ? config.io.report : overrides.out);
}

std::string RunEncode(const RunConfig& config, const Overrides& overrides) {
  if (config.io.input.empty()) Fail(kCfg, "no input path configured");
  const std::string out_path = Pick(overrides.out, config.io.encoded, "encoded output");
  const StringGrid raw = ReadTable(config.io.input, config.schema);
  const EncodeResult enc = EncodeTable(raw, config.schema, config.hyper.max_modes,
                                       SeedOf(config, overrides));
  CsvTable t;
  for (std::size_t c = 0; c < config.schema.size(); ++c) {
    const ColumnBlock& b = enc.table.layout.blocks[c];
    const ColumnCodec& codec = enc.state.columns[c];
    const std::string& name = config.schema.columns[c].name;
    if (b.has_alpha) t.header.push_back(name + ".alpha");
    for (std::size_t k = 0; k < b.one_hot_width; ++k) {
      if (codec.spec.kind == ColumnKind::kCategorical) {
        t.header.push_back(name + "=" + codec.categories[k]);
      } else {
        t.header.push_back(name + ".mode" + std::to_string(k));
      }
    }
  }
  const Tensor& data = enc.table.data;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(data.cols());
    for (std::size_t c = 0; c < data.cols(); ++c) {
      row.push_back(FormatDouble(data(r, c), 17));
    }
    t.rows.push_back(std::move(row));
  }
  WriteCsvFile(out_path, t);
  Json report;
  report["command"] = "encode";
  report["version"] = kVersion;
  report["rows"] = data.rows();
  report["row_width"] = data.cols();
  report["cond_width"] = enc.table.layout.cond_width;
  report["dropped_rows"] = enc.state.dropped_rows;
  report["output"] = out_path;
  return Finish(report, std::string());
}

std::string RunAccountant(const AccountantRequest& request) {
  if (request.sigma.has_value() == request.target_epsilon.has_value()) {
    Fail(kCfg, "accountant: exactly one of sigma and target_epsilon is required");
  }
  Json report;
  report["command"] = "accountant";
  report["version"] = kVersion;
  report["T"] = request.updates;
  report["batch"] = request.batch;
  report["delta"] = Num(request.delta);
  try {
    if (request.sigma) {
      report["sigma"] = Num(*request.sigma);
      if (*request.sigma == 0.0) {
        report["epsilon"] = "NON-PRIVATE";
      } else {
        const EpsilonResult r = ComputeEpsilon(request.updates, request.batch,
                                               *request.sigma, request.delta,
                                               request.lambda_grid);
        report["epsilon"] = Num(r.epsilon);
        report["order"] = r.order;
      }
    } else {
      const double sigma =
          CalibrateSigma(*request.target_epsilon, request.delta, request.updates,
                         request.batch, request.lambda_grid);
      const EpsilonResult r = ComputeEpsilon(request.updates, request.batch, sigma,
                                             request.delta, request.lambda_grid);
      report["target_epsilon"] = Num(*request.target_epsilon);
      report["sigma"] = Num(sigma);
      report["epsilon"] = Num(r.epsilon);
      report["order"] = r.order;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) Fail(kCfg, e.what());
    throw;
  }
  return Finish(report, std::string());
}

}  // namespace dptab
