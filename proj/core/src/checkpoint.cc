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

#include "dptab/checkpoint.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "dptab/csv.h"
#include "dptab/error.h"
#include "serialize.h"

namespace dptab {

using internal::Json;

namespace internal {

Json HyperShapeToJson(const Hyper& h) {
  return Json{{"z_dim", h.z_dim},
              {"gen_hidden", h.gen_hidden},
              {"disc_hidden", h.disc_hidden},
              {"aux_hidden", h.aux_hidden},
              {"batch", h.batch},
              {"steps", h.steps},
              {"aux_weight", h.aux_weight},
              {"attention", h.attention},
              {"token_width", h.token_width},
              {"max_modes", h.max_modes},
              {"learning_rate", h.learning_rate}};
}

void HyperShapeFromJson(const Json& j, Hyper& h, ErrorCode code) {
  CheckKeys(j,
            {"z_dim", "gen_hidden", "disc_hidden", "aux_hidden", "batch",
             "steps", "aux_weight", "attention", "token_width", "max_modes",
             "learning_rate"},
            "hyper", code);
  const std::string ctx = "hyper";
  h.z_dim = GetOr(j, "z_dim", h.z_dim, ctx, code);
  h.gen_hidden = GetOr(j, "gen_hidden", h.gen_hidden, ctx, code);
  h.disc_hidden = GetOr(j, "disc_hidden", h.disc_hidden, ctx, code);
  h.aux_hidden = GetOr(j, "aux_hidden", h.aux_hidden, ctx, code);
  h.batch = GetOr(j, "batch", h.batch, ctx, code);
  h.steps = GetOr(j, "steps", h.steps, ctx, code);
  h.aux_weight = GetOr(j, "aux_weight", h.aux_weight, ctx, code);
  h.attention = GetOr(j, "attention", h.attention, ctx, code);
  h.token_width = GetOr(j, "token_width", h.token_width, ctx, code);
  h.max_modes = GetOr(j, "max_modes", h.max_modes, ctx, code);
  h.learning_rate = GetOr(j, "learning_rate", h.learning_rate, ctx, code);
}

}  // namespace internal

namespace {

constexpr ErrorCode kBad = ErrorCode::kIntegrity;

// Infinite clip (sanitizer disabled) has no JSON number form.
Json ClipToJson(double clip) {
  return std::isinf(clip) ? Json(nullptr) : Json(clip);
}

double ClipFromJson(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity()
                     : j.get<double>();
}

void PutU64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view Take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      Fail(kBad, std::string("checkpoint truncated while reading ") + what);
    }
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t U64(const char* what) {
    std::string_view s = Take(8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
    return v;
  }
  std::uint32_t U32(const char* what) {
    std::string_view s = Take(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

Json LayerToJson(const Layer& l) {
  Json ranges = Json::array();
  for (const ColumnRange& r : l.config.ranges) ranges.push_back({r.offset, r.width});
  Json shapes = Json::array();
  for (const Tensor& p : l.params) shapes.push_back({p.rows(), p.cols()});
  return Json{{"kind", LayerKindName(l.kind)},
              {"in_width", l.config.in_width},
              {"out_width", l.config.out_width},
              {"leak_slope", l.config.leak_slope},
              {"ranges", ranges},
              {"norm_epsilon", l.config.norm_epsilon},
              {"token_count", l.config.token_count},
              {"token_width", l.config.token_width},
              {"params", shapes}};
}

Layer LayerFromJson(const Json& j) {
  Layer l;
  l.kind = LayerKindFromName(j.at("kind").get<std::string>());
  l.config.in_width = j.at("in_width").get<std::size_t>();
  l.config.out_width = j.at("out_width").get<std::size_t>();
  l.config.leak_slope = j.at("leak_slope").get<double>();
  for (const Json& r : j.at("ranges")) {
    l.config.ranges.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()});
  }
  l.config.norm_epsilon = j.at("norm_epsilon").get<double>();
  l.config.token_count = j.at("token_count").get<std::size_t>();
  l.config.token_width = j.at("token_width").get<std::size_t>();
  for (const Json& s : j.at("params")) {
    l.params.emplace_back(s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>());
  }
  return l;
}

Json NetworkToJson(const Network& n) {
  Json out = Json::array();
  for (const Layer& l : n.layers()) out.push_back(LayerToJson(l));
  return out;
}

Json CodecToJson(const CodecState& c) {
  Json cols = Json::array();
  for (const ColumnCodec& col : c.columns) {
    cols.push_back({{"weights", col.vgm.weights},
                    {"means", col.vgm.means},
                    {"stds", col.vgm.stds},
                    {"singular_modes", col.vgm.singular_modes},
                    {"categories", col.categories}});
  }
  return Json{{"columns", cols},
              {"frequency", c.frequency},
              {"dropped_rows", c.dropped_rows}};
}

CodecState CodecFromJson(const Json& j, const TableSchema& schema) {
  CodecState c;
  c.schema = schema;
  const Json& cols = j.at("columns");
  if (cols.size() != schema.size()) Fail(kBad, "checkpoint: codec/schema mismatch");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    ColumnCodec col;
    col.spec = schema.columns[i];
    col.vgm.weights = cols[i].at("weights").get<std::vector<double>>();
    col.vgm.means = cols[i].at("means").get<std::vector<double>>();
    col.vgm.stds = cols[i].at("stds").get<std::vector<double>>();
    col.vgm.singular_modes = cols[i].at("singular_modes").get<std::vector<double>>();
    col.categories = cols[i].at("categories").get<std::vector<std::string>>();
    c.columns.push_back(std::move(col));
  }
  c.frequency = j.at("frequency").get<std::vector<std::vector<std::uint64_t>>>();
  c.dropped_rows = j.at("dropped_rows").get<std::size_t>();
  c.layout = BuildLayout(c.columns);
  return c;
}

void AppendParams(std::string& out, const Network& n) {
  for (const Layer& l : n.layers()) {
    for (const Tensor& p : l.params) {
      for (double v : p.values()) PutU64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
}

std::size_t CountParams(const std::vector<Layer>& layers) {
  std::size_t n = 0;
  for (const Layer& l : layers) {
    for (const Tensor& p : l.params) n += p.size();
  }
  return n;
}

}  // namespace

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string SerializeCheckpoint(const Checkpoint& ck) {
  const Hyper& h = ck.hyper;
  Json hyper = internal::HyperShapeToJson(h);
  hyper["seed"] = h.seed;
  hyper["os_entropy"] = h.os_entropy;

  const SanitizerConfig& s = ck.ledger.config();
  Json header{
      {"format", "dptab-checkpoint"},
      {"hyper", hyper},
      {"schema", Json::parse(SchemaToJson(ck.codec.schema))},
      {"codec", CodecToJson(ck.codec)},
      {"ledger",
       {{"clip", ClipToJson(s.clip)},
        {"batch", s.batch},
        {"sigma", s.sigma},
        {"delta", ck.ledger.delta()},
        {"lambda_grid", ck.ledger.lambda_grid()},
        {"updates", ck.ledger.updates()}}},
      {"step", ck.step},
      {"networks",
       {{"generator", NetworkToJson(ck.models.generator)},
        {"discriminator", NetworkToJson(ck.models.discriminator)},
        {"auxiliary", NetworkToJson(ck.models.auxiliary)}}}};
  if (ck.models.aux_target) {
    const AuxTarget& t = *ck.models.aux_target;
    header["aux_target"] = {{"column", t.column},
                            {"block_offset", t.block_offset},
                            {"block_width", t.block_width},
                            {"one_hot_offset", t.one_hot_offset},
                            {"classes", t.classes}};
  }
  const std::string header_text = header.dump();

  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutU32(out, kCheckpointVersion);
  PutU64(out, header_text.size());
  out += header_text;
  const std::size_t count = ck.models.generator.ParameterCount() +
                            ck.models.discriminator.ParameterCount() +
                            ck.models.auxiliary.ParameterCount();
  PutU64(out, count);
  AppendParams(out, ck.models.generator);
  AppendParams(out, ck.models.discriminator);
  AppendParams(out, ck.models.auxiliary);
  PutU64(out, Fnv1a64(out));
  return out;
}

Checkpoint DeserializeCheckpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.Take(sizeof(kCheckpointMagic), "magic") !=
      std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    Fail(kBad, "not a dptab checkpoint (bad magic)");
  }
  const std::uint32_t version = in.U32("version");
  if (version != kCheckpointVersion) {
    Fail(kBad, "unsupported checkpoint version " + std::to_string(version));
  }
  if (bytes.size() < 8) Fail(kBad, "checkpoint truncated");
  const std::uint64_t stored_sum = [&] {
    Reader tail(bytes.substr(bytes.size() - 8));
    return tail.U64("checksum");
  }();
  // Validate lengths before trusting the checksum position.
  const std::uint64_t header_len = in.U64("header length");
  const std::string_view header_text = in.Take(header_len, "header");
  const std::uint64_t count = in.U64("parameter count");
  if (count > in.remaining() / 8) Fail(kBad, "checkpoint truncated in parameters");
  const std::size_t params_at = in.pos();
  in.Take(count * 8, "parameters");
  if (in.remaining() != 8) Fail(kBad, "checkpoint has trailing or missing bytes");
  if (Fnv1a64(bytes.substr(0, bytes.size() - 8)) != stored_sum) {
    Fail(kBad, "checkpoint checksum mismatch");
  }

  Checkpoint ck;
  try {
    const Json header = Json::parse(header_text);
    const Json& hj = header.at("hyper");
    Json shape = hj;
    shape.erase("seed");
    shape.erase("os_entropy");
    internal::HyperShapeFromJson(shape, ck.hyper, kBad);
    ck.hyper.seed = hj.at("seed").get<std::uint64_t>();
    ck.hyper.os_entropy = hj.at("os_entropy").get<bool>();

    const TableSchema schema = ParseSchema(header.at("schema").dump());
    ck.codec = CodecFromJson(header.at("codec"), schema);

    const Json& lj = header.at("ledger");
    SanitizerConfig sc{ClipFromJson(lj.at("clip")), lj.at("batch").get<std::size_t>(),
                       lj.at("sigma").get<double>()};
    ck.ledger = PrivacyLedger(sc, lj.at("delta").get<double>(),
                              lj.at("lambda_grid").get<std::vector<int>>(),
                              lj.at("updates").get<std::uint64_t>());
    ck.hyper.sigma = sc.sigma;
    ck.hyper.clip = sc.clip;
    ck.hyper.delta = ck.ledger.delta();
    ck.hyper.lambda_grid = ck.ledger.lambda_grid();
    ck.step = header.at("step").get<std::uint64_t>();

    const Json& nets = header.at("networks");
    std::vector<std::vector<Layer>> layers(3);
    const char* names[] = {"generator", "discriminator", "auxiliary"};
    std::size_t expected = 0;
    for (int i = 0; i < 3; ++i) {
      for (const Json& lj2 : nets.at(names[i])) layers[i].push_back(LayerFromJson(lj2));
      expected += CountParams(layers[i]);
    }
    if (expected != count) Fail(kBad, "checkpoint parameter count mismatch");
    Reader params(bytes.substr(params_at, count * 8));
    for (auto& net : layers) {
      for (Layer& l : net) {
        for (Tensor& p : l.params) {
          for (double& v : p.values()) {
            v = std::bit_cast<double>(params.U64("parameter"));
          }
        }
      }
    }
    ck.models.generator = Network(std::move(layers[0]));
    ck.models.discriminator = Network(std::move(layers[1]));
    ck.models.auxiliary = Network(std::move(layers[2]));
    if (header.contains("aux_target")) {
      const Json& t = header.at("aux_target");
      ck.models.aux_target = AuxTarget{
          t.at("column").get<std::size_t>(), t.at("block_offset").get<std::size_t>(),
          t.at("block_width").get<std::size_t>(),
          t.at("one_hot_offset").get<std::size_t>(), t.at("classes").get<std::size_t>()};
    }
    if (ck.models.generator.out_width() != ck.codec.layout.row_width ||
        ck.models.generator.in_width() !=
            ck.hyper.z_dim + ck.codec.layout.cond_width) {
      Fail(kBad, "checkpoint generator shape does not match its codec");
    }
  } catch (const Json::exception& e) {
    Fail(kBad, std::string("checkpoint header is malformed: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == kBad) throw;
    Fail(kBad, std::string("checkpoint header is invalid: ") + e.what());
  }
  return ck;
}

void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint) {
  WriteFileAtomic(path, SerializeCheckpoint(checkpoint));
}

Checkpoint LoadCheckpoint(const std::string& path) {
  return DeserializeCheckpoint(ReadFile(path));
}

}  // namespace dptab
