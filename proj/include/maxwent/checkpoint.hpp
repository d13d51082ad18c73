/*
 * Copyright 2026 The maxwent authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MAXWENT_CHECKPOINT_HPP_
#define MAXWENT_CHECKPOINT_HPP_

#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "maxwent/common.hpp"
#include "maxwent/io.hpp"
#include "maxwent/network.hpp"
#include "maxwent/stochastic.hpp"

namespace maxwent {

inline constexpr const char* kCheckpointVersion = "maxwent-ckpt-v1";

namespace detail {

inline constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    std::uint32_t chunk = static_cast<std::uint32_t>(data[i]) << 16;
    if (i + 1 < len) chunk |= static_cast<std::uint32_t>(data[i + 1]) << 8;
    if (i + 2 < len) chunk |= static_cast<std::uint32_t>(data[i + 2]);
    out.push_back(kB64Alphabet[(chunk >> 18) & 0x3F]);
    out.push_back(kB64Alphabet[(chunk >> 12) & 0x3F]);
    out.push_back(i + 1 < len ? kB64Alphabet[(chunk >> 6) & 0x3F] : '=');
    out.push_back(i + 2 < len ? kB64Alphabet[chunk & 0x3F] : '=');
  }
  return out;
}

inline std::vector<unsigned char> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) throw IoError("base64: length not a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=') {
        vals[j] = 0;
        ++pad;
      } else {
        vals[j] = value_of(c);
        if (vals[j] < 0) throw IoError("base64: invalid character");
        if (pad > 0) throw IoError("base64: data after padding");
      }
    }
    const std::uint32_t chunk = (static_cast<std::uint32_t>(vals[0]) << 18) |
                                (static_cast<std::uint32_t>(vals[1]) << 12) |
                                (static_cast<std::uint32_t>(vals[2]) << 6) |
                                static_cast<std::uint32_t>(vals[3]);
    out.push_back(static_cast<unsigned char>((chunk >> 16) & 0xFF));
    if (pad < 2) out.push_back(static_cast<unsigned char>((chunk >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<unsigned char>(chunk & 0xFF));
  }
  return out;
}

// row-major little-endian float64 payload
inline std::string encode_matrix(const Matrix& m) {
  std::vector<unsigned char> bytes(m.size() * sizeof(double));
  std::memcpy(bytes.data(), m.data(), bytes.size());
  return base64_encode(bytes.data(), bytes.size());
}

inline Matrix decode_matrix(std::size_t rows, std::size_t cols, const std::string& data) {
  const std::vector<unsigned char> bytes = base64_decode(data);
  if (bytes.size() != rows * cols * sizeof(double))
    throw IoError("checkpoint: basis payload size mismatch");
  Matrix m(rows, cols);
  std::memcpy(m.data(), bytes.data(), bytes.size());
  return m;
}

inline std::string activation_name(Activation a) {
  return a == Activation::ReLU ? "relu" : "leaky_relu";
}

inline Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "leaky_relu") return Activation::LeakyReLU;
  throw IoError("checkpoint: unknown activation '" + s + "'");
}

inline std::string head_name(Head h) {
  switch (h) {
    case Head::LinearRegression: return "linear_regression";
    case Head::GaussianRegression: return "gaussian_regression";
    case Head::BinaryClassification: return "binary_classification";
    case Head::MultiClass: return "multi_class";
  }
  return "";
}

inline Head head_from(const std::string& s) {
  if (s == "linear_regression") return Head::LinearRegression;
  if (s == "gaussian_regression") return Head::GaussianRegression;
  if (s == "binary_classification") return Head::BinaryClassification;
  if (s == "multi_class") return Head::MultiClass;
  throw IoError("checkpoint: unknown head '" + s + "'");
}

inline std::string law_name(SampleLaw law) {
  return law == SampleLaw::StandardNormal ? "standard_normal" : "uniform_sym";
}

inline SampleLaw law_from(const std::string& s) {
  if (s == "standard_normal") return SampleLaw::StandardNormal;
  if (s == "uniform_sym") return SampleLaw::UniformSym;
  throw IoError("checkpoint: unknown law '" + s + "'");
}

inline std::string kind_name(ParamKind k) {
  return k == ParamKind::Scaling ? "scaling" : "svd";
}

inline ParamKind kind_from(const std::string& s) {
  if (s == "scaling") return ParamKind::Scaling;
  if (s == "svd") return ParamKind::Svd;
  throw IoError("checkpoint: unknown kind '" + s + "'");
}

}  // namespace detail

/// One fitted (or pretrained) model: architecture plus weight distribution
/// plus the acceptance metadata filled by the entropy fit.
struct Checkpoint {
  NetworkSpec spec;
  WeightDistribution dist;
  double tau = std::numeric_limits<double>::quiet_NaN();
  std::int64_t accepted_iteration = -1;
};

/// Checkpoint files hold either one model or an ensemble of them.
struct CheckpointFile {
  std::vector<Checkpoint> members;

  bool is_ensemble() const { return members.size() > 1; }
  const Checkpoint& single() const {
    if (members.size() != 1) throw ContractViolation("checkpoint: expected a single model");
    return members.front();
  }
  EnsembleDistribution ensemble() const {
    EnsembleDistribution ens;
    for (const Checkpoint& c : members) ens.members.push_back(c.dist);
    return ens;
  }
};

namespace detail {

inline nlohmann::ordered_json member_to_json(const Checkpoint& ckpt) {
  nlohmann::ordered_json j;
  const NetworkSpec& spec = ckpt.spec;
  j["network"] = {{"input_dim", spec.input_dim},
                  {"hidden", spec.hidden},
                  {"activation", activation_name(spec.activation)},
                  {"head", head_name(spec.head)},
                  {"classes", spec.classes},
                  {"use_bias", spec.use_bias}};
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& s : ckpt.dist.layout.layers()) {
    nlohmann::ordered_json layer;
    layer["in"] = s.in;
    layer["out"] = s.out;
    layer["weight_offset"] = s.weight_offset;
    if (s.bias_offset == WeightLayout::npos)
      layer["bias_offset"] = nullptr;
    else
      layer["bias_offset"] = s.bias_offset;
    layers.push_back(layer);
  }
  j["layout"] = {{"total_dim", ckpt.dist.layout.total_dim()}, {"layers", layers}};
  j["kind"] = kind_name(ckpt.dist.kind);
  j["law"] = law_name(ckpt.dist.law);
  if (ckpt.dist.clip == kInf)
    j["clip"] = nullptr;
  else
    j["clip"] = ckpt.dist.clip;
  j["mean"] = ckpt.dist.mean;
  if (ckpt.dist.stochastic())
    j["raw_scale"] = ckpt.dist.raw;
  else
    j["raw_scale"] = nullptr;
  if (ckpt.dist.kind == ParamKind::Svd) {
    nlohmann::ordered_json bases = nlohmann::ordered_json::array();
    for (const Matrix& v : ckpt.dist.bases)
      bases.push_back({{"rows", v.rows()}, {"cols", v.cols()}, {"data", encode_matrix(v)}});
    j["bases"] = bases;
  } else {
    j["bases"] = nullptr;
  }
  if (std::isnan(ckpt.tau))
    j["tau"] = nullptr;
  else
    j["tau"] = ckpt.tau;
  if (ckpt.accepted_iteration < 0)
    j["accepted_iteration"] = nullptr;
  else
    j["accepted_iteration"] = ckpt.accepted_iteration;
  return j;
}

inline Checkpoint member_from_json(const nlohmann::json& j) {
  Checkpoint ckpt;
  const auto& net = j.at("network");
  ckpt.spec.input_dim = net.at("input_dim").get<std::size_t>();
  ckpt.spec.hidden = net.at("hidden").get<std::vector<std::size_t>>();
  ckpt.spec.activation = activation_from(net.at("activation").get<std::string>());
  ckpt.spec.head = head_from(net.at("head").get<std::string>());
  ckpt.spec.classes = net.at("classes").get<std::size_t>();
  ckpt.spec.use_bias = net.at("use_bias").get<bool>();

  WeightDistribution& dist = ckpt.dist;
  dist.layout = WeightLayout::from_spec(ckpt.spec);
  if (j.at("layout").at("total_dim").get<std::size_t>() != dist.layout.total_dim())
    throw IoError("checkpoint: layout does not match the network description");
  dist.kind = kind_from(j.at("kind").get<std::string>());
  dist.law = law_from(j.at("law").get<std::string>());
  dist.clip = j.at("clip").is_null() ? kInf : j.at("clip").get<double>();
  dist.mean = j.at("mean").get<std::vector<double>>();
  if (!j.at("raw_scale").is_null()) dist.raw = j.at("raw_scale").get<std::vector<double>>();
  if (dist.kind == ParamKind::Svd) {
    if (j.at("bases").is_null()) throw IoError("checkpoint: svd kind without bases");
    for (const auto& basis : j.at("bases"))
      dist.bases.push_back(decode_matrix(basis.at("rows").get<std::size_t>(),
                                         basis.at("cols").get<std::size_t>(),
                                         basis.at("data").get<std::string>()));
  }
  dist.validate();

  if (!j.at("tau").is_null()) ckpt.tau = j.at("tau").get<double>();
  if (!j.at("accepted_iteration").is_null())
    ckpt.accepted_iteration = j.at("accepted_iteration").get<std::int64_t>();
  return ckpt;
}

}  // namespace detail

inline std::string checkpoint_to_json(const CheckpointFile& file) {
  if (file.members.empty()) throw ContractViolation("checkpoint: no members");
  nlohmann::ordered_json j;
  j["version"] = kCheckpointVersion;
  if (file.members.size() == 1) {
    const nlohmann::ordered_json member = detail::member_to_json(file.members.front());
    for (const auto& [key, value] : member.items()) j[key] = value;
  } else {
    nlohmann::ordered_json members = nlohmann::ordered_json::array();
    for (const Checkpoint& c : file.members) members.push_back(detail::member_to_json(c));
    j["members"] = members;
  }
  return j.dump(2) + "\n";
}

inline CheckpointFile checkpoint_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (!j.contains("version") || j.at("version").get<std::string>() != kCheckpointVersion)
    throw IoError("checkpoint: missing or unsupported version (expected " +
                  std::string(kCheckpointVersion) + ")");
  CheckpointFile file;
  try {
    if (j.contains("members")) {
      for (const auto& member : j.at("members"))
        file.members.push_back(detail::member_from_json(member));
    } else {
      file.members.push_back(detail::member_from_json(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint: malformed document: ") + e.what());
  }
  if (file.members.empty()) throw IoError("checkpoint: no members");
  return file;
}

inline void save_checkpoint(const std::string& path, const CheckpointFile& file) {
  atomic_write_text(path, checkpoint_to_json(file));
}

inline CheckpointFile load_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_text(path));
}

}  // namespace maxwent

#endif  // MAXWENT_CHECKPOINT_HPP_
