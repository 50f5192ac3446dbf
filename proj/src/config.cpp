// Copyright 2026 The fedsparse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "fedsparse/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>

#include "fedsparse/error.hpp"

namespace fedsparse {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) throw ConfigError(join(where, k), "unknown key");
}

double get_real(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(where, key), "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(where, key), "must be finite");
  return x;
}

std::uint64_t get_uint(const json& obj, const std::string& where, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) throw ConfigError(join(where, key), "must be a nonnegative integer");
  throw ConfigError(join(where, key), "must be an integer");
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ConfigError(join(where, key), "must be true or false");
  return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw ConfigError(join(where, key), "must be a string");
  return obj.at(key).get<std::string>();
}

template <class F>
auto enum_field(const std::string& field, const std::string& value, F&& parse) {
  try {
    return parse(value);
  } catch (const InvalidArgument& e) {
    throw ConfigError(field, e.what());
  }
}

void require(bool ok, const std::string& field, const std::string& constraint) {
  if (!ok) throw ConfigError(field, constraint);
}

DatasetConfig parse_dataset(const json& d) {
  const std::string where = "dataset";
  if (!d.is_object()) throw ConfigError(where, "expected an object");
  DatasetConfig out;
  const auto kind = get_string(d, where, "kind", "synthetic");
  if (kind == "synthetic") {
    reject_unknown(d, where, {"kind", "classes", "n_per_class", "input_dim", "separation", "seed", "normalize"});
    out.kind = DatasetKind::synthetic;
    out.synthetic = parse_synthetic_spec(d);
    out.has_seed = d.contains("seed");
  } else if (kind == "csv") {
    reject_unknown(d, where, {"kind", "path", "input_dim", "classes", "skip_header", "normalize"});
    out.kind = DatasetKind::csv;
    require(d.contains("path"), "dataset.path", "required for csv datasets");
    out.path = get_string(d, where, "path", "");
    require(!out.path.empty(), "dataset.path", "must be a nonempty path");
    require(d.contains("input_dim"), "dataset.input_dim", "required for csv datasets");
    require(d.contains("classes"), "dataset.classes", "required for csv datasets");
    out.input_dim = get_uint(d, where, "input_dim", 0);
    out.classes = get_uint(d, where, "classes", 0);
    require(out.input_dim >= 1, "dataset.input_dim", "must be >= 1");
    require(out.classes >= 2, "dataset.classes", "must be >= 2");
    out.skip_header = get_bool(d, where, "skip_header", false);
  } else {
    throw ConfigError("dataset.kind", "must be \"synthetic\" or \"csv\"");
  }
  out.normalize = get_bool(d, where, "normalize", true);
  return out;
}

ModelConfig parse_model(const json& m) {
  reject_unknown(m, "model", {"hidden", "activation"});
  ModelConfig out;
  if (m.contains("hidden")) {
    const auto& h = m.at("hidden");
    require(h.is_array(), "model.hidden", "must be an array of positive integers");
    out.hidden.clear();
    for (std::size_t i = 0; i < h.size(); ++i) {
      const std::string f = "model.hidden[" + std::to_string(i) + "]";
      require(h[i].is_number_unsigned() && h[i].get<std::uint64_t>() >= 1, f, "must be an integer >= 1");
      out.hidden.push_back(h[i].get<std::size_t>());
    }
  }
  out.activation = enum_field("model.activation", get_string(m, "model", "activation", "relu"), activation_from_string);
  return out;
}

SparsityPolicy parse_policy(const json& p) {
  const std::string where = "policy";
  if (!p.is_object()) throw ConfigError(where, "expected an object");
  require(p.contains("kind"), "policy.kind", "required (top_k, threshold, random or dense)");
  const auto kind = enum_field("policy.kind", get_string(p, where, "kind", ""), policy_kind_from_string);
  SparsityPolicy out;
  out.kind = kind;
  switch (kind) {
    case PolicyKind::top_k:
    case PolicyKind::random:
      reject_unknown(p, where, {"kind", "rate"});
      require(p.contains("rate"), "policy.rate", "required for " + to_string(kind));
      out.rate = get_real(p, where, "rate", 1.0);
      require(out.rate > 0.0 && out.rate <= 1.0, "policy.rate", "must be in (0,1]");
      break;
    case PolicyKind::threshold:
      reject_unknown(p, where, {"kind", "tau"});
      require(p.contains("tau"), "policy.tau", "required for threshold");
      out.tau = get_real(p, where, "tau", 0.0);
      require(out.tau >= 0.0, "policy.tau", "must be >= 0");
      break;
    case PolicyKind::dense:
      reject_unknown(p, where, {"kind"});
      break;
  }
  return out;
}

}  // namespace

SyntheticSpec parse_synthetic_spec(const json& d, std::uint64_t default_seed) {
  const std::string where = "dataset";
  SyntheticSpec s;
  s.classes = get_uint(d, where, "classes", s.classes);
  s.n_per_class = get_uint(d, where, "n_per_class", s.n_per_class);
  s.input_dim = get_uint(d, where, "input_dim", s.input_dim);
  s.separation = get_real(d, where, "separation", s.separation);
  s.seed = get_uint(d, where, "seed", default_seed);
  require(s.classes >= 2, "dataset.classes", "must be >= 2");
  require(s.n_per_class >= 1, "dataset.n_per_class", "must be >= 1");
  require(s.input_dim >= 1, "dataset.input_dim", "must be >= 1");
  require(s.separation >= 0.0, "dataset.separation", "must be >= 0");
  return s;
}

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc, "", {"seed", "dataset", "model", "clients", "alpha", "policy", "sparsify_site", "rounds",
                           "local_epochs", "learning_rate", "batch_size", "participation", "test_fraction",
                           "test_split", "execution", "output_dir", "dump_updates"});
  ExperimentConfig c;
  require(doc.contains("seed"), "seed", "required");
  c.seed = get_uint(doc, "", "seed", 0);
  require(doc.contains("dataset"), "dataset", "required");
  c.dataset = parse_dataset(doc.at("dataset"));
  if (c.dataset.kind == DatasetKind::synthetic && !c.dataset.has_seed) c.dataset.synthetic.seed = 0;
  if (doc.contains("model")) c.model = parse_model(doc.at("model"));
  require(doc.contains("policy"), "policy", "required");
  c.training.policy = parse_policy(doc.at("policy"));

  c.clients = get_uint(doc, "", "clients", c.clients);
  require(c.clients >= 1 && c.clients <= 65536, "clients", "must be in [1, 65536]");
  c.alpha = get_real(doc, "", "alpha", c.alpha);
  require(c.alpha > 0.0, "alpha", "must be > 0");

  auto& t = c.training;
  t.site = enum_field("sparsify_site", get_string(doc, "", "sparsify_site", "uploaded_delta"),
                      sparsify_site_from_string);
  t.rounds = get_uint(doc, "", "rounds", t.rounds);
  require(t.rounds >= 1, "rounds", "must be >= 1");
  t.local_epochs = get_uint(doc, "", "local_epochs", t.local_epochs);
  require(t.local_epochs >= 1, "local_epochs", "must be >= 1");
  t.learning_rate = get_real(doc, "", "learning_rate", t.learning_rate);
  require(t.learning_rate >= 0.0, "learning_rate", "must be >= 0");
  t.batch_size = get_uint(doc, "", "batch_size", t.batch_size);
  require(t.batch_size >= 1, "batch_size", "must be >= 1");
  t.participation = get_real(doc, "", "participation", t.participation);
  require(t.participation > 0.0 && t.participation <= 1.0, "participation", "must be in (0,1]");
  const auto exec = get_string(doc, "", "execution", "serial");
  require(exec == "serial" || exec == "parallel", "execution", "must be \"serial\" or \"parallel\"");
  t.exec = exec == "parallel" ? Exec::parallel : Exec::serial;

  c.test_fraction = get_real(doc, "", "test_fraction", c.test_fraction);
  require(c.test_fraction > 0.0 && c.test_fraction < 1.0, "test_fraction", "must be in (0,1)");
  const auto split = get_string(doc, "", "test_split", "global");
  require(split == "global" || split == "per_client", "test_split", "must be \"global\" or \"per_client\"");
  c.test_split = split == "global" ? TestSplitMode::global : TestSplitMode::per_client;
  c.output_dir = get_string(doc, "", "output_dir", c.output_dir);
  require(!c.output_dir.empty(), "output_dir", "must be a nonempty path");
  c.dump_updates = get_bool(doc, "", "dump_updates", false);
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": invalid JSON: " + e.what());
  }
}

ExperimentConfig parse_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

json emit_config(const ExperimentConfig& c) {
  json d;
  if (c.dataset.kind == DatasetKind::synthetic) {
    const auto& s = c.dataset.synthetic;
    d = {{"kind", "synthetic"},
         {"classes", s.classes},
         {"n_per_class", s.n_per_class},
         {"input_dim", s.input_dim},
         {"separation", s.separation}};
    if (c.dataset.has_seed) d["seed"] = s.seed;
  } else {
    d = {{"kind", "csv"},
         {"path", c.dataset.path},
         {"input_dim", c.dataset.input_dim},
         {"classes", c.dataset.classes},
         {"skip_header", c.dataset.skip_header}};
  }
  d["normalize"] = c.dataset.normalize;

  json policy = {{"kind", to_string(c.training.policy.kind)}};
  if (c.training.policy.kind == PolicyKind::top_k || c.training.policy.kind == PolicyKind::random)
    policy["rate"] = c.training.policy.rate;
  if (c.training.policy.kind == PolicyKind::threshold) policy["tau"] = c.training.policy.tau;

  return {{"seed", c.seed},
          {"dataset", d},
          {"model", {{"hidden", c.model.hidden}, {"activation", to_string(c.model.activation)}}},
          {"clients", c.clients},
          {"alpha", c.alpha},
          {"policy", policy},
          {"sparsify_site", to_string(c.training.site)},
          {"rounds", c.training.rounds},
          {"local_epochs", c.training.local_epochs},
          {"learning_rate", c.training.learning_rate},
          {"batch_size", c.training.batch_size},
          {"participation", c.training.participation},
          {"test_fraction", c.test_fraction},
          {"test_split", c.test_split == TestSplitMode::global ? "global" : "per_client"},
          {"execution", c.training.exec == Exec::parallel ? "parallel" : "serial"},
          {"output_dir", c.output_dir},
          {"dump_updates", c.dump_updates}};
}

void apply_env_overrides(ExperimentConfig& cfg) {
  const char* s = std::getenv("FEDSPARSE_SEED");
  if (s == nullptr || *s == '\0') return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (errno != 0 || *end != '\0' || *s == '-')
    throw ConfigError("FEDSPARSE_SEED", "must be a nonnegative integer, got '" + std::string(s) + "'");
  cfg.seed = v;
}

}  // namespace fedsparse
