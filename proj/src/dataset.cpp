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

#include "fedsparse/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fedsparse/error.hpp"
#include "fedsparse/rng.hpp"

namespace fedsparse {

void validate(const Dataset& ds) {
  if (ds.size() == 0) throw DataError("dataset '" + ds.name + "' is empty");
  if (ds.inputs.rows != ds.labels.size()) throw DataError("dataset row count does not match label count");
  for (std::size_t i = 0; i < ds.labels.size(); ++i)
    if (ds.labels[i] >= ds.class_count)
      throw DataError("sample " + std::to_string(i) + " has label " + std::to_string(ds.labels[i]) +
                      " >= class count " + std::to_string(ds.class_count));
}

namespace {

std::vector<std::vector<double>> class_directions(std::size_t classes, std::size_t dim, Rng& rng) {
  std::vector<std::vector<double>> dirs;
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<double> v(dim);
    for (;;) {
      for (auto& x : v) x = rng.normal();
      if (classes <= dim) {
        for (const auto& u : dirs) {
          double dot = 0.0;
          for (std::size_t i = 0; i < dim; ++i) dot += v[i] * u[i];
          for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * u[i];
        }
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (auto& x : v) x /= norm;
        break;
      }
    }
    dirs.push_back(std::move(v));
  }
  return dirs;
}

std::string fmt_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

}  // namespace

Dataset gen_synthetic(const SyntheticSpec& spec) {
  if (spec.input_dim < 1) throw InvalidArgument("input_dim must be >= 1");
  if (spec.classes < 2) throw InvalidArgument("synthetic data needs at least 2 classes");
  if (spec.n_per_class < 1) throw InvalidArgument("n_per_class must be >= 1");
  if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation))
    throw InvalidArgument("separation must be a finite value >= 0");

  Rng rng(derive_seed(spec.seed, {0xb10b}));
  const auto dirs = class_directions(spec.classes, spec.input_dim, rng);

  Dataset ds;
  ds.name = "synthetic";
  ds.class_count = spec.classes;
  ds.inputs = Matrix(spec.classes * spec.n_per_class, spec.input_dim);
  ds.labels.reserve(ds.inputs.rows);
  std::size_t r = 0;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t k = 0; k < spec.n_per_class; ++k, ++r) {
      auto row = ds.inputs.row(r);
      for (std::size_t i = 0; i < spec.input_dim; ++i) row[i] = spec.separation * dirs[c][i] + rng.normal();
      ds.labels.push_back(c);
    }
  }
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, std::size_t input_dim, std::size_t class_count,
                 bool skip_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Dataset ds;
  ds.name = path.stem().string();
  ds.class_count = class_count;
  ds.inputs.cols = input_dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_header && line_no == 1) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      return DataError(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != input_dim + 1)
      throw fail("expected " + std::to_string(input_dim + 1) + " columns, got " + std::to_string(fields.size()));
    for (std::size_t i = 0; i < input_dim; ++i) {
      auto f = fields[i];
      while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
      while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(v))
        throw fail("column " + std::to_string(i + 1) + " is not a finite number");
      ds.inputs.data.push_back(v);
    }
    auto lf = fields.back();
    while (!lf.empty() && lf.front() == ' ') lf.remove_prefix(1);
    while (!lf.empty() && lf.back() == ' ') lf.remove_suffix(1);
    std::size_t label = 0;
    auto [p, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), label);
    if (ec != std::errc() || p != lf.data() + lf.size()) throw fail("label is not a nonnegative integer");
    if (label >= class_count)
      throw fail("label " + std::to_string(label) + " >= class count " + std::to_string(class_count));
    ds.labels.push_back(label);
  }
  ds.inputs.rows = ds.labels.size();
  if (ds.labels.empty()) throw DataError(path.string() + ": no data rows");
  return ds;
}

void save_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ostringstream os;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (double v : ds.inputs.row(r)) os << fmt_double(v) << ',';
    os << ds.labels[r] << '\n';
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << os.str();
  if (!out) throw DataError("failed writing " + path.string());
}

NormStats fit_normalization(const Dataset& ds) {
  const std::size_t n = ds.size(), d = ds.input_dim();
  NormStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  if (n == 0) throw DataError("cannot normalize an empty dataset");
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += ds.inputs(r, i);
  for (auto& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i) {
      const double c = ds.inputs(r, i) - s.mean[i];
      s.stddev[i] += c * c;
    }
  for (auto& v : s.stddev) v = std::sqrt(v / static_cast<double>(n));
  return s;
}

Dataset apply_normalization(const Dataset& ds, const NormStats& stats) {
  if (stats.mean.size() != ds.input_dim()) throw ShapeError("normalization stats do not match feature count");
  Dataset out = ds;
  for (std::size_t r = 0; r < out.size(); ++r)
    for (std::size_t i = 0; i < out.input_dim(); ++i) {
      double& v = out.inputs(r, i);
      v = stats.stddev[i] > 0.0 ? (v - stats.mean[i]) / stats.stddev[i] : 0.0;
    }
  return out;
}

Normalized normalize(const Dataset& ds) {
  auto stats = fit_normalization(ds);
  auto data = apply_normalization(ds, stats);
  return {std::move(data), std::move(stats)};
}

Split train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must be in (0,1)");
  validate(ds);
  std::vector<std::vector<std::size_t>> by_class(ds.class_count);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

  Split split;
  for (std::size_t c = 0; c < ds.class_count; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() == 1) {
      split.train_indices.push_back(members.front());
      split.warnings.push_back("class " + std::to_string(c) + " has a single sample; kept in train");
      continue;
    }
    Rng rng(derive_seed(seed, {0x5b17, c}));
    rng.shuffle(members.begin(), members.end());
    auto n_test = static_cast<std::size_t>(std::round(test_fraction * static_cast<double>(members.size())));
    n_test = std::min(n_test, members.size() - 1);
    split.test_indices.insert(split.test_indices.end(), members.begin(),
                              members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_indices.insert(split.train_indices.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test),
                               members.end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  split.train = subset(ds, split.train_indices);
  split.test = subset(ds, split.test_indices);
  split.train.name = ds.name + "/train";
  split.test.name = ds.name + "/test";
  return split;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.name = ds.name;
  out.class_count = ds.class_count;
  out.inputs = Matrix(indices.size(), ds.input_dim());
  out.labels.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto src = ds.inputs.row(indices[k]);
    std::copy(src.begin(), src.end(), out.inputs.row(k).begin());
    out.labels.push_back(ds.labels[indices[k]]);
  }
  return out;
}

Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices) {
  Batch b;
  b.inputs = Matrix(indices.size(), ds.input_dim());
  b.labels.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto src = ds.inputs.row(indices[k]);
    std::copy(src.begin(), src.end(), b.inputs.row(k).begin());
    b.labels.push_back(ds.labels[indices[k]]);
  }
  return b;
}

}  // namespace fedsparse
