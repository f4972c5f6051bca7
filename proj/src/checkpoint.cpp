/*
 * Copyright 2026 The LegalLens Pipeline Authors.
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

#include "legallens/checkpoint.hpp"

#include <fstream>
#include <string>
#include <vector>

#include "legallens/errors.hpp"

namespace legallens::checkpoint {

using nlohmann::json;

json tensors_to_json(const nn::ParamStore<double>& params) {
  json tensors = json::array();
  for (const auto& p : params) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(p.value.size()));
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        data.push_back(p.value(r, c));
      }
    }
    tensors.push_back({{"name", p.name},
                       {"rows", p.value.rows()},
                       {"cols", p.value.cols()},
                       {"data", std::move(data)}});
  }
  return tensors;
}

nn::ParamStore<double> tensors_from_json(const json& tensors) {
  nn::ParamStore<double> params;
  try {
    for (const auto& t : tensors) {
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      const auto& data = t.at("data");
      if (rows < 0 || cols < 0 ||
          data.size() != static_cast<std::size_t>(rows * cols)) {
        throw CheckpointMismatch("tensor " + t.at("name").get<std::string>() +
                                 " has inconsistent shape");
      }
      nn::Matrix<double> m(rows, cols);
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
      }
      params.add(t.at("name").get<std::string>(), std::move(m));
    }
  } catch (const json::exception& e) {
    throw CheckpointMismatch(std::string("bad tensor record: ") + e.what());
  } catch (const std::logic_error& e) {
    throw CheckpointMismatch(e.what());
  }
  return params;
}

void write(const std::filesystem::path& path, std::string_view kind,
           json body) {
  body["format"] = "legallens-checkpoint";
  body["version"] = kFormatVersion;
  body["kind"] = std::string(kind);
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << body.dump() << '\n';
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

json read(const std::filesystem::path& path, std::string_view kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  json body = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) {
    throw CheckpointMismatch(path.string() + " is not a checkpoint");
  }
  if (body.value("format", "") != "legallens-checkpoint") {
    throw CheckpointMismatch(path.string() + " has an unknown format");
  }
  if (body.value("version", -1) != kFormatVersion) {
    throw CheckpointMismatch(path.string() + " has unsupported version");
  }
  if (body.value("kind", "") != kind) {
    throw CheckpointMismatch(path.string() + " holds a '" +
                             body.value("kind", "") + "' model, expected '" +
                             std::string(kind) + "'");
  }
  return body;
}

}  // namespace legallens::checkpoint
