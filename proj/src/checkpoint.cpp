// Copyright (c) 2026 The fieldray Authors.
// SPDX-License-Identifier: Apache-2.0
#include "fieldray/autodiff/checkpoint.hpp"

#include <fstream>

#include "fieldray/util/error.hpp"
#include "json.hpp"

namespace fieldray {

using nlohmann::json;

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json doc;
  doc["version"] = ckpt.version;
  doc["kind"] = ckpt.kind;
  doc["meta"] = ckpt.meta_json.empty() ? json::object() : json::parse(ckpt.meta_json);
  json params = json::object();
  for (const auto& [name, tensor] : ckpt.params.items()) {
    json entry;
    json shape = json::array();
    for (int i = 0; i < tensor.shape.rank; ++i) shape.push_back(tensor.shape.dims[i]);
    entry["shape"] = shape;
    json data = json::array();
    for (float v : tensor.data) data.push_back(v);
    entry["data"] = std::move(data);
    params[name] = std::move(entry);
  }
  doc["params"] = std::move(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io", "save_checkpoint: cannot open " + path);
  out << doc.dump(2) << "\n";
  if (!out) fail("io", "save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io", "load_checkpoint: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail("io", "load_checkpoint: invalid JSON in " + path + ": " + e.what());
  }
  Checkpoint ckpt;
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    fail("io", "load_checkpoint: missing version field in " + path);
  ckpt.version = doc["version"].get<int>();
  if (ckpt.version != 1)
    fail("io", "load_checkpoint: unsupported version " + std::to_string(ckpt.version));
  ckpt.kind = doc.value("kind", std::string{});
  ckpt.meta_json = doc.contains("meta") ? doc["meta"].dump() : std::string{};
  if (!doc.contains("params") || !doc["params"].is_object())
    fail("io", "load_checkpoint: missing params object in " + path);
  for (const auto& [name, entry] : doc["params"].items()) {
    if (!entry.contains("shape") || !entry.contains("data"))
      fail("io", "load_checkpoint: parameter " + name + " lacks shape/data");
    Shape shape;
    shape.rank = static_cast<int>(entry["shape"].size());
    if (shape.rank < 0 || shape.rank > 3)
      fail("io", "load_checkpoint: parameter " + name + " has unsupported rank");
    for (int i = 0; i < shape.rank; ++i) shape.dims[i] = entry["shape"][i].get<int>();
    std::vector<float> data;
    data.reserve(entry["data"].size());
    for (const auto& v : entry["data"]) data.push_back(v.get<float>());
    ckpt.params.add(name, shape, std::move(data));
  }
  return ckpt;
}

}  // namespace fieldray
