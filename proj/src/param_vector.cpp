#include "groklab/param_vector.hpp"

#include <bit>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace groklab {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

using nlohmann::json;

const char* param_kind_name(ParamKind k) {
  switch (k) {
    case ParamKind::weight_matrix: return "weight_matrix";
    case ParamKind::bias: return "bias";
    case ParamKind::embedding: return "embedding";
    case ParamKind::norm_gain: return "norm_gain";
  }
  return "?";
}

ParamKind param_kind_from_name(const std::string& s) {
  if (s == "weight_matrix") return ParamKind::weight_matrix;
  if (s == "bias") return ParamKind::bias;
  if (s == "embedding") return ParamKind::embedding;
  if (s == "norm_gain") return ParamKind::norm_gain;
  throw RuntimeFault("unknown param kind: " + s);
}

std::size_t ParamBlock::size() const {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

int ParamBlock::filter_count() const {
  if (kind == ParamKind::weight_matrix || kind == ParamKind::embedding) return shape.at(0);
  return shape.at(0);  // one scalar per filter
}

int ParamBlock::filter_len() const {
  if (kind == ParamKind::weight_matrix || kind == ParamKind::embedding) return shape.at(1);
  return 1;
}

const ParamBlock& ParamLayout::block(const std::string& name) const {
  for (const auto& b : blocks)
    if (b.name == name) return b;
  throw RuntimeFault("no such param block: " + name);
}

bool ParamLayout::compatible_with(const ParamLayout& other) const {
  if (total != other.total || blocks.size() != other.blocks.size()) return false;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& a = blocks[i];
    const auto& b = other.blocks[i];
    if (a.name != b.name || a.kind != b.kind || a.shape != b.shape || a.offset != b.offset)
      return false;
  }
  return true;
}

ParamVector make_params(std::shared_ptr<const ParamLayout> layout) {
  ParamVector p;
  p.values.assign(layout->total, 0.0);
  p.layout = std::move(layout);
  return p;
}

void write_layout_json(const ParamLayout& layout, const std::string& path) {
  json j;
  j["total"] = layout.total;
  j["blocks"] = json::array();
  for (const auto& b : layout.blocks) {
    json jb;
    jb["name"] = b.name;
    jb["kind"] = param_kind_name(b.kind);
    jb["shape"] = b.shape;
    jb["offset"] = b.offset;
    jb["filters"] = b.filter_count();
    j["blocks"].push_back(jb);
  }
  std::ofstream out(path);
  if (!out) throw RuntimeFault("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::shared_ptr<const ParamLayout> read_layout_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFault("cannot read " + path);
  json j = json::parse(in);
  auto layout = std::make_shared<ParamLayout>();
  layout->total = j.at("total").get<std::size_t>();
  for (const auto& jb : j.at("blocks")) {
    ParamBlock b;
    b.name = jb.at("name").get<std::string>();
    b.kind = param_kind_from_name(jb.at("kind").get<std::string>());
    b.shape = jb.at("shape").get<std::vector<int>>();
    b.offset = jb.at("offset").get<std::size_t>();
    layout->blocks.push_back(std::move(b));
  }
  return layout;
}

void save_checkpoint(ConstSpan values, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw RuntimeFault("cannot write " + path);
  const std::size_t written = std::fwrite(values.data(), sizeof(double), values.size(), f);
  std::fclose(f);
  if (written != values.size()) throw RuntimeFault("short write: " + path);
}

std::vector<double> load_checkpoint(const std::string& path, std::size_t expected) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw RuntimeFault("cannot read " + path);
  std::vector<double> v(expected);
  const std::size_t got = std::fread(v.data(), sizeof(double), expected, f);
  // reject trailing bytes as well
  const bool more = std::fgetc(f) != EOF;
  std::fclose(f);
  if (got != expected || more)
    throw RuntimeFault("checkpoint size mismatch: " + path);
  return v;
}

}  // namespace groklab
