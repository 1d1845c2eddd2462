#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "groklab/common.hpp"

namespace groklab {

enum class ParamKind { weight_matrix, bias, embedding, norm_gain };

const char* param_kind_name(ParamKind k);
ParamKind param_kind_from_name(const std::string& s);

struct ParamBlock {
  std::string name;
  ParamKind kind = ParamKind::bias;
  std::vector<int> shape;  // {rows, cols} for matrices/embeddings, {n} otherwise
  std::size_t offset = 0;

  std::size_t size() const;
  // Filters: rows for weight matrices and embeddings, single scalars for
  // biases and norm gains.
  int filter_count() const;
  int filter_len() const;
};

struct ParamLayout {
  std::vector<ParamBlock> blocks;
  std::size_t total = 0;

  const ParamBlock& block(const std::string& name) const;
  bool compatible_with(const ParamLayout& other) const;
};

// Flat 64-bit parameter state. The layout is shared by every checkpoint of a
// run, so it lives behind a shared_ptr.
struct ParamVector {
  std::shared_ptr<const ParamLayout> layout;
  std::vector<double> values;

  Span span() { return values; }
  ConstSpan span() const { return values; }
};

ParamVector make_params(std::shared_ptr<const ParamLayout> layout);

void write_layout_json(const ParamLayout& layout, const std::string& path);
std::shared_ptr<const ParamLayout> read_layout_json(const std::string& path);

// Raw little-endian doubles, values only; pair with layout.json.
void save_checkpoint(ConstSpan values, const std::string& path);
std::vector<double> load_checkpoint(const std::string& path, std::size_t expected);

}  // namespace groklab
