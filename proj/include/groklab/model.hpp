#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "groklab/common.hpp"
#include "groklab/dataset.hpp"
#include "groklab/param_vector.hpp"

namespace groklab {

enum class Arch { transformer, mlp };

struct ModelConfig {
  Arch arch = Arch::transformer;
  int depth = 2;
  int width = 128;
  int heads = 4;
  int vocab_size = 0;
  int context_len = 4;
  int answer_classes = 0;        // softmax runs over these classes only
  bool tied_embeddings = true;   // output classifier reuses the embedding rows
};

struct LossReport {
  double loss = 0.0;      // mean cross-entropy, nats
  double accuracy = 0.0;  // fraction of argmax hits
};

// Request/response for layer-activation capture during a forward pass.
// For the transformer, `position` selects which token position's vector is
// collected per sample (-1 = the final position, the one the loss reads).
struct ActivationRecord {
  int position = -1;
  std::vector<std::string> layers;
  std::vector<int> dims;
  std::vector<std::vector<double>> values;  // per layer, n x dim row-major
};

// Reference decoder transformer (pre-norm, GELU feed-forward, learned
// positional embeddings, causal masking, loss read from the final position)
// and a small two-embedding MLP used where transformer runs would be too
// slow. Both share the flat parameter layout and tie the output classifier
// to the token embeddings.
class Model {
 public:
  explicit Model(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  std::shared_ptr<const ParamLayout> layout() const { return layout_; }
  std::size_t param_count() const { return layout_->total; }
  std::size_t non_embedding_param_count() const;
  std::vector<std::string> activation_layer_names() const;

  ParamVector init_params(std::uint64_t seed) const;

  LossReport forward_loss(ConstSpan params, const Batch& batch,
                          ActivationRecord* rec = nullptr,
                          std::vector<double>* logits_out = nullptr) const;

  // Exact reverse-mode gradient of the mean loss; returns the loss report
  // from the same pass.
  LossReport backward(ConstSpan params, const Batch& batch, Span grad) const;

  // Hessian-vector product via forward-mode differentiation of the gradient.
  void hvp(ConstSpan params, const Batch& batch, ConstSpan v, Span out) const;

 private:
  void check_batch(const Batch& batch) const;
  ModelConfig cfg_;
  std::shared_ptr<const ParamLayout> layout_;
};

}  // namespace groklab
