#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace groklab {

enum class OpKind { mod_add, s5_compose };

// One equation "a op b = result", tokenized as <a><op><b><=><result>.
struct EquationSample {
  int a = 0;
  int b = 0;
  int result = 0;
  std::array<std::int32_t, 5> tokens{};
};

struct Dataset {
  OpKind op = OpKind::mod_add;
  int p = 0;             // operand count
  int q = 0;             // answer classes
  bool symmetric = false;
  std::vector<EquationSample> samples;
  int vocab_size = 0;
  std::int32_t op_token = 0;
  std::int32_t eq_token = 0;
  std::int32_t operand_base = 0;  // operand token ids start here (0 when shared with answers)
};

struct Split {
  std::vector<std::int32_t> train;
  std::vector<std::int32_t> val;
  double r = 0.0;
  std::uint64_t seed = 0;
};

// Token matrix (n x 4, row-major: <a><op><b><=>) plus answer class ids.
struct Batch {
  std::vector<std::int32_t> tokens;
  std::vector<std::int32_t> labels;
  int n = 0;
  int context_len = 4;
};

// Full operation table, row-major over (a, b); unordered pairs only when
// symmetric. For s5_compose the elements are the 120 permutations of five
// symbols indexed by lexicographic rank, and p == q == 120 is required.
Dataset build_dataset(OpKind op, int p, int q, bool symmetric);

// Uniform shuffle of all sample indices followed by a prefix split of size
// floor(r * n). Deterministic for a given seed.
Split make_split(const Dataset& ds, double r, std::uint64_t seed);

Batch batch_encode(const std::vector<std::int32_t>& indices, const Dataset& ds);

// s5 helpers (exposed for tests)
std::array<int, 5> s5_unrank(int rank);
int s5_rank(const std::array<int, 5>& perm);
int s5_compose_rank(int a, int b);  // rank of a(b(.))

}  // namespace groklab
