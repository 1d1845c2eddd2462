#include "groklab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "groklab/common.hpp"
#include "groklab/rng.hpp"

namespace groklab {

std::array<int, 5> s5_unrank(int rank) {
  if (rank < 0 || rank >= 120) throw RuntimeFault("s5_unrank: rank out of range");
  std::array<int, 5> pool{0, 1, 2, 3, 4};
  std::array<int, 5> perm{};
  int fact[5] = {24, 6, 2, 1, 1};
  int avail = 5;
  for (int pos = 0; pos < 5; ++pos) {
    const int idx = rank / fact[pos];
    rank %= fact[pos];
    perm[pos] = pool[idx];
    for (int j = idx; j < avail - 1; ++j) pool[j] = pool[j + 1];
    --avail;
  }
  return perm;
}

int s5_rank(const std::array<int, 5>& perm) {
  int fact[5] = {24, 6, 2, 1, 1};
  int rank = 0;
  std::array<bool, 5> used{};
  for (int pos = 0; pos < 5; ++pos) {
    int smaller = 0;
    for (int v = 0; v < perm[pos]; ++v)
      if (!used[v]) ++smaller;
    rank += smaller * fact[pos];
    used[perm[pos]] = true;
  }
  return rank;
}

int s5_compose_rank(int a, int b) {
  const auto pa = s5_unrank(a);
  const auto pb = s5_unrank(b);
  std::array<int, 5> c{};
  for (int x = 0; x < 5; ++x) c[x] = pa[pb[x]];
  return s5_rank(c);
}

Dataset build_dataset(OpKind op, int p, int q, bool symmetric) {
  if (p <= 1) throw ConfigError("build_dataset: p must be >= 2");
  if (q <= 1) throw ConfigError("build_dataset: q must be >= 2");
  if (op == OpKind::mod_add && q != p)
    throw ConfigError("build_dataset: mod_add requires q == p");
  if (op == OpKind::s5_compose) {
    if (p != 120 || q != 120)
      throw ConfigError("build_dataset: s5_compose requires p == q == 120");
    if (symmetric) throw ConfigError("build_dataset: s5_compose is not commutative");
  }

  Dataset ds;
  ds.op = op;
  ds.p = p;
  ds.q = q;
  ds.symmetric = symmetric;
  // answer classes take ids 0..q-1; operands share them when p == q,
  // otherwise they get their own block
  ds.operand_base = (p == q) ? 0 : q;
  const int operand_top = (p == q) ? q : q + p;
  ds.op_token = operand_top;
  ds.eq_token = operand_top + 1;
  ds.vocab_size = operand_top + 2;

  ds.samples.reserve(symmetric ? static_cast<std::size_t>(p) * (p + 1) / 2
                               : static_cast<std::size_t>(p) * p);
  for (int a = 0; a < p; ++a) {
    const int b0 = symmetric ? a : 0;
    for (int b = b0; b < p; ++b) {
      EquationSample s;
      s.a = a;
      s.b = b;
      s.result = (op == OpKind::mod_add) ? (a + b) % q : s5_compose_rank(a, b);
      s.tokens = {ds.operand_base + a, ds.op_token, ds.operand_base + b, ds.eq_token,
                  s.result};
      ds.samples.push_back(s);
    }
  }
  return ds;
}

Split make_split(const Dataset& ds, double r, std::uint64_t seed) {
  if (!(r > 0.0 && r < 1.0)) throw ConfigError("split: r must be in (0,1)");
  const std::size_t n = ds.samples.size();
  const std::size_t n_train = static_cast<std::size_t>(std::floor(r * static_cast<double>(n)));
  if (n_train < 1 || n - n_train < 1)
    throw ConfigError("split: degenerate split sizes");

  std::vector<std::int32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);

  Split sp;
  sp.r = r;
  sp.seed = seed;
  sp.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  sp.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return sp;
}

Batch batch_encode(const std::vector<std::int32_t>& indices, const Dataset& ds) {
  Batch b;
  b.n = static_cast<int>(indices.size());
  b.tokens.reserve(indices.size() * 4);
  b.labels.reserve(indices.size());
  for (std::int32_t i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= ds.samples.size())
      throw RuntimeFault("batch_encode: index out of bounds");
    const EquationSample& s = ds.samples[static_cast<std::size_t>(i)];
    for (int t = 0; t < 4; ++t) b.tokens.push_back(s.tokens[static_cast<std::size_t>(t)]);
    b.labels.push_back(s.result);
  }
  return b;
}

}  // namespace groklab
