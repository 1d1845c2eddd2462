#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace groklab {

// Fault raised by any module on invalid input or an unrecoverable
// numeric/runtime condition. The CLI maps config-shaped errors to exit
// code 2 and everything else to 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class RuntimeFault : public std::runtime_error {
 public:
  explicit RuntimeFault(const std::string& msg) : std::runtime_error(msg) {}
};

using Span = std::span<double>;
using ConstSpan = std::span<const double>;

double dot(ConstSpan a, ConstSpan b);
double norm2(ConstSpan a);
// Cosine of the angle between two flat vectors; throws on a zero vector.
double cosine(ConstSpan a, ConstSpan b);

// FNV-1a, used for config hashes.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace groklab
