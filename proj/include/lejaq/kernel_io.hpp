#pragma once

#include "lejaq/kernel.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace lejaq {

/// Shortest-exact decimal for a double (17 significant digits); parsing the
/// result recovers the same bits, so save/load round trips are byte-stable.
std::string format_real(double x);

/// FNV-1a over raw bytes; used to fingerprint kernels and configurations.
std::uint64_t fnv1a64(std::string_view bytes);

/// Line-oriented self-describing text format (magic "lejaq.kernel.v1").
/// Stores the form, measure, capacity and the form-specific payload with
/// 17-significant-digit reals.
void save_kernel(const EquilibriumKernel& k, std::ostream& out);
void save_kernel_file(const EquilibriumKernel& k, const std::string& path);

EquilibriumKernel load_kernel(std::istream& in);
EquilibriumKernel load_kernel_file(const std::string& path);

/// "fnv1a64:" + 16 hex digits over the serialized kernel text.
std::string kernel_hash(const EquilibriumKernel& k);

}  // namespace lejaq
