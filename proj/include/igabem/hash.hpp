#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace igabem {

/// Incremental FNV-1a, 64 bit.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void value(double x) { bytes(&x, sizeof x); }
  void value(std::int64_t x) { bytes(&x, sizeof x); }
  void text(std::string_view s) { bytes(s.data(), s.size()); }
  void values(std::span<const double> xs) { bytes(xs.data(), xs.size_bytes()); }
  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace igabem
