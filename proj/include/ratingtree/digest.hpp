#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

namespace ratingtree {

// FNV-1a 64-bit. Used for artifact change detection, not cryptography.
class Fnv1a64 {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ull;
    }
  }
  std::uint64_t value() const { return hash_; }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t h = hash_;
    for (int i = 15; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = digits[h & 0xf];
      h >>= 4;
    }
    return out;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  Fnv1a64 fnv;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    fnv.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  }
  return "fnv1a64:" + fnv.hex();
}

}  // namespace ratingtree
