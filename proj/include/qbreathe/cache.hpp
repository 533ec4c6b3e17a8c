#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace qbreathe::driver {

// FNV-1a over the canonical config text; good enough as a cache key since
// every hit is verified against the stored config echo.
std::uint64_t fnv1a64(const std::string& text);
std::string hash_hex(const std::string& text);

// One directory per config hash, atomically published via
// write-to-temporary-then-rename; concurrent publishers race benignly.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path root);

  // Existing entry whose stored canonical config matches, if any.
  std::optional<std::filesystem::path> lookup(const std::string& canonical) const;

  // Run writer(tmp_dir), then publish tmp_dir under the config hash.
  // Returns the final directory (the already-published one if we lost a race).
  std::filesystem::path publish(const std::string& canonical,
                                const std::function<void(const std::filesystem::path&)>& writer);

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::filesystem::path dir_for(const std::string& canonical) const;
};

}  // namespace qbreathe::driver
