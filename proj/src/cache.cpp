#include "qbreathe/cache.hpp"

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbreathe/common.hpp"

namespace qbreathe::driver {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

ResultCache::ResultCache(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw config_error("cache: cannot create '" + root_.string() + "': " + ec.message());
}

fs::path ResultCache::dir_for(const std::string& canonical) const {
  return root_ / hash_hex(canonical);
}

std::optional<fs::path> ResultCache::lookup(const std::string& canonical) const {
  const fs::path dir = dir_for(canonical);
  const fs::path echo = dir / "config.txt";
  if (!fs::exists(echo)) return std::nullopt;
  std::ifstream in(echo);
  std::stringstream ss;
  ss << in.rdbuf();
  if (ss.str() != canonical) return std::nullopt;  // hash collision or stale entry
  return dir;
}

fs::path ResultCache::publish(const std::string& canonical,
                              const std::function<void(const fs::path&)>& writer) {
  if (auto hit = lookup(canonical)) return *hit;

  const fs::path final_dir = dir_for(canonical);
  const fs::path tmp = root_ / ("tmp." + hash_hex(canonical) + "." +
                                std::to_string(::getpid()));
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  writer(tmp);
  {
    std::ofstream echo(tmp / "config.txt");
    echo << canonical;
    if (!echo) throw config_error("cache: cannot write config echo");
  }

  fs::rename(tmp, final_dir, ec);
  if (ec) {
    // lost a race to a concurrent worker: keep theirs
    if (fs::exists(final_dir / "config.txt")) {
      fs::remove_all(tmp, ec);
      return final_dir;
    }
    throw config_error("cache: publish failed: " + ec.message());
  }
  return final_dir;
}

}  // namespace qbreathe::driver
