#pragma once

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pfcc/channel_config.hpp"
#include "pfcc/types.hpp"

namespace pfcc::live {

inline std::string errno_text(int err) { return std::strerror(err); }

// Private, read-only mapping of the backing file shared by trojan and spy.
// Readahead on the mapping is switched off so that faulting one page of a pair
// does not drag the other one into the page cache.
class SharedRegion {
 public:
  static SharedRegion open(const std::filesystem::path& path, const ChannelConfig& cfg) {
    if (cfg.region_size == 0) throw ConfigError("region_size must be positive");
    validate(cfg);

    const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) {
      const int err = errno;
      throw SetupError("cannot open region file " + path.string() + ": " + errno_text(err) +
                       " (create one with: dd if=/dev/urandom of=" + path.string() + " bs=1M count=" +
                       std::to_string((cfg.region_size + kMiB - 1) / kMiB) + ")");
    }
    SharedRegion region;
    region.fd_ = fd;
    region.path_ = path;
    region.page_size_ = cfg.page_size;
    region.length_ = cfg.region_size;

    struct stat st {};
    if (::fstat(fd, &st) != 0) throw SetupError("cannot stat " + path.string() + ": " + errno_text(errno));
    if (!S_ISREG(st.st_mode)) throw SetupError(path.string() + " is not a regular file");
    if (static_cast<std::uint64_t>(st.st_size) < cfg.region_size) {
      throw SetupError("region file " + path.string() + " holds " + std::to_string(st.st_size) +
                       " bytes, region_size needs " + std::to_string(cfg.region_size) +
                       " (grow it with dd, not truncate: holes never touch the disk)");
    }
    if (static_cast<std::uint64_t>(::sysconf(_SC_PAGESIZE)) != cfg.page_size) {
      throw ConfigError("page_size " + std::to_string(cfg.page_size) + " differs from the host page size " +
                        std::to_string(::sysconf(_SC_PAGESIZE)));
    }

    void* base = ::mmap(nullptr, region.length_, PROT_READ, MAP_PRIVATE, fd, 0);
    if (base == MAP_FAILED) throw SetupError("mmap of " + path.string() + " failed: " + errno_text(errno));
    region.base_ = static_cast<const std::uint8_t*>(base);
    ::madvise(base, region.length_, MADV_RANDOM);
    ::posix_fadvise(fd, 0, static_cast<off_t>(region.length_), POSIX_FADV_RANDOM);
    return region;
  }

  SharedRegion(SharedRegion&& other) noexcept { swap(other); }
  SharedRegion& operator=(SharedRegion other) noexcept {
    swap(other);
    return *this;
  }
  SharedRegion(const SharedRegion&) = delete;
  ~SharedRegion() {
    if (base_) ::munmap(const_cast<std::uint8_t*>(base_), length_);
    if (fd_ >= 0) ::close(fd_);
  }

  const std::filesystem::path& path() const { return path_; }
  std::uint64_t length() const { return length_; }
  std::uint64_t page_size() const { return page_size_; }
  std::uint64_t page_count() const { return length_ / page_size_; }

  // One load from the start of the page. Faults the page in if needed.
  std::uint8_t read_page(PageIndex page) const {
    return *static_cast<const volatile std::uint8_t*>(base_ + offset(page));
  }

  // Page-cache residency as reported by mincore, or nullopt if the probe failed.
  std::optional<bool> resident(PageIndex page) const {
    unsigned char vec = 0;
    if (::mincore(const_cast<std::uint8_t*>(base_) + offset(page), page_size_, &vec) != 0) return std::nullopt;
    return (vec & 1) != 0;
  }

  // Drops this process's page-table entry for the page. The page-cache copy stays.
  bool release_mapping(PageIndex page) const {
    return ::madvise(const_cast<std::uint8_t*>(base_) + offset(page), page_size_, MADV_DONTNEED) == 0;
  }

  // "Don't need" advice for one page. Returns 0 or the error number.
  int advise_evict(PageIndex page) const {
    return ::posix_fadvise(fd_, static_cast<off_t>(offset(page)), static_cast<off_t>(page_size_),
                           POSIX_FADV_DONTNEED);
  }

  // Whole-region drop. Dirty pages cannot be dropped, so a file written moments
  // ago (say by dd) is flushed first.
  int advise_evict_all() const {
    ::fdatasync(fd_);
    ::madvise(const_cast<std::uint8_t*>(base_), length_, MADV_DONTNEED);
    return ::posix_fadvise(fd_, 0, static_cast<off_t>(length_), POSIX_FADV_DONTNEED);
  }

 private:
  SharedRegion() = default;

  std::uint64_t offset(PageIndex page) const {
    if (page >= page_count()) throw ConfigError("page " + std::to_string(page) + " outside the region");
    return page * page_size_;
  }

  void swap(SharedRegion& other) noexcept {
    std::swap(fd_, other.fd_);
    std::swap(base_, other.base_);
    std::swap(length_, other.length_);
    std::swap(page_size_, other.page_size_);
    std::swap(path_, other.path_);
  }

  int fd_ = -1;
  const std::uint8_t* base_ = nullptr;
  std::uint64_t length_ = 0;
  std::uint64_t page_size_ = 4096;
  std::filesystem::path path_;
};

// Writes `bytes` of pseudo-random data, syncs it so every page is backed by a
// real disk block, then drops it from the page cache. Written data can sit in
// large folios that per-page advice cannot split; after the drop, faults bring
// pages back one at a time.
inline void create_backing_file(const std::filesystem::path& path, std::uint64_t bytes, std::uint64_t seed = 1) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw SetupError("cannot create " + path.string() + ": " + errno_text(errno));
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> chunk(1 << 13);
  std::uint64_t written = 0;
  while (written < bytes) {
    for (auto& w : chunk) w = rng();
    const auto n = std::min<std::uint64_t>(bytes - written, chunk.size() * sizeof(std::uint64_t));
    const auto r = ::write(fd, chunk.data(), n);
    if (r <= 0) {
      const int err = errno;
      ::close(fd);
      throw SetupError("write to " + path.string() + " failed: " + errno_text(err));
    }
    written += static_cast<std::uint64_t>(r);
  }
  ::fsync(fd);
  ::posix_fadvise(fd, 0, static_cast<off_t>(bytes), POSIX_FADV_DONTNEED);
  ::close(fd);
}

}  // namespace pfcc::live
