#pragma once

#include <cstddef>
#include <list>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace pfcc::sim {

// Bounded set with least-recently-used replacement.
template <typename Key, typename Hash = std::hash<Key>>
class LruSet {
 public:
  explicit LruSet(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("LruSet capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }
  bool contains(const Key& key) const { return index_.contains(key); }

  // Marks key most recently used. Returns false if absent.
  bool touch(const Key& key) {
    auto it = index_.find(key);
    if (it == index_.end()) return false;
    order_.splice(order_.end(), order_, it->second);
    return true;
  }

  // Inserts or refreshes key. Returns the key displaced to make room, if any.
  std::optional<Key> insert(const Key& key) {
    if (touch(key)) return std::nullopt;
    std::optional<Key> victim;
    if (index_.size() == capacity_) {
      victim = order_.front();
      index_.erase(order_.front());
      order_.pop_front();
    }
    order_.push_back(key);
    index_.emplace(key, std::prev(order_.end()));
    return victim;
  }

  bool erase(const Key& key) {
    auto it = index_.find(key);
    if (it == index_.end()) return false;
    order_.erase(it->second);
    index_.erase(it);
    return true;
  }

  void clear() {
    order_.clear();
    index_.clear();
  }

  // Least recently used first.
  std::vector<Key> keys() const { return {order_.begin(), order_.end()}; }

 private:
  std::size_t capacity_;
  std::list<Key> order_;
  std::unordered_map<Key, typename std::list<Key>::iterator, Hash> index_;
};

}  // namespace pfcc::sim
