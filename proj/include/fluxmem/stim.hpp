#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "fluxmem/core.hpp"

namespace fluxmem {

/// Short-term buffer of the most recent pages. Overflow evicts least recently accessed
/// pages (ties: ascending id) and hands them to the caller.
class StimBuffer {
 public:
  explicit StimBuffer(int capacity = 4);

  /// Inserts `page` with last_access = page.timestamp and returns evicted pages in
  /// ascending last_access order. Throws InvalidArgument on a duplicate id.
  std::vector<Page> push(Page page);

  /// Marks a page as accessed at `now`, or at max(last_access)+1 when no time is given.
  /// The new access time never moves backwards.
  void touch(std::string_view page_id, std::optional<Timestamp> now = std::nullopt);

  /// Every buffered page, ascending timestamp (ties: id).
  std::vector<Page> contents() const;

  int capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return pages_.size(); }
  bool empty() const noexcept { return pages_.empty(); }
  bool contains(std::string_view page_id) const;

  /// Raw storage in insertion order; used by snapshots.
  const std::vector<Page>& pages() const noexcept { return pages_; }
  static StimBuffer restore(int capacity, std::vector<Page> pages);

 private:
  int capacity_;
  std::vector<Page> pages_;
};

}  // namespace fluxmem
