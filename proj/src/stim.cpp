#include "fluxmem/stim.hpp"

#include <algorithm>

namespace fluxmem {

StimBuffer::StimBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw InvalidArgument("STIM capacity must be >= 1");
}

bool StimBuffer::contains(std::string_view page_id) const {
  return std::any_of(pages_.begin(), pages_.end(),
                     [&](const Page& p) { return p.id == page_id; });
}

std::vector<Page> StimBuffer::push(Page page) {
  if (contains(page.id)) {
    throw InvalidArgument("page '" + page.id + "' is already in STIM");
  }
  page.last_access = page.timestamp;
  pages_.push_back(std::move(page));

  std::vector<Page> evicted;
  const auto cap = static_cast<std::size_t>(capacity_);
  if (pages_.size() <= cap) return evicted;

  // Partition so the |pages|-C least recently accessed pages sit at the front.
  auto lru_order = [](const Page& a, const Page& b) {
    if (a.last_access != b.last_access) return a.last_access < b.last_access;
    return a.id < b.id;
  };
  std::vector<Page> sorted = std::move(pages_);
  std::stable_sort(sorted.begin(), sorted.end(), lru_order);
  const std::size_t overflow = sorted.size() - cap;
  evicted.assign(std::make_move_iterator(sorted.begin()),
                 std::make_move_iterator(sorted.begin() + static_cast<std::ptrdiff_t>(overflow)));
  pages_.assign(std::make_move_iterator(sorted.begin() + static_cast<std::ptrdiff_t>(overflow)),
                std::make_move_iterator(sorted.end()));
  return evicted;
}

void StimBuffer::touch(std::string_view page_id, std::optional<Timestamp> now) {
  auto it = std::find_if(pages_.begin(), pages_.end(),
                         [&](const Page& p) { return p.id == page_id; });
  if (it == pages_.end()) {
    throw InvalidArgument("page '" + std::string(page_id) + "' is not in STIM");
  }
  Timestamp logical = 0;
  for (const auto& p : pages_) logical = std::max(logical, p.last_access);
  const Timestamp when = now.value_or(logical + 1);
  it->last_access = std::max(it->last_access, when);
}

std::vector<Page> StimBuffer::contents() const {
  std::vector<Page> out = pages_;
  std::stable_sort(out.begin(), out.end(), [](const Page& a, const Page& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.id < b.id;
  });
  return out;
}

StimBuffer StimBuffer::restore(int capacity, std::vector<Page> pages) {
  StimBuffer buffer(capacity);
  if (pages.size() > static_cast<std::size_t>(capacity)) {
    throw InvalidArgument("STIM snapshot holds more pages than its capacity");
  }
  buffer.pages_ = std::move(pages);
  return buffer;
}

}  // namespace fluxmem
