#include <doctest.h>

#include "fluxmem/error.hpp"
#include "fluxmem/stim.hpp"

using namespace fluxmem;

namespace {

Page page(const std::string& id, Timestamp ts) {
  Page p;
  p.id = id;
  p.user_text = id;
  p.timestamp = ts;
  p.last_access = ts;
  return p;
}

}  // namespace

TEST_CASE("stim evicts the least recently accessed page") {
  StimBuffer s(2);
  CHECK(s.push(page("a", 1)).empty());
  CHECK(s.push(page("b", 2)).empty());
  auto ev = s.push(page("c", 3));
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].id == "a");
  CHECK(s.size() == 2);
  CHECK(s.contains("b"));
  CHECK_FALSE(s.contains("a"));
}

TEST_CASE("touch protects a page from eviction") {
  StimBuffer s(2);
  s.push(page("a", 1));
  s.push(page("b", 2));
  s.touch("a");
  auto ev = s.push(page("c", 3));
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].id == "b");
}

TEST_CASE("touch never moves access time backwards") {
  StimBuffer s(4);
  s.push(page("a", 10));
  s.touch("a", 5);
  CHECK(s.pages()[0].last_access == 10);
  s.touch("a", 20);
  CHECK(s.pages()[0].last_access == 20);
}

TEST_CASE("eviction ties break by ascending id") {
  StimBuffer s(1);
  s.push(page("b", 5));
  auto ev = s.push(page("a", 5));
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].id == "a");
}

TEST_CASE("duplicate ids and bad capacity are rejected") {
  StimBuffer s(2);
  s.push(page("a", 1));
  CHECK_THROWS_AS(s.push(page("a", 2)), InvalidArgument);
  CHECK_THROWS_AS(StimBuffer(0), InvalidArgument);
}

TEST_CASE("contents are chronological") {
  StimBuffer s(3);
  s.push(page("z", 1));
  s.push(page("y", 2));
  s.touch("z");
  const auto c = s.contents();
  REQUIRE(c.size() == 2);
  CHECK(c[0].id == "z");
  CHECK(c[1].id == "y");
}

TEST_CASE("capacity is never exceeded") {
  StimBuffer s(4);
  std::size_t evicted = 0;
  for (int i = 0; i < 50; ++i) {
    evicted += s.push(page("p" + std::to_string(i), i)).size();
    CHECK(s.size() <= 4);
    CHECK(s.size() + evicted == static_cast<std::size_t>(i + 1));
  }
}
