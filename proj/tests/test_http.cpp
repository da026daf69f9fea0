#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "fluxmem/core.hpp"
#include "fluxmem/error.hpp"
#include "fluxmem/extraction.hpp"
#include "fluxmem/http.hpp"
#include "fluxmem/retrieval.hpp"

using namespace fluxmem;
using nlohmann::json;

namespace {

/// Loopback server with canned endpoints, one per behaviour under test.
class FakeProvider {
 public:
  FakeProvider() {
    server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      const auto body = json::parse(req.body);
      json v = json::array();
      for (int i = 0; i < 4; ++i) v.push_back(i == 0 ? 3.0 : (i == 1 ? 4.0 : 0.0));
      if (body.value("model", "") == "wrong-dim") v.push_back(1.0);
      res.set_content(json{{"data", {{{"embedding", v}}}}}.dump(), "application/json");
    });
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      last_prompt_ = body.at("messages").at(0).at("content").get<std::string>();
      std::string content;
      if (last_prompt_.find("CHOICE-TEST") != std::string::npos) {
        content = "Pixel";
      } else {
        content = "```json\n" +
                  json{{"entities", {"Ana", "Lisbon"}},
                       {"relations", {{"Ana", "lives_in", "Lisbon"}, {"Ana", "knows", "Bob"}}},
                       {"summary", "A move."},
                       {"topic", "Travel"},
                       {"facts", {{{"kind", "user_fact"}, {"content", "Ana lives in Lisbon."},
                                   {"confidence", 0.9}}}},
                       {"strategies", {{{"content", "Ask before booking."}}}}}
                      .dump() +
                  "\n```";
      }
      json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/broken/chat/completions", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "text/plain");
    });
    server_.Post("/fail/chat/completions", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("{\"error\": \"boom\"}", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeProvider() {
    server_.stop();
    thread_.join();
  }

  std::string base(const std::string& prefix = "/v1") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }
  const std::string& last_auth() const { return last_auth_; }
  const std::string& last_prompt() const { return last_prompt_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string last_auth_;
  std::string last_prompt_;
};

}  // namespace

TEST_CASE("http embedder normalizes the returned vector and sends the key") {
  FakeProvider fake;
  HttpEmbedder e(fake.base() + "/embeddings", "secret", 4, "m");
  const auto v = e.embed("hello world");
  REQUIRE(v.size() == 4);
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  CHECK(fake.last_auth() == "Bearer secret");
  // Empty text never reaches the network.
  CHECK(l2_norm(e.embed("  ")) == 0.0);
}

TEST_CASE("http embedder rejects a wrong dimension") {
  FakeProvider fake;
  HttpEmbedder e(fake.base() + "/embeddings", "", 4, "wrong-dim");
  CHECK_THROWS_AS(e.embed("hello"), DimensionMismatch);
}

TEST_CASE("llm extractor parses fenced replies") {
  FakeProvider fake;
  LlmExtractor x({fake.base(), "k", "test-model"});
  CHECK(x.extract_entities("Ana moved to Lisbon.") == std::vector<std::string>{"ana", "lisbon"});
  const auto r = x.extract_relations("Ana moved to Lisbon.");
  // The triple whose tail is not a declared entity is dropped.
  REQUIRE(r.size() == 1);
  CHECK(r[0] == RelationTriple{"ana", "lives_in", "lisbon"});
  CHECK(fake.last_prompt().find("Ana moved to Lisbon.") != std::string::npos);

  Page p;
  p.id = "p";
  p.user_text = "I moved.";
  std::vector<Page> pages{p};
  CHECK(x.summarize(pages) == "A move.");
  CHECK(x.topic_label(pages) == "travel");
  const auto facts = x.extract_facts(pages, "");
  REQUIRE(facts.size() == 2);
  CHECK(facts[0].kind == FactKind::UserFact);
  CHECK(facts[0].confidence == doctest::Approx(0.9));
  CHECK(facts[1].kind == FactKind::Strategy);
  CHECK(facts[1].confidence == doctest::Approx(0.5));
}

TEST_CASE("http responder returns the completion") {
  FakeProvider fake;
  retrieval::HttpResponder r({fake.base(), "", "m"});
  retrieval::FusedContext ctx;
  ctx.query = "CHOICE-TEST name of my cat?";
  ctx.rendered = retrieval::render(ctx);
  const std::vector<std::string> choices{"Pixel", "Tom"};
  CHECK(r.respond(ctx, choices) == "Pixel");
  CHECK(fake.last_prompt().find("Tom") != std::string::npos);
}

TEST_CASE("provider failures map to typed errors") {
  FakeProvider fake;
  CHECK_THROWS_AS(chat_complete({fake.base("/fail"), "", "m"}, "hi"), ProviderError);
  CHECK_THROWS_AS(chat_complete({fake.base("/broken"), "", "m"}, "hi"), MalformedResponse);
  CHECK_THROWS_AS(chat_complete({"", "", "m"}, "hi"), ProviderError);
}

TEST_CASE("unreachable endpoint raises ProviderError") {
  CHECK_THROWS_AS(http::post_json("http://127.0.0.1:1/x", "", json::object(),
                                  std::chrono::seconds(2)),
                  ProviderError);
  HttpEmbedder e("http://127.0.0.1:1/embeddings", "", 4);
  CHECK_THROWS_AS(e.embed("hello"), ProviderError);
  CHECK_THROWS_AS(http::post_json("ftp://example", "", json::object()), Error);
}
