// Copyright 2026 The t2a-score Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cmath>
#include <cstring>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "t2a/codec.hpp"
#include "t2a/embedding_cache.hpp"
#include "t2a/error.hpp"
#include "t2a/remote_provider.hpp"
#include "t2a/rng.hpp"
#include "t2a/stub_provider.hpp"
#include "t2a/synth.hpp"
#include "test_support.hpp"

using namespace t2a;
using json = nlohmann::json;
using t2a::testing::TempDir;

namespace {

EmbeddingVector basis(std::size_t d, std::size_t k, float sign = 1.0f) {
  EmbeddingVector v;
  v.values.assign(d, 0.0f);
  v.values[k] = sign;
  v.unit_norm = true;
  return v;
}

double norm(const EmbeddingVector& v) {
  double s = 0;
  for (float x : v.values) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

AudioClip tone(double freq, double on, double off, double duration) {
  const ToneEvent ev{freq, on, off, 0.5, 0.005};
  return render_events(std::span(&ev, 1), duration);
}

ProviderError::Kind provider_error_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ProviderError& e) {
    return e.kind();
  }
  FAIL("expected ProviderError");
  return ProviderError::Kind::kInvalidInput;
}

// In-process HTTP server speaking the provider protocol.
class MockServer {
 public:
  std::atomic<int> embed_calls{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  std::atomic<int> fail_first{0};  // answer this many requests with `fail_status`
  int fail_status = 503;
  std::atomic<int> reply_dim{8};
  std::atomic<int> drop_one{0};   // return one embedding too few
  std::atomic<int> delay_ms{0};
  std::string last_auth;
  json decompose_reply;
  json last_audio_body;
  std::mutex mu;

  MockServer() {
    svr_.Post("/v1/embed_text", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      std::vector<std::string> texts = body.at("texts").get<std::vector<std::string>>();
      handle_embed(req, res, texts);
    });
    svr_.Post("/v1/embed_audio", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      {
        std::lock_guard lock(mu);
        last_audio_body = body;
      }
      std::vector<std::string> keys;
      for (const auto& c : body.at("clips")) keys.push_back(c.at("id").get<std::string>());
      handle_embed(req, res, keys);
    });
    svr_.Post("/v1/separate", [](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body);
      auto pcm = base64_to_pcm(body.at("pcm_b64").get<std::string>());
      for (float& s : pcm) s *= 0.5f;
      if (body.at("caption") == "short") pcm.pop_back();
      res.set_content(json{{"pcm_b64", pcm_to_base64(pcm)}}.dump(), "application/json");
    });
    svr_.Post("/v1/decompose", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mu);
      res.set_content(decompose_reply.dump(), "application/json");
    });
    port_ = svr_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }
  ~MockServer() {
    svr_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/"; }

  ProviderConfig config(std::size_t dim = 8) const {
    ProviderConfig c;
    c.kind = ProviderKind::kRemote;
    c.endpoint_url = url();
    c.dim = dim;
    c.timeout_s = 5.0;
    c.retry.backoff = {std::chrono::milliseconds(1)};
    return c;
  }

  static std::vector<float> vector_for(const std::string& key, int dim) {
    std::vector<float> v(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) v[static_cast<std::size_t>(k)] = static_cast<float>((key.size() * 31 + k * 7) % 11) + 1.0f;
    return v;
  }

 private:
  void handle_embed(const httplib::Request& req, httplib::Response& res, const std::vector<std::string>& keys) {
    const int now = ++in_flight;
    for (int p = peak.load(); now > p && !peak.compare_exchange_weak(p, now);) {
    }
    ++embed_calls;
    {
      std::lock_guard lock(mu);
      last_auth = req.get_header_value("Authorization");
    }
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms.load()));
    --in_flight;
    if (fail_first > 0) {
      --fail_first;
      res.status = fail_status;
      res.set_content(json{{"error", "busy"}}.dump(), "application/json");
      return;
    }
    json rows = json::array();
    for (const auto& k : keys) rows.push_back(vector_for(k, reply_dim));
    if (drop_one > 0 && !rows.empty()) rows.erase(rows.end() - 1);
    res.set_content(json{{"dim", reply_dim.load()}, {"embeddings", rows}}.dump(), "application/json");
  }

  httplib::Server svr_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("similarity basics") {
  const auto v = unit_normalize(std::vector<double>{3.0, 4.0});
  CHECK(v.unit_norm);
  CHECK(similarity(v, v) == doctest::Approx(1.0).epsilon(1e-6));
  EmbeddingVector neg = v;
  for (float& x : neg.values) x = -x;
  CHECK(similarity(v, neg) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(similarity(basis(4, 0), basis(4, 2)) == 0.0);
  CHECK(similarity(v, basis(2, 1)) == similarity(basis(2, 1), v));
  CHECK_THROWS_AS(similarity(basis(3, 0), basis(4, 0)), std::invalid_argument);
  EmbeddingVector raw;
  raw.values = {2.0f, 0.0f};
  CHECK_THROWS_AS(similarity(raw, raw), std::invalid_argument);
  const auto zero = unit_normalize(std::vector<double>{0.0, 0.0});
  CHECK_FALSE(zero.unit_norm);
}

TEST_CASE("config validation") {
  ProviderConfig c;
  CHECK_NOTHROW(validate(c));
  c.kind = ProviderKind::kRemote;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c.endpoint_url = "http://localhost:1";
  CHECK_NOTHROW(validate(c));
  c.max_in_flight = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("codec vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const std::pair<const char*, const char*> cases[] = {{"", ""},         {"f", "Zg=="},         {"fo", "Zm8="},
                                                       {"foo", "Zm9v"},  {"foob", "Zm9vYg=="},  {"fooba", "Zm9vYmE="},
                                                       {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, enc] : cases) {
    const std::string p(plain);
    const std::vector<std::uint8_t> bytes(p.begin(), p.end());
    CHECK(base64_encode(bytes) == enc);
    CHECK(base64_decode(enc) == bytes);
  }
  const std::vector<float> pcm = {0.0f, -1.0f, 0.25f, 1e-20f};
  CHECK(base64_to_pcm(pcm_to_base64(pcm)) == pcm);
  CHECK_THROWS_AS(base64_to_pcm("Zm8="), InputError);
}

TEST_CASE("stub text embeddings") {
  const StubProvider stub(512, StubLexicon::builtin());
  const std::vector<std::string> texts = {"dog barking", "dog barking", "a quiet hum", "Rain falls!"};
  const auto vs = stub.embed_text(texts);
  REQUIRE(vs.size() == 4);
  CHECK(vs[0] == vs[1]);
  for (const auto& v : vs) {
    CHECK(v.dim() == 512);
    CHECK(std::fabs(norm(v) - 1.0) < 1e-6);
  }
  CHECK(vs[3] == stub.embed_text(std::string("rain falls")));
  // A separate instance stands in for a separate process.
  const StubProvider other(512, StubLexicon::builtin());
  CHECK(other.embed_text(std::string("dog barking")) == vs[0]);
  CHECK(provider_error_kind([&] { stub.embed_text(std::span<const std::string>()); }) ==
        ProviderError::Kind::kInvalidInput);
  CHECK(provider_error_kind([&] { stub.embed_text(std::string(" ")); }) == ProviderError::Kind::kInvalidInput);
}

TEST_CASE("stub audio embedding of a pure tone is the lexicon phrase") {
  const StubProvider stub(512, StubLexicon::builtin());
  const AudioClip clip = tone(440.0, 0.0, 1.0, 1.0);
  CHECK(stub.dominant_phrase(clip) == "a bell rings");
  CHECK(stub.embed_audio(clip) == stub.embed_text(std::string("a bell rings")));
  AudioClip quiet;
  quiet.samples.assign(1600, 0.0f);
  CHECK(stub.embed_audio(quiet) == stub.embed_text(std::string(StubProvider::kSilenceText)));
  CHECK(provider_error_kind([&] { stub.embed_audio(std::span<const AudioClip>()); }) ==
        ProviderError::Kind::kInvalidInput);
}

TEST_CASE("stub alignment over the whole lexicon") {
  const StubProvider stub(512, StubLexicon::builtin());
  const auto& entries = stub.lexicon().entries();
  for (const auto& t : entries) {
    const AudioClip clip = tone(t.center_hz, 0.2, 0.8, 1.0);
    const auto audio = stub.embed_audio(stub.separate(clip, t.text));
    for (const auto& u : entries) {
      const double sim = similarity(stub.embed_text(u.text), audio);
      if (&u == &t) {
        CHECK(sim >= 0.99);
      } else {
        CHECK(sim < 0.2);
      }
    }
  }
}

TEST_CASE("stub separation isolates one band") {
  const StubProvider stub(512, StubLexicon::builtin());
  const ToneEvent events[] = {{440.0, 1.0, 2.0, 0.5, 0.0}, {1000.0, 3.0, 4.0, 0.5, 0.0}};
  const AudioClip mix = render_events(events, 5.0);
  const AudioClip stem = stub.separate(mix, "a bell rings");
  REQUIRE(stem.samples.size() == mix.samples.size());
  const EventSpan span = detect_active_span(normalize_envelope(compute_envelope(stem)), 0.3);
  REQUIRE(span.detected);
  CHECK(std::fabs(span.onset_s - 1.0) <= 0.01);
  CHECK(std::fabs(span.offset_s - 2.0) <= 0.01);

  const AudioClip unknown = stub.separate(mix, "a tuba plays");
  CHECK(unknown.samples.size() == mix.samples.size());
  CHECK(std::all_of(unknown.samples.begin(), unknown.samples.end(), [](float s) { return s == 0.0f; }));

  Rng rng(4);
  const auto& entries = stub.lexicon().entries();
  for (int trial = 0; trial < 50; ++trial) {
    AudioClip clip;
    clip.sample_rate = trial % 2 == 0 ? 16000 : 44100;
    clip.samples.resize(1 + uniform_index(rng, 30000));
    for (float& s : clip.samples) s = static_cast<float>(uniform_real(rng, -0.5, 0.5));
    const auto caption = trial % 5 == 0 ? std::string("unknown") : entries[uniform_index(rng, entries.size())].text;
    const AudioClip out = stub.separate(clip, caption);
    REQUIRE(out.samples.size() == clip.samples.size());
    REQUIRE(out.sample_rate == clip.sample_rate);
  }
}

TEST_CASE("stub decompose delegates to the rule parser") {
  const StubProvider stub(64, StubLexicon::builtin());
  Rng rng(9);
  const auto& entries = stub.lexicon().entries();
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 4);
    std::vector<std::string> events;
    std::vector<Relation> links;
    for (std::size_t i = 0; i < n; ++i) {
      events.push_back(entries[uniform_index(rng, entries.size())].text);
      if (i > 0) links.push_back(uniform_index(rng, 2) == 0 ? Relation::kBefore : Relation::kSimultaneous);
    }
    const std::string caption = compose_caption(EventList::from_links(events, links));
    REQUIRE(stub.decompose(caption) == decompose_caption(caption));
  }
}

TEST_CASE("lexicon file loading") {
  TempDir dir("lex");
  {
    std::ofstream out(dir / "lex.json");
    out << R"({"entries": [{"text": "a gong sounds", "center_hz": 300}, {"text": "a kettle whistles", "center_hz": 2500}]})";
  }
  const StubLexicon lex = StubLexicon::load(dir / "lex.json");
  CHECK(lex.entries().size() == 2);
  REQUIRE(lex.find("The gong sounds") != nullptr);
  CHECK(lex.find("The gong sounds")->center_hz == 300.0);
  CHECK(lex.find("a dog barks") == nullptr);
  CHECK(lex.digest() != StubLexicon::builtin().digest());
  {
    std::ofstream out(dir / "bad.json");
    out << R"({"entries": [{"text": "x"}]})";
  }
  CHECK_THROWS_AS(StubLexicon::load(dir / "bad.json"), InputError);
}

TEST_CASE("stub never exceeds max_in_flight") {
  StubProvider stub(32, StubLexicon::builtin(), 3);
  stub.set_call_delay(std::chrono::milliseconds(15));
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 12; ++t) {
      threads.emplace_back([&stub, t] { stub.embed_text(std::string("thread ") + std::to_string(t)); });
    }
  }
  CHECK(stub.peak_in_flight() <= 3);
  CHECK(stub.peak_in_flight() >= 2);
  CHECK(stub.total_calls() == 12);
}

TEST_CASE("embedding cache is transparent and persistent") {
  TempDir dir("cache");
  const StubProvider plain(128, StubLexicon::builtin());
  const std::vector<std::string> texts = {"dog barking", "a bell rings", "rain falls"};
  const AudioClip clip = tone(2000.0, 0.1, 0.5, 0.6);

  std::vector<EmbeddingVector> first;
  {
    CachingProvider cached(std::make_unique<StubProvider>(128, StubLexicon::builtin()), dir.path());
    first = cached.embed_text(texts);
    CHECK(cached.cache().misses() == 3);
    CHECK(cached.embed_audio(clip) == plain.embed_audio(clip));
    const auto path = cached.cache().path_for(CachingProvider::text_key(cached.fingerprint(), "dog barking"));
    CHECK(path.extension() == ".bin");
    CHECK(path.stem().string().size() == 64);
    CHECK(std::filesystem::file_size(path) == 8 + 4 * 128);
  }
  CachingProvider again(std::make_unique<StubProvider>(128, StubLexicon::builtin()), dir.path());
  const auto second = again.embed_text(texts);
  CHECK(again.cache().hits() == 3);
  CHECK(again.cache().misses() == 0);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    CHECK(second[i] == first[i]);
    CHECK(second[i] == plain.embed_text(texts[i]));
  }
  CHECK(again.embed_audio(clip) == plain.embed_audio(clip));
  CHECK(again.cache().hits() == 4);
}

TEST_CASE("embedding cache under concurrent writers") {
  TempDir dir("cache_mt");
  CachingProvider cached(std::make_unique<StubProvider>(64, StubLexicon::builtin(), 8), dir.path());
  const StubProvider plain(64, StubLexicon::builtin());
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&cached, t] {
        for (int k = 0; k < 20; ++k) cached.embed_text(std::string("text ") + std::to_string((k + t) % 10));
      });
    }
  }
  for (int k = 0; k < 10; ++k) {
    const std::string text = "text " + std::to_string(k);
    CHECK(cached.embed_text(text) == plain.embed_text(text));
  }
}

TEST_CASE("make_provider builds the configured kind") {
  ProviderConfig c;
  c.dim = 16;
  auto p = make_provider(c);
  CHECK(p->dim() == 16);
  CHECK(p->fingerprint().rfind("stub/d16/", 0) == 0);
  TempDir dir("mk");
  c.cache_dir = dir.path();
  CHECK(dynamic_cast<CachingProvider*>(make_provider(c).get()) != nullptr);
}

TEST_CASE("with_retry honours the policy") {
  RetryPolicy policy;
  policy.backoff = {std::chrono::milliseconds(0)};
  int calls = 0;
  const auto flaky = [&] {
    if (++calls < 3) throw ProviderError(ProviderError::Kind::kTimeout, "slow", true);
    return 42;
  };
  CHECK(with_retry(policy, flaky) == 42);
  CHECK(calls == 3);
  calls = 0;
  const auto fatal = [&]() -> int {
    ++calls;
    throw ProviderError(ProviderError::Kind::kHttpStatus, "bad request", false, 400);
  };
  CHECK_THROWS_AS(with_retry(policy, fatal), ProviderError);
  CHECK(calls == 1);
}

TEST_CASE("remote embeddings: order, batching, auth and limits") {
  MockServer server;
  ProviderConfig cfg = server.config();
  cfg.batch_size = 2;
  cfg.max_in_flight = 2;
  cfg.bearer_token = "sekret";
  server.delay_ms = 20;
  const RemoteProvider remote(cfg);
  std::vector<std::string> texts;
  for (int i = 0; i < 7; ++i) texts.push_back(std::string(static_cast<std::size_t>(i + 1), 'x'));
  const auto vs = remote.embed_text(texts);
  REQUIRE(vs.size() == 7);
  CHECK(server.embed_calls == 4);
  CHECK(server.peak <= 2);
  CHECK(remote.peak_in_flight() <= 2);
  CHECK(server.last_auth == "Bearer sekret");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    CHECK(vs[i] == unit_normalize(std::span<const float>(MockServer::vector_for(texts[i], 8))));
  }

  AudioClip clip;
  clip.id = "clip-1";
  clip.sample_rate = 8000;
  clip.samples = {0.1f, -0.2f, 0.3f};
  remote.embed_audio(clip);
  CHECK(server.last_audio_body["sample_rate"] == 8000);
  CHECK(base64_to_pcm(server.last_audio_body["clips"][0]["pcm_b64"].get<std::string>()) == clip.samples);
}

TEST_CASE("remote errors are typed and flagged") {
  MockServer server;
  const RemoteProvider remote(server.config());
  const std::vector<std::string> texts = {"a", "b"};

  server.drop_one = 1;
  CHECK(provider_error_kind([&] { remote.embed_text(texts); }) == ProviderError::Kind::kWrongCount);
  server.drop_one = 0;

  server.reply_dim = 5;
  CHECK(provider_error_kind([&] { remote.embed_text(texts); }) == ProviderError::Kind::kWrongDimension);
  server.reply_dim = 8;

  server.fail_first = 2;
  server.embed_calls = 0;
  CHECK(remote.embed_text(texts).size() == 2);
  CHECK(server.embed_calls == 3);

  server.fail_first = 100;
  server.embed_calls = 0;
  try {
    remote.embed_text(texts);
    FAIL("expected failure");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderError::Kind::kHttpStatus);
    CHECK(e.retryable());
    CHECK(e.http_status() == 503);
    CHECK(std::string(e.what()).find("busy") != std::string::npos);
  }
  CHECK(server.embed_calls == 3);

  server.fail_status = 400;
  server.fail_first = 100;
  server.embed_calls = 0;
  try {
    remote.embed_text(texts);
    FAIL("expected failure");
  } catch (const ProviderError& e) {
    CHECK_FALSE(e.retryable());
  }
  CHECK(server.embed_calls == 1);
  server.fail_first = 0;

  server.fail_status = 429;
  server.fail_first = 1;
  CHECK(remote.embed_text(texts).size() == 2);
}

TEST_CASE("remote timeout and unreachable endpoints") {
  MockServer server;
  ProviderConfig cfg = server.config();
  cfg.timeout_s = 0.2;
  cfg.retry.max_retries = 0;
  server.delay_ms = 1000;
  const RemoteProvider slow(cfg);
  try {
    slow.embed_text(std::string("x"));
    FAIL("expected timeout");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderError::Kind::kTimeout);
    CHECK(e.retryable());
  }
  server.delay_ms = 0;

  ProviderConfig dead;
  dead.kind = ProviderKind::kRemote;
  dead.endpoint_url = "http://127.0.0.1:1";
  dead.retry.max_retries = 0;
  dead.timeout_s = 1.0;
  try {
    RemoteProvider(dead).embed_text(std::string("x"));
    FAIL("expected connection failure");
  } catch (const ProviderError& e) {
    CHECK(e.kind() == ProviderError::Kind::kUnreachable);
    CHECK(e.retryable());
  }
  ProviderConfig https = dead;
  https.endpoint_url = "https://example.com";
  CHECK_THROWS_AS(RemoteProvider{https}, std::invalid_argument);
}

TEST_CASE("remote separate and decompose validate responses") {
  MockServer server;
  const RemoteProvider remote(server.config());
  AudioClip clip;
  clip.samples = {0.5f, -0.5f, 1.0f};
  CHECK(remote.separate(clip, "a bell rings").samples == std::vector<float>{0.25f, -0.25f, 0.5f});
  CHECK(provider_error_kind([&] { remote.separate(clip, "short"); }) == ProviderError::Kind::kInvalidResponse);

  server.decompose_reply = {{"events", {"a dog barks", "a bell rings"}},
                            {"relations", {{{"i", 0}, {"j", 1}, {"rel", "SIMULTANEOUS"}}}}};
  const EventList ok = remote.decompose("whatever");
  CHECK(ok.events.size() == 2);
  CHECK(ok.relation(0, 1) == Relation::kSimultaneous);

  server.decompose_reply = {{"events", {"a", "b", "c"}},
                            {"relations", {{{"i", 0}, {"j", 1}, {"rel", "BEFORE"}}, {{"i", 1}, {"j", 2}, {"rel", "BEFORE"}}}}};
  CHECK(provider_error_kind([&] { remote.decompose("x"); }) == ProviderError::Kind::kInvalidResponse);

  server.decompose_reply = {{"events", {"a", ""}}, {"relations", {{{"i", 0}, {"j", 1}, {"rel", "BEFORE"}}}}};
  CHECK(provider_error_kind([&] { remote.decompose("x"); }) == ProviderError::Kind::kInvalidResponse);

  server.decompose_reply = {{"events", {"a", "b"}}, {"relations", {{{"i", 0}, {"j", 1}, {"rel", "DURING"}}}}};
  CHECK(provider_error_kind([&] { remote.decompose("x"); }) == ProviderError::Kind::kInvalidResponse);
}
