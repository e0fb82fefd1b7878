#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "laga/detail/rng.hpp"
#include "laga/detail/sha256.hpp"
#include "laga/detail/text.hpp"
#include "laga/detail/toml.hpp"

using namespace laga::detail;

TEST_CASE("sha256 matches published vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
          "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
    // Incremental updates agree with one-shot hashing across block boundaries.
    std::string long_input(1000, 'x');
    Sha256 h;
    h.update(long_input.substr(0, 13));
    h.update(long_input.substr(13));
    const auto d = h.digest();
    std::string hex;
    for (unsigned char b : d) {
        static const char* t = "0123456789abcdef";
        hex.push_back(t[b >> 4]);
        hex.push_back(t[b & 15]);
    }
    CHECK(hex == sha256_hex(long_input));
}

TEST_CASE("rng streams are deterministic and forkable") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream parent(7);
    const auto before = parent.next_u64();
    RngStream child = parent.derive("child");
    RngStream parent2(7);
    parent2.next_u64();
    CHECK(parent.next_u64() == parent2.next_u64());  // derive left parent untouched

    RngStream child_again = RngStream(7).derive("child");
    CHECK(child.next_u64() == child_again.next_u64());
    CHECK(RngStream(7).derive("a").next_u64() != RngStream(7).derive("b").next_u64());
    CHECK(before != child.next_u64());
}

TEST_CASE("rng below is bounded and roughly uniform") {
    RngStream rng(1);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 20000; ++i) {
        const auto v = rng.below(10);
        REQUIRE(v < 10);
        counts[v] += 1;
    }
    for (int c : counts) CHECK(c > 1600);  // expectation 2000

    double mean = 0.0;
    for (int i = 0; i < 20000; ++i) mean += rng.next_double();
    mean /= 20000;
    CHECK(mean == Catch::Approx(0.5).margin(0.02));

    double nsum = 0.0, nsq = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double z = rng.next_normal();
        nsum += z;
        nsq += z * z;
    }
    CHECK(nsum / 20000 == Catch::Approx(0.0).margin(0.03));
    CHECK(nsq / 20000 == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("rng sampling produces distinct indices and permutations") {
    RngStream rng(3);
    const auto idx = rng.sample_indices(50, 20);
    REQUIRE(idx.size() == 20);
    std::set<std::size_t> unique(idx.begin(), idx.end());
    CHECK(unique.size() == 20);
    for (auto i : unique) CHECK(i < 50);

    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    auto w = v;
    rng.shuffle(w);
    std::sort(w.begin(), w.end());
    CHECK(w == v);

    CHECK(rng.sample_indices(5, 0).empty());
    CHECK_THROWS(rng.sample_indices(3, 4));
}

TEST_CASE("tokenizer splits, normalizes and classifies tokens") {
    const auto toks = split_tokens("  Hello, world!\tthis\n is  it ");
    REQUIRE(toks.size() == 5);
    CHECK(toks[0] == "Hello,");
    CHECK(normalize_token("Hello,") == "hello");
    CHECK(normalize_token("(WORLD)") == "world");
    CHECK(normalize_token("...") == "");
    CHECK(normalize_token("don't") == "don't");

    CHECK(is_garbage_token("x7#q"));
    CHECK(is_garbage_token("##"));
    CHECK(is_garbage_token("0_xx"));
    CHECK_FALSE(is_garbage_token("don't"));
    CHECK_FALSE(is_garbage_token("well-known"));
    CHECK_FALSE(is_garbage_token("(bracketed)"));
    CHECK_FALSE(is_garbage_token("word."));
}

TEST_CASE("informativeness follows the mean tf-idf definition") {
    const std::vector<std::string> corpus = {"a a b", "a c"};
    const auto stats = build_corpus_stats(corpus);
    REQUIRE(stats.num_docs == 2);
    CHECK(stats.doc_freq.at("a") == 2);
    CHECK(stats.doc_freq.at("b") == 1);

    // doc "a a b": occurrences 2x a with tf 2/3, idf ln(2/3); b has idf 0.
    const double expected_1 = 4.0 / 9.0 * std::log(2.0 / 3.0);
    CHECK(informativeness("a a b", stats) == Catch::Approx(expected_1).epsilon(1e-12));
    CHECK(expected_1 == Catch::Approx(-0.1802067).margin(1e-6));
    const double expected_2 = 0.25 * std::log(2.0 / 3.0);
    CHECK(informativeness("a c", stats) == Catch::Approx(expected_2).epsilon(1e-12));
    CHECK(informativeness("", stats) == 0.0);
}

TEST_CASE("keyword ranking prefers distinctive tokens") {
    const std::vector<std::string> corpus = {"a a b", "a c"};
    const auto stats = build_corpus_stats(corpus);
    const auto kw = top_keywords("a a b", stats, 5);
    REQUIRE(kw.size() == 2);
    CHECK(kw[0] == "b");  // idf 0 beats the negative-idf ubiquitous token
    CHECK(kw[1] == "a");
    CHECK(top_keywords("", stats, 3).empty());
}

TEST_CASE("leading sentences") {
    CHECK(leading_sentences("First one. Second two! Third?", 2) == "First one. Second two!");
    CHECK(leading_sentences("No terminator here", 2) == "No terminator here");
    CHECK(leading_sentences("Wow... really. Yes.", 1) == "Wow...");
    CHECK(leading_sentences("", 2) == "");
}

TEST_CASE("toml subset parses and round-trips") {
    const std::string src = R"(# run configuration
seed = 42
mode = "rules"
ratio = 0.4
flag = true

[detect]
tau_noise = 0.3
thresholds = [1, 2, 3]

[llm.http]
endpoint = "http://localhost:8080/v1"
)";
    const auto table = laga::detail::toml::parse(src);
    CHECK(table.at("seed").as_int() == 42);
    CHECK(table.at("mode").as_string() == "rules");
    CHECK(table.at("ratio").as_float() == Catch::Approx(0.4));
    CHECK(table.at("flag").as_bool());
    CHECK(table.at("detect").as_table().at("tau_noise").as_float() == Catch::Approx(0.3));
    const auto& arr = table.at("detect").as_table().at("thresholds").as_array();
    REQUIRE(arr.size() == 3);
    CHECK(arr[2].as_int() == 3);
    CHECK(table.at("llm").as_table().at("http").as_table().at("endpoint").as_string() ==
          "http://localhost:8080/v1");

    const auto serialized = laga::detail::toml::serialize(table);
    const auto reparsed = laga::detail::toml::parse(serialized);
    CHECK(laga::detail::toml::serialize(reparsed) == serialized);
    CHECK(reparsed.at("detect").as_table().at("tau_noise").as_float() == Catch::Approx(0.3));

    CHECK_THROWS_AS(laga::detail::toml::parse("a = 1\na = 2\n"), laga::detail::toml::TomlError);
    CHECK_THROWS_AS(laga::detail::toml::parse("broken line\n"), laga::detail::toml::TomlError);
    CHECK_THROWS_AS(laga::detail::toml::parse("s = \"unterminated\n"),
                    laga::detail::toml::TomlError);

    // Strings with escapes survive a round trip.
    laga::detail::toml::Table t;
    t.emplace("text", laga::detail::toml::Value(std::string("line\nwith \"quotes\" and \\slash")));
    const auto s2 = laga::detail::toml::serialize(t);
    CHECK(laga::detail::toml::parse(s2).at("text").as_string() ==
          "line\nwith \"quotes\" and \\slash");
}
