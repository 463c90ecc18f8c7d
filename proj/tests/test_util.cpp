// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "support.hpp"
#include "vicl/util.hpp"

using namespace vicl;

TEST_CASE("sha256 known vectors") {
    CHECK(util::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(util::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("base64 round trip and known value") {
    const std::string hello = "hello";
    CHECK(util::base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(hello.data()), hello.size())) ==
          "aGVsbG8=");
    std::mt19937_64 rng(1);
    for (std::size_t n = 0; n < 40; ++n) {
        std::vector<std::uint8_t> bytes(n);
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
        CHECK(util::base64_decode(util::base64_encode(bytes)) == bytes);
    }
}

TEST_CASE("fnv1a64 reference value") {
    CHECK(util::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(util::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("uniform_index stays in range and covers it") {
    std::mt19937_64 rng(5);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = util::uniform_index(rng, 7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("string helpers") {
    CHECK(util::trim("  a b \n") == "a b");
    CHECK(util::split("a|b||c", '|') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(util::sanitize_component("a/b c") != "a/b c");
    CHECK(util::sanitize_component("plain-name_1") == "plain-name_1");
}

TEST_CASE("atomic write replaces content") {
    test::TempDir dir("util");
    util::write_file_atomic(dir / "x/y.txt", "one");
    util::write_file_atomic(dir / "x/y.txt", "two");
    CHECK(util::read_file(dir / "x/y.txt") == "two");
    CHECK_THROWS(util::read_file(dir / "missing"));
}
