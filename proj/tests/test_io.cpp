#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "intragen/config.hpp"
#include "intragen/image.hpp"
#include "intragen/manifest.hpp"
#include "intragen/rng.hpp"

using namespace intragen;

TEST_CASE("PPM round-trip is bit exact") {
    Rng rng(6);
    ImageU8 img(13, 7);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    const std::string path = "ppm_roundtrip_test.ppm";
    write_ppm(img, path);
    const auto back = read_ppm(path);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.data == img.data);
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_ppm("does_not_exist.ppm"), std::runtime_error);
}

TEST_CASE("u8/float image conversion") {
    ImageU8 img(4, 2);
    img.data[0] = 255;
    img.data[1] = 0;
    img.data[2] = 128;
    const auto f = to_float(img);
    CHECK(f.data[0] == doctest::Approx(1.0));
    CHECK(f.data[1] == doctest::Approx(0.0));
    CHECK(f.data[2] == doctest::Approx(128.0 / 255.0));
    const auto back = to_u8(f);
    CHECK(back.data == img.data);
}

TEST_CASE("key = value config parsing, overrides, dump") {
    const auto cfg = KeyValueConfig::parse(
        "# comment\n"
        "alpha = 3\n"
        "\n"
        "name = pool scene\n"
        "alpha = 4\n"
        "ratio= 0.25\n");
    CHECK(cfg.get_int("alpha", 0) == 4);  // later duplicate wins
    CHECK(cfg.get("name", "") == "pool scene");
    CHECK(cfg.get_double("ratio", 0) == doctest::Approx(0.25));
    CHECK(cfg.get("missing", "fallback") == "fallback");
    CHECK_THROWS_AS(cfg.require("missing"), std::invalid_argument);
    CHECK_THROWS_AS(KeyValueConfig::parse("not a pair\n"), std::invalid_argument);

    const auto again = KeyValueConfig::parse(cfg.dump());
    CHECK(again.values() == cfg.values());
}

TEST_CASE("fnv1a64 digests match the reference vectors") {
    // well-known FNV-1a 64-bit test vectors
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("manifest round-trip and corruption detection") {
    namespace fs = std::filesystem;
    const fs::path dir = "manifest_test_dir";
    fs::create_directories(dir);
    const std::string out_file = (dir / "data.bin").string();
    atomic_write_file(out_file, std::string("payload-bytes"));
    CHECK_FALSE(fs::exists(out_file + ".partial"));

    RunManifest m;
    m.tool_version = "0.1.0";
    m.subcommand = "simulate";
    m.parameters["seed"] = "7";
    m.outputs["data.bin"] = digest_hex(fnv1a64_file(out_file));
    save_manifest(m, (dir / "manifest.json").string());

    const auto loaded = load_manifest((dir / "manifest.json").string());
    CHECK(loaded.subcommand == "simulate");
    CHECK(loaded.parameters.at("seed") == "7");
    CHECK(verify_manifest(loaded, dir.string()).empty());

    // flip one byte: verification must notice
    {
        std::fstream f(out_file, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(3);
        f.put('X');
    }
    const auto problems = verify_manifest(loaded, dir.string());
    REQUIRE(problems.size() == 1);
    CHECK(problems[0].find("data.bin") != std::string::npos);

    fs::remove_all(dir);
}
