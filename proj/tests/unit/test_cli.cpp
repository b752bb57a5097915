// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "support.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(PARTCRAFT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("color subcommand") {
  const auto r = cli("color 250 10 10");
  CHECK(r.code == 0);
  CHECK(r.out == "red\n");
  CHECK(cli("color 256 0 0").code != 0);
  CHECK(cli("color 1 2").code != 0);
}

TEST_CASE("usage errors") {
  CHECK(cli("").code != 0);
  CHECK(cli("frobnicate").code != 0);
  CHECK(cli("--version").code == 0);
}

TEST_CASE("localize then generate") {
  testing::TempDir dir("cli-flow");
  write(dir.file("doc.json"),
        R"({"base":"a photo of a bird","object":"bird","parts":[{"name":"beak","footnote":"a red beak"}]})");
  const auto loc = cli("localize --doc " + dir.file("doc.json") + " --out " + dir.file("masks"));
  REQUIRE(loc.code == 0);
  CHECK(loc.out.find("beak") != std::string::npos);
  CHECK(std::filesystem::exists(dir.file("masks/masks.json")));
  const auto gen = cli("generate --doc " + dir.file("doc.json") + " --masks " + dir.file("masks") + " --out " +
                       dir.file("out.png"));
  CHECK(gen.code == 0);
  CHECK(std::filesystem::exists(dir.file("out.png")));
}

TEST_CASE("library errors become status exit codes") {
  testing::TempDir dir("cli-errors");
  write(dir.file("bad.json"), "{\"base\": ");
  write(dir.file("invalid.json"), R"({"base":"a bird","parts":[]})");
  write(dir.file("cfg.json"), R"({"num_stepz": 3})");
  write(dir.file("doc.json"), R"({"base":"a photo of a bird","object":"bird","parts":[{"name":"beak"}]})");
  CHECK(cli("localize --doc " + dir.file("bad.json") + " --out " + dir.file("m")).code == 2);
  CHECK(cli("localize --doc " + dir.file("invalid.json") + " --out " + dir.file("m")).code == 3);
  CHECK(cli("localize --doc " + dir.file("doc.json") + " --config " + dir.file("cfg.json") + " --out " +
            dir.file("m"))
            .code == 6);
}

TEST_CASE("synthetic dataset and evaluation") {
  testing::TempDir dir("cli-eval");
  REQUIRE(cli("make-synthetic --root " + dir.file("ds") + " --samples 2 --seed 4").code == 0);
  const auto r = cli("eval --dataset synthetic --root " + dir.file("ds") + " --report " + dir.file("report.json"));
  CHECK(r.code == 0);
  std::ifstream in(dir.file("report.json"));
  const std::string report((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(report.find("\"fg_nmi\"") != std::string::npos);
}
