#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "graphmix/cli.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args, std::string* stdout_text = nullptr) {
  std::vector<const char*> argv = {"graphmix"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  const int rc = graphmix::cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  if (stdout_text != nullptr) *stdout_text = captured.str();
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("record count matches folds x repeats") {
  const fs::path out = fs::temp_directory_path() / "graphmix_cli_records.jsonl";
  fs::remove(out);
  const int rc = run_cli({"--synthetic", "motif", "--synthetic-n", "40", "--hidden", "8",
                          "--epochs", "3", "--augment", "none", "--folds", "2", "--repeats", "1",
                          "--seed", "7", "--out", out.string()});
  CHECK(rc == 0);
  std::ifstream in(out);
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("identical invocations produce byte-identical results files") {
  const fs::path out_a = fs::temp_directory_path() / "graphmix_cli_a.jsonl";
  const fs::path out_b = fs::temp_directory_path() / "graphmix_cli_b.jsonl";
  const std::vector<std::string> base = {
      "--synthetic", "motif", "--synthetic-n", "40", "--hidden", "8", "--epochs",
      "4", "--augment", "transplant-dp", "--folds", "2", "--repeats", "1", "--seed", "11"};
  auto args_a = base;
  args_a.push_back("--out");
  args_a.push_back(out_a.string());
  auto args_b = base;
  args_b.push_back("--out");
  args_b.push_back(out_b.string());
  CHECK(run_cli(args_a) == 0);
  CHECK(run_cli(args_b) == 0);
  const std::string a = slurp(out_a);
  const std::string b = slurp(out_b);
  CHECK_FALSE(a.empty());
  CHECK(a == b);
}

TEST_CASE("default mixing hyperparameters are echoed") {
  std::string text;
  const int rc = run_cli({"--synthetic", "motif", "--synthetic-n", "20", "--hidden", "4",
                          "--epochs", "1", "--augment", "transplant-ep", "--folds", "2",
                          "--repeats", "1", "--seed", "3"},
                         &text);
  CHECK(rc == 0);
  CHECK(text.find("R=10") != std::string::npos);
  CHECK(text.find("khops=1,2,3") != std::string::npos);
  CHECK(text.find("alpha=2") != std::string::npos);
  CHECK(text.find("augment=transplant-ep") != std::string::npos);
}

TEST_CASE("bad invocations exit nonzero") {
  CHECK(run_cli({"--no-such-flag"}) != 0);
  CHECK(run_cli({"--data", "/nonexistent/dir", "--name", "nope"}) != 0);
  CHECK(run_cli({"--synthetic", "motif", "--data", "/tmp", "--name", "x"}) != 0);
  CHECK(run_cli({"--synthetic", "spirals"}) != 0);
  CHECK(run_cli({}) != 0);  // no dataset selected
}

TEST_CASE("checkpoints and dumps are written when requested") {
  const fs::path dir = fs::temp_directory_path() / "graphmix_cli_dumps";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path prefix = dir / "ckpt";
  const fs::path saldump = dir / "saliency.txt";
  const int rc = run_cli({"--synthetic", "motif", "--synthetic-n", "24", "--hidden", "8",
                          "--epochs", "2", "--augment", "transplant-ep", "--folds", "2",
                          "--repeats", "1", "--seed", "5", "--fold", "0", "--save-model",
                          prefix.string(), "--dump-mixed", dir.string(), "--dump-saliency",
                          saldump.string()});
  CHECK(rc == 0);
  CHECK(fs::exists(prefix.string() + "_r0_f0_model.json"));
  CHECK(fs::exists(prefix.string() + "_r0_f0_ep.json"));
  CHECK(fs::exists(saldump));
  CHECK(fs::exists(dir / "mixed_0.txt"));
  const std::string mixed = slurp(dir / "mixed_0.txt");
  CHECK(mixed.find("lambda=") != std::string::npos);
}
