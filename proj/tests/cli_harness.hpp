#pragma once

// In-process CLI runs over the fixture directory.

#include "porosity/cli.hpp"
#include "porosity/io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace harness {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(POROSITY_FIXTURES) / name; }

inline fs::path scratch(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("porosity_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

inline Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "porosity");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = porosity::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::vector<fs::path> negative_fixtures() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(POROSITY_FIXTURES)) {
    const std::string n = e.path().filename().string();
    if (n.rfind("neg_", 0) == 0 && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct NegativeResult {
  std::string fixture;
  std::string target;  // the check the fixture is built to break
  int code = -1;
  bool overall = true;
  bool target_failed = false;
};

inline NegativeResult run_negative(const fs::path& config, const fs::path& dir) {
  NegativeResult r;
  r.fixture = config.filename().string();
  r.target = porosity::read_json(config.string()).at("name").get<std::string>();
  const fs::path out = dir / (config.stem().string() + ".cert.json");
  r.code = run({"certify", "--config", config.string(), "--out", out.string()}).code;
  if (!fs::exists(out)) return r;
  const porosity::Json cert = porosity::read_json(out.string());
  r.overall = cert.at("overall").get<bool>();
  for (const auto& c : cert.at("checks")) {
    if (c.at("name") == r.target) r.target_failed = !c.at("pass").get<bool>();
  }
  return r;
}

// check names of a passing certificate
inline std::set<std::string> check_names(const fs::path& config, const fs::path& dir) {
  const fs::path out = dir / (config.stem().string() + ".cert.json");
  run({"certify", "--config", config.string(), "--out", out.string()});
  std::set<std::string> names;
  const porosity::Json cert = porosity::read_json(out.string());
  for (const auto& c : cert.at("checks")) names.insert(c.at("name").get<std::string>());
  return names;
}

}  // namespace harness
