// Writes CLI fixtures and runs CLI checks that need more than a regex.
//   cli_harness fixtures DIR
//   cli_harness formats CSW DIR
//   cli_harness threads CSW DIR
//   cli_harness exit-codes CSW DIR
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csw/csw.h"

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  std::cout << (ok ? "ok   " : "FAIL ") << what << "\n";
  if (!ok) ++failures;
}

void put_be32(std::string& s, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) s.push_back(static_cast<char>((v >> shift) & 0xff));
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  f << bytes;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

int fixtures(const std::string& dir) {
  // Three classes of 8x8 images; class c has mean brightness around 40*(c+1).
  const std::uint32_t per_class = 24, classes = 3, d = 8;
  std::string images, labels;
  put_be32(images, 0x00000803);
  put_be32(images, per_class * classes);
  put_be32(images, d);
  put_be32(images, d);
  put_be32(labels, 0x00000801);
  put_be32(labels, per_class * classes);
  std::uint64_t state = 12345;
  for (std::uint32_t i = 0; i < per_class * classes; ++i) {
    const std::uint32_t c = i % classes;
    for (std::uint32_t p = 0; p < d * d; ++p) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      const int noise = static_cast<int>((state >> 33) % 41) - 20;
      images.push_back(static_cast<char>(40 * (c + 1) + noise));
    }
    labels.push_back(static_cast<char>(c));
  }
  write_bytes(dir + "/images.idx", images);
  write_bytes(dir + "/labels.idx", labels);

  csw_measure* a = nullptr;
  csw_measure* b = nullptr;
  if (csw_measure_gaussian(16, 1, 8, 0.0, 1, &a) != CSW_OK ||
      csw_measure_gaussian(16, 1, 8, 0.5, 2, &b) != CSW_OK ||
      csw_measure_write(a, (dir + "/a.cswt").c_str()) != CSW_OK ||
      csw_measure_write(b, (dir + "/b.cswt").c_str()) != CSW_OK) {
    std::cerr << csw_last_error() << "\n";
    return 1;
  }
  csw_measure_free(a);
  csw_measure_free(b);
  csw_measure* c = nullptr;
  if (csw_measure_gaussian(9, 1, 8, 0.0, 3, &c) != CSW_OK ||
      csw_measure_write(c, (dir + "/c9.cswt").c_str()) != CSW_OK) {
    return 1;
  }
  csw_measure_free(c);
  write_bytes(dir + "/garbage.cswt", "not a tensor file");
  return 0;
}

std::vector<std::vector<double>> csv_matrix(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line) && !line.empty()) {
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    auto& row = rows.emplace_back();
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
  }
  return rows;
}

std::string compare_cmd(const std::string& csw, const std::string& dir, const std::string& extra) {
  return quote(csw) + " compare --images " + quote(dir + "/images.idx") + " --labels " +
         quote(dir + "/labels.idx") + " " + extra;
}

int formats(const std::string& csw, const std::string& dir) {
  for (const char* method : {"sw", "csw-s", "max-csw-d --steps 3", "exact"}) {
    const std::string base = compare_cmd(csw, dir, std::string("--L 20 --method ") + method);
    const int rc1 = run(base + " --format csv --out " + quote(dir + "/r.csv"));
    const int rc2 = run(base + " --format json --out " + quote(dir + "/r.json"));
    expect(rc1 == 0 && rc2 == 0, std::string("compare runs for ") + method);
    const auto csv = csv_matrix(slurp(dir + "/r.csv"));
    const auto j = nlohmann::json::parse(slurp(dir + "/r.json"));
    const auto jm = j["matrix"].get<std::vector<std::vector<double>>>();
    expect(csv.size() == 3 && csv == jm, std::string("csv and json values identical for ") + method);
    expect(j["classes"] == nlohmann::json::array({0, 1, 2}), "json classes");
  }
  const std::string rep = compare_cmd(csw, dir, "--method csw-s --L 1 --repeats 5 --format json");
  expect(run(rep + " --out " + quote(dir + "/rep.json")) == 0, "repeats run");
  const auto j = nlohmann::json::parse(slurp(dir + "/rep.json"));
  bool positive = j.contains("std");
  if (positive) {
    const auto sd = j["std"].get<std::vector<std::vector<double>>>();
    for (std::size_t r = 0; r < sd.size(); ++r) {
      for (std::size_t c = 0; c < sd.size(); ++c) {
        if (r != c && !(sd[r][c] > 0.0)) positive = false;
      }
    }
  }
  expect(positive, "L=1 repeats give positive off-diagonal std");
  return failures == 0 ? 0 : 1;
}

int threads(const std::string& csw, const std::string& dir) {
  const std::string base = compare_cmd(csw, dir, "--method csw-b --L 20 --format csv");
  run(base + " --threads 1 --out " + quote(dir + "/t1.csv"));
  run(base + " --threads 4 --out " + quote(dir + "/t4.csv"));
  run("CSW_THREADS=3 " + base + " --threads 1 --out " + quote(dir + "/t3.csv"));
  const auto t1 = slurp(dir + "/t1.csv");
  expect(!t1.empty() && t1 == slurp(dir + "/t4.csv"), "compare output identical for 1 and 4 threads");
  expect(t1 == slurp(dir + "/t3.csv"), "CSW_THREADS override gives identical output");

  const std::string dist = quote(csw) + " distance " + quote(dir + "/a.cswt") + " " +
                           quote(dir + "/b.cswt") + " --method sw --L 50";
  run(dist + " --threads 1 --out " + quote(dir + "/d1.json"));
  run(dist + " --threads 3 --out " + quote(dir + "/d3.json"));
  const auto d1 = nlohmann::json::parse(slurp(dir + "/d1.json"));
  const auto d3 = nlohmann::json::parse(slurp(dir + "/d3.json"));
  expect(d1["value"].get<double>() == d3["value"].get<double>(), "distance identical across threads");

  const std::string bench = quote(csw) + " bench --c 1 --d 16 --n 20 --L 10 --methods sw,csw-s --format json";
  run(bench + " --threads 1 --out " + quote(dir + "/b1.json"));
  run(bench + " --threads 2 --out " + quote(dir + "/b2.json"));
  const auto b1 = nlohmann::json::parse(slurp(dir + "/b1.json"));
  const auto b2 = nlohmann::json::parse(slurp(dir + "/b2.json"));
  bool same = b1["results"].size() == 2;
  for (std::size_t i = 0; same && i < 2; ++i) {
    same = b1["results"][i]["value"].get<double>() == b2["results"][i]["value"].get<double>();
  }
  expect(same, "bench values identical across threads");
  return failures == 0 ? 0 : 1;
}

int exit_codes(const std::string& csw, const std::string& dir) {
  const std::string exe = quote(csw);
  const std::string a = quote(dir + "/a.cswt"), b = quote(dir + "/b.cswt");
  const std::string quiet = " 2>" + quote(dir + "/err.txt");
  expect(run(exe + " distance " + a + " " + b + " --method nope" + quiet) == 2, "unknown method exits 2");
  const auto err = nlohmann::json::parse(slurp(dir + "/err.txt"));
  expect(err.contains("code") && err.contains("message"), "stderr carries {code, message}");
  expect(run(exe + " distance " + a + quiet) == 2, "missing positional exits 2");
  expect(run(exe + " frobnicate" + quiet) == 2, "unknown subcommand exits 2");
  expect(run(exe + " distance " + a + " " + b + " --p 0.5" + quiet) == 2, "invalid p exits 2");
  expect(run(exe + " distance " + a + " " + quote(dir + "/missing.cswt") + quiet) == 1,
         "missing file exits 1");
  const auto io = nlohmann::json::parse(slurp(dir + "/err.txt"));
  expect(io["code"] == "io", "missing file reports io");
  expect(run(exe + " distance " + a + " " + quote(dir + "/garbage.cswt") + quiet) == 1,
         "bad tensor file exits 1");
  expect(run(exe + " distance " + a + " " + quote(dir + "/c9.cswt") + quiet) == 1,
         "unequal sizes exit 1 without opt-in");
  expect(run(exe + " distance " + a + " " + quote(dir + "/c9.cswt") + " --allow-unequal --out " +
             quote(dir + "/u.json") + quiet) == 0,
         "unequal sizes accepted with --allow-unequal");
  expect(run("CSW_THREADS=abc " + exe + " distance " + a + " " + b + quiet) == 2,
         "malformed CSW_THREADS exits 2");
  expect(run(exe + " slicer-info --variant stride --d 1" + quiet) == 2, "slicer-info d=1 exits 2");
  expect(run(exe + " compare --images " + quote(dir + "/images.idx") + " --labels " +
             quote(dir + "/labels.idx") + " --method exact --per-class 30" + quiet) == 1,
         "per-class above class size exits 1");

  expect(run(exe + " distance " + a + " " + a + " --method csw-d --out " + quote(dir + "/self.json")) == 0,
         "self distance runs");
  const auto self = nlohmann::json::parse(slurp(dir + "/self.json"));
  expect(self["value"].get<double>() == 0.0, "a == b gives value 0");
  expect(self["param_count"].get<int>() == 13, "distance reports param_count");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  if (args.size() == 2 && args[0] == "fixtures") return fixtures(args[1]);
  if (args.size() == 3 && args[0] == "formats") return formats(args[1], args[2]);
  if (args.size() == 3 && args[0] == "threads") return threads(args[1], args[2]);
  if (args.size() == 3 && args[0] == "exit-codes") return exit_codes(args[1], args[2]);
  std::cerr << "usage: cli_harness fixtures DIR | (formats|threads|exit-codes) CSW DIR\n";
  return 2;
}
