#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bdfl/cli.hpp"
#include "bdfl/csv.hpp"
#include "bdfl/manybody.hpp"
#include "bdfl/model_io.hpp"

using namespace bdfl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bdfl_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Csv, HeaderOnlyWhenEmpty) {
  CsvTable t;
  t.columns = {"N", "value"};
  EXPECT_EQ(to_csv_string(t), "N,value\r\n");
}

TEST(Csv, RoundTripSeventeenDigits) {
  CsvTable t;
  t.columns = {"a", "b", "c", "d"};
  const double x = 0.1 + 0.2, y = -1.234567890123456789e-300;
  t.add({std::int64_t{7}, x, true, std::string("q,\"t\"")});
  t.add({std::int64_t{-1}, y, false, std::string("plain")});
  const auto rows = parse_csv(to_csv_string(t));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], t.columns);
  EXPECT_EQ(std::stod(rows[1][1]), x);
  EXPECT_EQ(std::stod(rows[2][1]), y);
  EXPECT_EQ(rows[1][3], "q,\"t\"");
  EXPECT_EQ(rows[1][2], "true");
}

TEST(Csv, SchemaWidthEnforced) {
  CsvTable t;
  t.columns = {"a"};
  EXPECT_THROW(t.add({1.0, 2.0}), Error);
}

TEST(Csv, FormatReal) {
  EXPECT_EQ(format_real(0.5), "0.5");
  EXPECT_EQ(format_real(1.0 / 3.0), "0.33333333333333331");
  EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Csv, UnwritablePath) {
  CsvTable t;
  t.columns = {"a"};
  EXPECT_THROW(emit_csv(t, std::string("/nonexistent_dir/x.csv")), Error);
}

TEST(ModelIo, RoundTripAndPresets) {
  const ModelSpec m = ModelSpec::benchmark(1.5);
  const ModelSpec back = model_from_json(model_to_json(m));
  EXPECT_TRUE(back.h == m.h);
  EXPECT_TRUE(back.w == m.w);
  const auto j = nlohmann::json::parse(R"({"d":2,"h":{"re":[[0,0],[0,1]]},"w":{"preset":"rank_one_pair","g":1.5}})");
  EXPECT_TRUE(model_from_json(j).w == m.w);
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"d":2,"h":{"re":[[0,1],[0,1]]},"w":{"preset":"rank_one_pair","g":1}})")), Error);
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"d":2})")), Error);
}

TEST(Cli, Dims) {
  const auto r = call({"dims", "--d", "2", "--n", "3"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "4\n");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(call({}).code, kExitUsage);
  EXPECT_EQ(call({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(call({"dims", "--d", "x"}).code, kExitUsage);
  EXPECT_EQ(call({"hartree", "--model", "/nonexistent.json"}).code, kExitUsage);
  EXPECT_EQ(call({"dims", "--help"}).code, kExitOk);
}

TEST(Cli, DefinettiOnBenchmarkGroundState) {
  TempDir tmp;
  write(tmp.file("bench.json"), model_to_json(ModelSpec::benchmark(2.0)).dump());
  const auto r = call({"definetti-check", "--model", tmp.file("bench.json"), "--N", "20", "--n", "2", "--out", tmp.file("df.csv")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("pass"), std::string::npos);
  const auto rows = parse_csv(slurp(tmp.file("df.csv")));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][5], "1.2");
  const auto manifest = nlohmann::json::parse(slurp(tmp.file("df.csv") + ".manifest.json"));
  EXPECT_EQ(manifest["seed"], 42);
  EXPECT_TRUE(manifest["pass"].get<bool>());
}

TEST(Cli, AppendixBDeltaOverNDecreases) {
  TempDir tmp;
  write(tmp.file("bench.json"), model_to_json(ModelSpec::benchmark(1.5)).dump());
  const auto r = call({"gibbs-appendixB", "--model", tmp.file("bench.json"), "--t", "0.5", "--nmax", "200", "--samples", "100000",
                       "--out", tmp.file("b.csv")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto rows = parse_csv(slurp(tmp.file("b.csv")));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"N", "T", "F_N", "log_dim", "F_cl", "delta", "delta_over_N", "gamma_distance", "mc_error"}));
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_LT(std::abs(std::stod(rows[i][6])), std::abs(std::stod(rows[i - 1][6])));
}

TEST(Cli, VerificationFailureExitCode) {
  TempDir tmp;
  // a one-point state space has |F_N/N - F_MF| = 0 exactly at every N, so the strict decrease check fails
  write(tmp.file("flat.json"), R"({"m":1,"V":[0],"w":[[0]]})");
  const auto r = call({"classical-gibbs", "--model", tmp.file("flat.json"), "--N", "10,20", "--out", tmp.file("g.csv")});
  EXPECT_EQ(r.code, kExitVerification);
  EXPECT_NE(r.err.find("violation"), std::string::npos);
  EXPECT_TRUE(fs::exists(tmp.file("g.csv")));
}

TEST(Cli, SeedDeterminism) {
  TempDir tmp;
  for (const char* tag : {"a", "b"}) {
    const auto r = call({"bl-check", "--count", "5", "--upper-count", "3", "--samples", "5000", "--out", tmp.file(std::string(tag) + ".csv")});
    EXPECT_EQ(r.code, kExitOk) << r.err;
  }
  EXPECT_EQ(slurp(tmp.file("a.csv")), slurp(tmp.file("b.csv")));
  call({"bl-check", "--count", "5", "--upper-count", "3", "--samples", "5000", "--seed", "7", "--out", tmp.file("c.csv")});
  EXPECT_NE(slurp(tmp.file("a.csv")), slurp(tmp.file("c.csv")));
}
