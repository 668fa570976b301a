#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "trcsp/cli.hpp"
#include "trcsp/io.hpp"

using namespace trcsp;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "trcsp");
  std::ostringstream out, err;
  const int code = trcsp::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string sample(const std::string& name) { return std::string(TRCSP_SAMPLES_DIR) + "/" + name; }

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("trcsp-test-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string put(const std::string& name, const std::string& text) const {
    write_file(path(name), text);
    return path(name);
  }
  fs::path dir_;
};

}  // namespace

TEST(CanonicalJson, SortedCompactTrailingNewline) {
  const Json j = {{"zeta", 1}, {"alpha", {{"b", 0.1}, {"a", true}}}, {"mid", Json::array({1.5, nullptr, "x"})}};
  EXPECT_EQ(canonical_json(j), "{\"alpha\":{\"a\":true,\"b\":0.10000000000000001},\"mid\":[1.5,null,\"x\"],\"zeta\":1}\n");
  EXPECT_EQ(canonical_json(Json(std::nan(""))), "null\n");
  EXPECT_EQ(canonical_json(Json(1e300)), "1.0000000000000001e+300\n");
}

TEST(CanonicalJson, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 123456789.123456789}) {
    const Json back = Json::parse(canonical_json(Json(v)));
    EXPECT_EQ(back.get<double>(), v);
  }
}

TEST(InstanceIo, RoundTrip) {
  const auto inst = oracle::make_instance(4, 3, {{0, 1, {{0, 2}, {1, 1}}}, {2, 3, all_pairs(3)}});
  const std::string text = emit_instance(inst);
  const auto back = parse_instance(text);
  EXPECT_EQ(back.n, 4);
  EXPECT_EQ(back.q, 3);
  ASSERT_EQ(back.edges.size(), 2u);
  EXPECT_EQ(back.edges[0].allowed, inst.edges[0].allowed);
  EXPECT_EQ(emit_instance(back), text);
}

TEST(InstanceIo, Diagnostics) {
  auto message = [](const std::string& text) {
    try {
      parse_instance(text);
    } catch (const InvalidInput& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("{\"n\": 2,\n \"q\": 2,\n \"edges\": [}").find("line 3"), std::string::npos);
  EXPECT_NE(message(R"({"q":2,"edges":[]})").find("n"), std::string::npos);
  EXPECT_NE(message(R"({"n":2,"q":2,"edges":[{"u":0,"v":1,"allowed":[[0]]}]})").find("edges[0].allowed[0]"),
            std::string::npos);
  EXPECT_NE(message(R"({"n":2,"q":2,"edges":[{"u":0,"v":1.5,"allowed":[[0,0]]}]})").find("edges[0].v"),
            std::string::npos);
  EXPECT_NE(message(R"({"n":2,"q":2,"edges":[{"u":0,"v":0,"allowed":[[0,0]]}]})").find("invalid instance"),
            std::string::npos);
  EXPECT_NE(message(R"({"n":2,"q":2,"edges":[{"u":0,"v":1,"allowed":[[0,2]]}]})").find("invalid instance"),
            std::string::npos);
}

TEST(GraphIo, ParsesAndRejects) {
  const Graph g = parse_graph("3 2\n0 1\n\n1 2\n");
  EXPECT_EQ(g.n, 3);
  EXPECT_EQ(g.edges, (std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}));
  EXPECT_EQ(emit_graph(g), "3 2\n0 1\n1 2\n");
  for (const char* bad : {"", "3\n", "3 1\n0 3\n", "3 1\n1 1\n", "3 2\n0 1\n1 0\n", "3 2\n0 1\n", "3 1\n0 1\n1 2\n",
                          "3 1\n0 1 x\n", "3 1\r\n0 1\r\n", "2 5\n"}) {
    EXPECT_THROW(parse_graph(bad), InvalidInput) << "input: " << bad;
  }
}

TEST(MatrixIo, Forms) {
  const auto a = parse_matrix(R"({"matrix": [[1, 2], [2, -1]]})");
  EXPECT_EQ(a(0, 1), 2.0);
  const auto b = parse_matrix("[[0.5]]");
  EXPECT_EQ(b(0, 0), 0.5);
  EXPECT_EQ(parse_matrix(canonical_json(matrix_to_json(a))).dense(), a.dense());
  EXPECT_THROW(parse_matrix("[[1, 2], [3, 1]]"), InvalidInput);
  EXPECT_THROW(parse_matrix("[[1, 2]]"), InvalidInput);
  EXPECT_THROW(parse_matrix("[]"), InvalidInput);
  EXPECT_THROW(parse_matrix(R"([[1, "x"], [0, 1]])"), InvalidInput);
}

TEST(Format, Numbers) {
  EXPECT_EQ(format_number(9.0), "9");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(2.25), "2.25");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333");
}

TEST(Report, JsonSchema) {
  SolveOptions o;
  o.oracle = true;
  const auto rep = solve_maxcut(oracle::cycle(4), 0.2, 7, o);
  const Json j = Json::parse(emit_report(rep));
  for (const char* key : {"problem", "n", "q", "m", "eps", "eps_algorithm", "seed", "samples", "k", "spectrum", "net",
                          "sdp", "points", "best", "fallback", "opt", "gap"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_FALSE(j.contains("timings"));
  EXPECT_EQ(j["problem"], "maxcut");
  EXPECT_EQ(j["best"]["objective"], 4);
  EXPECT_EQ(j["net"]["size"].get<int>(), static_cast<int>(rep.points.size()));
  EXPECT_EQ(j["points"].size(), rep.points.size());
  EXPECT_EQ(j["points"][0]["index"], 0);
  EXPECT_EQ(summary_line(rep), "best=4 OPT=4 gap=0 |S|=" + std::to_string(rep.net_size) + " k=1");
}

TEST(Cli, MaxcutSamples) {
  // k = 1, R = sqrt(18), delta = sqrt(3.6): J = 3, so 7 grid points.
  EXPECT_EQ(run_cli({"maxcut", "--graph", sample("k33.txt"), "--oracle"}).out, "best=9 OPT=9 gap=0 |S|=7 k=1\n");
  const auto c4 = run_cli({"maxcut", "--graph", sample("c4.txt"), "--oracle"});
  EXPECT_EQ(c4.code, 0);
  EXPECT_EQ(c4.out.rfind("best=4 OPT=4 gap=0", 0), 0u);
  const auto c3 = run_cli({"maxcut", "--graph", sample("c3.txt"), "--eps", "0.05"});
  EXPECT_EQ(c3.out, "best=2 OPT=n/a gap=n/a |S|=185 k=2\n");
}

TEST(Cli, SolvePlantedSample) {
  const auto r = run_cli({"solve", "--instance", sample("planted-n8-q3.json"), "--oracle", "--workers", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("best=12 OPT=12 gap=0", 0), 0u);
}

TEST(Cli, Rank) {
  EXPECT_EQ(run_cli({"rank", "--graph", sample("c3.txt"), "--tau", "0.4", "--side", "neg"}).out, "2\n");
  const auto j = Json::parse(run_cli({"rank", "--graph", sample("k33.txt"), "--tau", "0.5"}).out);
  EXPECT_EQ(j["pos"], 1);
  EXPECT_EQ(j["neg"], 1);
  EXPECT_EQ(run_cli({"rank", "--tau", "0.5"}).code, 1);
  EXPECT_EQ(run_cli({"rank", "--graph", sample("c3.txt"), "--tau", "0"}).code, 1);
}

TEST(Cli, VerifyAndCertifyTrials) {
  const auto v = run_cli({"verify-rank-bound", "--trials", "20", "--seed", "3"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("checks: 60\nviolations: 0\n"), std::string::npos) << v.out;
  const auto c = run_cli({"certify", "--trials", "20", "--seed", "3"});
  EXPECT_EQ(c.code, 0);
  EXPECT_EQ(c.out, "violations: 0\n");
}

TEST_F(TempDir, CertifyFiles) {
  const auto a = put("a.json", R"({"matrix": [[0, 1], [1, 0]]})");
  const auto r = run_cli({"certify", "--a", a, "--b", a, "--lambda", "1", "--t", "1"});
  EXPECT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["pass"], true);
  EXPECT_NEAR(j["trace"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(run_cli({"certify", "--a", a, "--b", a, "--lambda", "1", "--t", "2"}).code, 1);
  EXPECT_EQ(run_cli({"certify", "--a", a}).code, 1);
}

TEST_F(TempDir, ExitCodes) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"bogus"}).code, 1);
  EXPECT_EQ(run_cli({"maxcut", "--graph", sample("k33.txt"), "--eps", "1.5"}).code, 1);
  EXPECT_EQ(run_cli({"maxcut", "--graph", path("missing.txt")}).code, 1);
  EXPECT_EQ(run_cli({"maxcut", "--graph", sample("k33.txt"), "--exact-eig", "--power-eig"}).code, 1);

  const auto bad = put("bad.json", "{\"n\": 3,\n  \"q\": }");
  const auto r = run_cli({"solve", "--instance", bad});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;

  const auto cap = run_cli({"maxcut", "--graph", sample("c3.txt"), "--eps", "0.05", "--net-cap", "2"});
  EXPECT_EQ(cap.code, 2);
  EXPECT_NE(cap.err.find("cap of 2"), std::string::npos) << cap.err;

  const auto edgeless = put("empty.txt", "3 0\n");
  EXPECT_EQ(run_cli({"maxcut", "--graph", edgeless}).code, 1);

  const auto fail = run_cli({"maxcut", "--graph", sample("c3.txt"), "--sdp-max-iterations", "1"});
  EXPECT_EQ(fail.code, 3);
  EXPECT_NE(fail.err.find("warning"), std::string::npos);
}

TEST_F(TempDir, GenThenSolveIsDeterministic) {
  const auto inst = path("inst.json");
  const auto g = run_cli({"gen", "--kind", "planted-assignment", "--n", "7", "--q", "2", "--m", "10", "--seed", "5",
                      "--out", inst});
  ASSERT_EQ(g.code, 0);
  EXPECT_NE(g.out.find("planted="), std::string::npos);
  const auto a = run_cli({"solve", "--instance", inst, "--seed", "9", "--workers", "1", "--out", path("a.json")});
  const auto b = run_cli({"solve", "--instance", inst, "--seed", "9", "--workers", "4", "--out", path("b.json")});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(read_file(path("a.json")), read_file(path("b.json")));
  const Json report = Json::parse(read_file(path("a.json")));
  EXPECT_EQ(report["seed"], 9);
  EXPECT_EQ(report["problem"], "2csp");

  const auto graph = run_cli({"gen", "--kind", "random-regular", "--n", "8", "--degree", "3", "--format", "graph"});
  ASSERT_EQ(graph.code, 0);
  EXPECT_EQ(parse_graph(graph.out).m(), 12);
}

TEST_F(TempDir, QuadraticCommand) {
  const auto m = put("m.json", R"({"matrix": [[0, 1, 1, 1], [1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]]})");
  const auto r = run_cli({"quadratic", "--matrix", m, "--oracle", "--out", path("r.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("best=12 OPT=12 gap=0", 0), 0u) << r.out;
  const Json j = Json::parse(read_file(path("r.json")));
  EXPECT_EQ(j["input_scale"], 3);
  EXPECT_EQ(j["best"]["signs"].size(), 4u);
}
