#include "mot/instance_io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <string>

using namespace mot;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
};

// one directory per test so that ctest can run them in parallel
fs::path dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const auto d = fs::path(TEST_SCRATCH_DIR) / "cli" / info->name();
  fs::create_directories(d);
  return d;
}

Run motcli(const std::string& args) {
  const auto out = dir() / "stdout.txt";
  const std::string cmd = std::string("\"") + MOTCLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out);
  return r;
}

fs::path write(const std::string& name, const std::string& text) {
  const auto p = dir() / name;
  write_text_file(p, text);
  return p;
}

const char* kThreeQuarter = R"({
  "marginals": [ {"atoms": [-1, 1], "weights": [0.5, 0.5]},
                 {"atoms": [-2, 2], "weights": [0.5, 0.5]} ],
  "cost": {"name": "squared_increment"}
})";

const char* kReversed = R"({
  "marginals": [ {"atoms": [-1, 1], "weights": [0.5, 0.5]},
                 {"atoms": [0], "weights": [1]} ],
  "cost": {"name": "squared_increment"}
})";

}  // namespace

TEST(Cli, CheckExitCodes) {
  const auto ok = motcli("check " + write("ok.json", kThreeQuarter).string());
  EXPECT_EQ(ok.code, 0) << ok.out;
  const auto bad = motcli("check " + write("reversed.json", kReversed).string());
  EXPECT_EQ(bad.code, 2) << bad.out;
  EXPECT_NE(bad.out.find("potential"), std::string::npos) << bad.out;
  const auto malformed = motcli("check " + write("malformed.json", "{\n  \"marginals\": [,\n}").string());
  EXPECT_EQ(malformed.code, 1);
  EXPECT_NE(malformed.out.find("line 2"), std::string::npos) << malformed.out;
  EXPECT_EQ(motcli("check " + (dir() / "absent.json").string()).code, 1);
  EXPECT_EQ(motcli("frobnicate").code, 1);
}

TEST(Cli, SolveJsonAndArtifacts) {
  const auto inst = write("solve.json", kThreeQuarter);
  const auto out = dir() / "solve_out";
  const auto r = motcli("solve " + inst.string() + " --method both --json --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["primal"]["value"].get<double>(), 3.0, 1e-12);
  EXPECT_NEAR(j["dual"]["value"].get<double>(), 3.0, 1e-9);
  EXPECT_TRUE(fs::exists(out / "coupling.csv"));
  EXPECT_TRUE(fs::exists(out / "trace.csv"));

  const auto cert = certificate_from_json(read_text_file(out / "certificate.json"));
  const auto parsed = load_instance(inst);
  EXPECT_NEAR(dual_objective(cert.variant, parsed.cost, parsed.marginals, cert.dual_variables), cert.dual_value,
              1e-10);
}

TEST(Cli, SolveInfeasibleAndCapped) {
  EXPECT_EQ(motcli("solve " + write("rev2.json", kReversed).string()).code, 2);
  const auto capped = write("capped.json", R"({
    "marginals": [ {"atoms": [-1, 1], "weights": [0.5, 0.5]},
                   {"atoms": [-2, 2], "weights": [0.5, 0.5]} ],
    "cost": {"name": "squared_increment"},
    "options": {"max_variables": 2}
  })");
  EXPECT_EQ(motcli("solve " + capped.string() + " --method primal").code, 3);
}

TEST(Cli, ZeroCostCertifies) {
  const auto inst = write("zero.json", R"({
    "marginals": [ {"atoms": [0], "weights": [1]},
                   {"atoms": [-1, 1], "weights": [0.5, 0.5]},
                   {"atoms": [-2, 0, 2], "weights": [0.25, 0.5, 0.25]} ],
    "cost": {"name": "constant", "value": 0}
  })");
  const auto r = motcli("certify " + inst.string() + " --json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["primal_min"].get<double>(), 0.0);
  EXPECT_EQ(j["remark_a"]["value"].get<double>(), 0.0);
}

TEST(Cli, CertifyWritesCertificates) {
  const auto out = dir() / "certify_out";
  const auto r = motcli("certify " + write("cert.json", kThreeQuarter).string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("certified"), std::string::npos);
  for (const char* name : {"certificate_proposition.json", "certificate_remark_b.json",
                           "certificate_remark_a.json", "coupling_min.csv", "coupling_max.csv"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  EXPECT_EQ(certificate_from_json(read_text_file(out / "certificate_remark_a.json")).variant, Variant::remark_a);
}

TEST(Cli, Envelope) {
  const auto csv = write("zigzag.csv", "x,f\n0,0\n1,-1\n2,3\n3,0\n");
  const auto v = motcli("envelope " + csv.string() + " --at 2");
  ASSERT_EQ(v.code, 0) << v.out;
  EXPECT_DOUBLE_EQ(std::stod(v.out), -0.5);
  const auto c = motcli("envelope " + csv.string() + " --at 1 --concave");
  EXPECT_DOUBLE_EQ(std::stod(c.out), 1.5);
  EXPECT_EQ(motcli("envelope " + csv.string() + " --at 9").code, 1);
  EXPECT_EQ(motcli("envelope " + write("unsorted.csv", "1,0\n0,0\n").string()).code, 1);
}

TEST(Cli, Quantize) {
  const auto r = motcli("quantize --location 0 --scale 0.3 --m 4 --json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["atoms"].size(), 4u);
  EXPECT_NEAR(j["mean"].get<double>(), std::exp(0.045), 1e-9);
  EXPECT_EQ(motcli("quantize --location 0 --scale -1 --m 4").code, 1);
}
