#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "cli.hpp"

using namespace cscs;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
  cli::Json json() const { return cli::Json::parse(out); }
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cscs_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string simulate(Index p, Index n, double zf = 0.6, std::uint64_t seed = 3) {
    const std::string data = path("data.csv");
    const Invocation r = invoke({"simulate", "--p", std::to_string(p), "--n", std::to_string(n), "--zero-fraction",
                       std::to_string(zf), "--seed", std::to_string(seed), "--output", data, "--precision-output",
                       path("omega.csv"), "--t-output", path("t.csv")});
    EXPECT_EQ(r.code, 0) << r.err;
    return data;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, FitUnpenalizedRecoversInverse) {
  const std::string data = simulate(5, 200);
  const Invocation r = invoke({"fit", "--input", data, "--lambda", "0", "--epsilon", "1e-12", "--max-iter", "100000",
                     "--output", path("l.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["schema"], "cscs-report/1");
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_EQ(j["rows"].size(), 5u);
  const MatrixXd l = read_csv_matrix(path("l.csv"));
  const MatrixXd omega = l.transpose() * l;
  const MatrixXd inv = sample_covariance(DataMatrix(read_csv_matrix(data))).values().inverse();
  EXPECT_LE((omega - inv).norm() / inv.norm(), 1e-6);
}

TEST_F(CliTest, FitHugePenaltyIsDiagonal) {
  const std::string data = simulate(6, 30);
  const Invocation r = invoke({"fit", "--input", data, "--lambda", "1e9", "--output", path("l.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["nonzeros"].get<int>(), 0);
  const MatrixXd l = read_csv_matrix(path("l.csv"));
  EXPECT_TRUE(l.isApprox(MatrixXd(l.diagonal().asDiagonal())));
}

TEST_F(CliTest, SparseCholeskyReportsDegeneracyWithExitZero) {
  const std::string data = simulate(8, 7);
  const Invocation r = invoke({"fit", "--method", "sparse-cholesky", "--input", data, "--lambda", "0.1", "--output",
                     path("t_hat.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_TRUE(j.contains("degenerate"));
  EXPECT_EQ(j["d"].size(), 8u);
}

TEST_F(CliTest, FitCovarianceInputAndQuantile) {
  const std::string data = simulate(4, 50);
  write_csv_matrix(path("s.csv"), sample_covariance(DataMatrix(read_csv_matrix(data))).values());
  const Invocation r = invoke({"fit", "--input", path("s.csv"), "--covariance", "--n", "50", "--quantile", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto values = r.json()["penalty"]["values"];
  const PenaltySpec expected = quantile_penalty(50, 4, 0.1);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(values[i].get<double>(), expected.values()[i]);
}

TEST_F(CliTest, StrictNonConvergenceExitsThree) {
  const std::string data = simulate(10, 5);
  const Invocation loose = invoke({"fit", "--input", data, "--lambda", "0.01", "--max-iter", "1", "--epsilon", "1e-14"});
  EXPECT_EQ(loose.code, 0);
  EXPECT_FALSE(loose.json()["converged"].get<bool>());
  const Invocation strict =
      invoke({"fit", "--input", data, "--lambda", "0.01", "--max-iter", "1", "--epsilon", "1e-14", "--strict"});
  EXPECT_EQ(strict.code, 3);
}

TEST_F(CliTest, UsageErrorsExitTwoWithOneLine) {
  const std::string data = simulate(4, 20);
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"fit", "--input", data},
           {"fit", "--input", data, "--lambda", "0.1", "--quantile", "0.1"},
           {"fit", "--input", path("missing.csv"), "--lambda", "0.1"},
           {"fit", "--input", data, "--lambda", "0.1", "--output", data},
           {"fit", "--input", data, "--lambda", "0.1", "--method", "glasso"},
           {"experiment", "unknown"},
           {"nonsense"}}) {
    const Invocation r = invoke(args);
    EXPECT_EQ(r.code, 2) << args.front();
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  }
}

TEST_F(CliTest, MalformedCsvExitsTwo) {
  std::ofstream(path("bad.csv")) << "1,2\n3\n";
  EXPECT_EQ(invoke({"fit", "--input", path("bad.csv"), "--lambda", "0.1"}).code, 2);
}

TEST_F(CliTest, TuneBicSelectsMinimum) {
  const std::string data = simulate(6, 40);
  const Invocation r = invoke({"tune", "--input", data, "--criterion", "bic", "--grid", "0.01,0.05,0.1,0.5,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  const auto scores = j["scores"].get<std::vector<double>>();
  ASSERT_EQ(scores.size(), 5u);
  const auto best = static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
  EXPECT_EQ(j["selected_index"].get<std::size_t>(), best);
  EXPECT_DOUBLE_EQ(j["selected"].get<double>(), j["grid"][best].get<double>());
}

TEST_F(CliTest, TuneCvDeterministic) {
  const std::string data = simulate(5, 30);
  const std::vector<std::string> args{"tune", "--input", data, "--criterion", "cv", "--k", "5", "--seed", "7",
                                      "--grid-count", "4"};
  const Invocation a = invoke(args);
  const Invocation b = invoke(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, TuneCvRejectsCovarianceInput) {
  const std::string data = simulate(4, 30);
  write_csv_matrix(path("s.csv"), sample_covariance(DataMatrix(read_csv_matrix(data))).values());
  const Invocation r = invoke({"tune", "--input", path("s.csv"), "--covariance", "--criterion", "cv", "--seed", "1"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, TuneQuantileMatchesPenalty) {
  const std::string data = simulate(5, 100);
  const Invocation r = invoke({"tune", "--input", data, "--criterion", "quantile", "--alpha", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["selected"].get<std::vector<double>>(), quantile_penalty(100, 5, 0.1).values());
}

TEST_F(CliTest, SimulateDeterministic) {
  simulate(7, 12, 0.6, 11);
  const MatrixXd first = read_csv_matrix(path("data.csv"));
  simulate(7, 12, 0.6, 11);
  EXPECT_EQ(first, read_csv_matrix(path("data.csv")));
}

TEST_F(CliTest, EvaluateReportsMetrics) {
  const std::string data = simulate(5, 60);
  ASSERT_EQ(invoke({"fit", "--input", data, "--lambda", "0.05", "--output", path("l.csv")}).code, 0);
  const Invocation r = invoke({"evaluate", "--factor", path("l.csv"), "--truth-precision", path("omega.csv"), "--truth-t",
                     path("t.csv"), "--test", data, "--forecast-split", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  const MatrixXd l = read_csv_matrix(path("l.csv"));
  EXPECT_NEAR(j["frobenius_error"].get<double>(),
              frobenius_error(read_csv_matrix(path("omega.csv")), l.transpose() * l), 1e-12);
  EXPECT_GE(j["tpr"].get<double>(), 0.0);
  EXPECT_EQ(j["forecast_error"].size(), 3u);
}

TEST_F(CliTest, FloatsUseSeventeenDigits) {
  const std::string data = simulate(3, 10);
  const Invocation r = invoke({"fit", "--input", data, "--lambda", "0.1"});
  const auto pos = r.out.find("\"objective\": ");
  ASSERT_NE(pos, std::string::npos);
  const std::string number = r.out.substr(pos + 13, r.out.find(',', pos) - pos - 13);
  const double v = std::stod(number);
  EXPECT_EQ(number, format_double(v));
}

TEST_F(CliTest, ExperimentDegeneracySmall) {
  const Invocation r = invoke({"experiment", "degeneracy", "--p", "8", "--n", "7", "--seeds", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["runs"].size(), 20u);
  EXPECT_GE(j["degenerate_runs"].get<int>(), 1);
  bool floor_hit = false;
  for (const auto& run : j["runs"])
    for (const auto& v : run["min_d_trace"]) floor_hit = floor_hit || (v.is_number() && v.get<double>() <= 1e-10);
  EXPECT_TRUE(floor_hit);
}

TEST_F(CliTest, ExperimentRocAucAndFrobeniusSmall) {
  const Invocation roc = invoke({"experiment", "roc-auc", "--p", "15", "--n", "10", "--reps", "2", "--grid-count", "6",
                       "--zero-fraction", "0.8"});
  ASSERT_EQ(roc.code, 0) << roc.err;
  EXPECT_EQ(roc.json()["methods"].size(), 3u);
  const Invocation frob = invoke({"experiment", "frobenius-path", "--p", "10", "--n", "8", "--reps", "2", "--grid-count", "4",
                        "--zero-fraction", "0.8"});
  ASSERT_EQ(frob.code, 0) << frob.err;
  EXPECT_EQ(frob.json()["methods"][0]["mean_error"].size(), 4u);
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string exe = CSCS_CLI_PATH;
  const std::string quiet = " > /dev/null 2>&1";
  auto status = [&](const std::string& cmd) {
    const int raw = std::system((exe + " " + cmd + quiet).c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const std::string data = simulate(5, 8);
  EXPECT_EQ(status("fit --input " + data + " --lambda 0.2"), 0);
  EXPECT_EQ(status("fit --input " + data), 2);
  EXPECT_EQ(status("fit --input " + data + " --lambda 0.01 --max-iter 1 --epsilon 1e-14 --strict"), 3);
  EXPECT_EQ(status("--help"), 0);
}
