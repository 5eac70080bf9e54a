// End-to-end checks that spawn the installed binary. The path comes from
// the build system; set RPVBAYES_CLI to point at another build if needed.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string cli_path() {
    if (const char* env = std::getenv("RPVBAYES_CLI")) return env;
    return RPVBAYES_CLI_PATH;
}

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = "\"" + cli_path() + "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    EXPECT_NE(pipe, nullptr) << cmd;
    CliResult result;
    if (!pipe) return result;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) result.output.append(buf, n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.is_open()) << path;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += (c == '\n');
    return n;
}

class CliTest : public ::testing::Test {
  protected:
    fs::path dir;

    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() /
              (std::string("rpvbayes_cli_") + info->name() + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    void TearDown() override { fs::remove_all(dir); }

    fs::path write_file(const std::string& name, const std::string& text) {
        const fs::path p = dir / name;
        std::ofstream out(p, std::ios::binary);
        out << text;
        return p;
    }
};

TEST_F(CliTest, VersionFlagPrintsToolAndVersion) {
    const auto r = run_cli("--version");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("rpvbayes 1.0.0"), std::string::npos) << r.output;
}

TEST_F(CliTest, RunStudyWithoutSourceFails) {
    const auto r = run_cli("run-study");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("--config"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("--preset"), std::string::npos);
}

TEST_F(CliTest, MissingConfigFileNamesThePath) {
    const auto r = run_cli("run-study --config /nonexistent/study.ini");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("/nonexistent/study.ini"), std::string::npos) << r.output;
}

TEST_F(CliTest, ConfigAndPresetAreMutuallyExclusive) {
    const auto r = run_cli("run-study --config x.ini --preset futility");
    EXPECT_NE(r.exit_code, 0);
}

TEST_F(CliTest, PresetStudyWritesEveryReportFile) {
    const auto r = run_cli("--seed 7 --output " + dir.string() +
                           " run-study --preset revenue-trap --n-runs 10 --samples 400"
                           " --max-days 12");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("scenario revenue-trap"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("wrote "), std::string::npos);

    const auto runs = slurp(dir / "revenue-trap_runs.csv");
    EXPECT_EQ(count_lines(runs), 21u);  // header + 10 runs x 2 methods
    EXPECT_EQ(runs.substr(0, runs.find('\n')),
              "run_id,method,outcome,winner,duration_days,data_seed,final_losses");

    const auto agg = slurp(dir / "revenue-trap_aggregate.csv");
    EXPECT_NE(agg.find("revenue-trap,bayesian,10,"), std::string::npos) << agg;
    EXPECT_NE(agg.find("revenue-trap,peeking,10,"), std::string::npos);

    EXPECT_TRUE(fs::exists(dir / "revenue-trap_aggregate.txt"));

    const auto meta = slurp(dir / "metadata.txt");
    EXPECT_NE(meta.find("tool = rpvbayes 1.0.0"), std::string::npos) << meta;
    EXPECT_NE(meta.find("seed = 7"), std::string::npos);
    EXPECT_NE(meta.find("jobs = 1"), std::string::npos);

    const auto echo = slurp(dir / "config_echo.ini");
    EXPECT_NE(echo.find("seed = 7"), std::string::npos) << echo;
    EXPECT_NE(echo.find("[scenario revenue-trap]"), std::string::npos);
}

TEST_F(CliTest, JobCountNeverChangesRecordBytes) {
    const fs::path d1 = dir / "j1";
    const fs::path d4 = dir / "j4";
    const std::string tail =
        " run-study --preset clear-winner --n-runs 6 --samples 400 --max-days 10";
    const auto r1 = run_cli("--jobs 1 --output " + d1.string() + tail);
    const auto r4 = run_cli("--jobs 4 --output " + d4.string() + tail);
    ASSERT_EQ(r1.exit_code, 0) << r1.output;
    ASSERT_EQ(r4.exit_code, 0) << r4.output;
    EXPECT_EQ(slurp(d1 / "clear-winner_runs.csv"), slurp(d4 / "clear-winner_runs.csv"));
    EXPECT_EQ(slurp(d1 / "clear-winner_aggregate.csv"), slurp(d4 / "clear-winner_aggregate.csv"));
}

TEST_F(CliTest, ConfigEchoReproducesTheRunWithoutFlags) {
    const auto config = write_file("study.ini", R"([engine]
sample_count = 400
n_runs = 4

[scenario tiny]
daily_visitors = 800
max_days = 12
correct_winner = 1
variant = 0.03 100 40
variant = 0.05 100 40
)");
    const fs::path d1 = dir / "first";
    const fs::path d2 = dir / "second";
    const auto r1 = run_cli("--seed 11 --output " + d1.string() + " run-study --config " +
                            config.string());
    ASSERT_EQ(r1.exit_code, 0) << r1.output;
    // No --seed here: the echo must carry the effective seed on its own.
    const auto r2 = run_cli("--output " + d2.string() + " run-study --config " +
                            (d1 / "config_echo.ini").string());
    ASSERT_EQ(r2.exit_code, 0) << r2.output;
    EXPECT_EQ(slurp(d1 / "tiny_runs.csv"), slurp(d2 / "tiny_runs.csv"));
    EXPECT_EQ(slurp(d1 / "config_echo.ini"), slurp(d2 / "config_echo.ini"));
}

std::string state_two_variants(double conv_a_pct, double conv_b_pct) {
    // 20k visitors each, AOV 100 with spread; conversion counts set the story.
    const auto block = [](int idx, double conv_pct) {
        const long long k = static_cast<long long>(20000 * conv_pct / 100.0);
        std::ostringstream out;
        out << "[variant " << idx << "]\n";
        out << "visitors = 20000\n";
        out << "conversions = " << k << "\n";
        out << "value_count = " << k << "\n";
        out << "value_sum = " << k * 100 << "\n";
        out << "value_sum_sq = " << k * 11600 << "\n";  // per-value E[x^2] = 100^2 + 40^2
        return out.str();
    };
    return "[engine]\nepsilon = 0.01\nsample_count = 4000\ncontrol = 0\n\n" + block(0, conv_a_pct) +
           "\n" + block(1, conv_b_pct);
}

TEST_F(CliTest, EvaluateShipsTheDominantChallenger) {
    const auto state = write_file("state.ini", state_two_variants(3.0, 5.0));
    const auto r = run_cli("evaluate " + state.string());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("verdict: stop, ship variant B"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("A*"), std::string::npos);  // control marker
    EXPECT_NE(r.output.find("P(best)"), std::string::npos);
    EXPECT_NE(r.output.find("E[loss]"), std::string::npos);
}

TEST_F(CliTest, EvaluateStopsForFutilityWhenControlDominates) {
    const auto state = write_file("state.ini", state_two_variants(5.0, 3.0));
    const auto r = run_cli("evaluate " + state.string());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("verdict: stop for futility, keep control"), std::string::npos)
        << r.output;
}

TEST_F(CliTest, EvaluateContinuesOnThinData) {
    const auto state = write_file("state.ini", R"([engine]
epsilon = 0.01
sample_count = 2000

[variant 0]
visitors = 50
conversions = 2
value_count = 2
value_sum = 200
value_sum_sq = 20100

[variant 1]
visitors = 50
conversions = 3
value_count = 3
value_sum = 290
value_sum_sq = 28200
)");
    const auto r = run_cli("evaluate " + state.string());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("verdict: continue collecting data"), std::string::npos) << r.output;
}

TEST_F(CliTest, EvaluateRejectsImpossibleCountsNamingTheVariant) {
    const auto state = write_file("state.ini", R"([variant 0]
visitors = 100
conversions = 5
value_count = 5
value_sum = 500
value_sum_sq = 50100

[variant 1]
visitors = 10
conversions = 50
value_count = 50
value_sum = 5000
value_sum_sq = 501000
)");
    const auto r = run_cli("evaluate " + state.string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("variant 1"), std::string::npos) << r.output;
}

class PpcCliTest : public CliTest {
  protected:
    fs::path state;
    fs::path transactions;

    void SetUp() override {
        CliTest::SetUp();
        state = write_file("state.ini", R"([engine]
sample_count = 2000

[variant 0]
visitors = 200
conversions = 20
value_count = 20
value_sum = 2000
value_sum_sq = 208000
)");
        // Twenty values pairing 80 and 120: sum 2000, sum of squares 208000.
        std::ostringstream tx;
        for (int i = 0; i < 10; ++i) tx << "80 120\n";
        transactions = write_file("tx.txt", tx.str());
    }
};

TEST_F(PpcCliTest, ReportsObservedStatisticAndPValue) {
    const auto r = run_cli("ppc " + state.string() + " " + transactions.string() +
                           " --statistic mean --replicates 50");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("variant A: visitors 200, transactions 20"), std::string::npos)
        << r.output;
    EXPECT_NE(r.output.find("statistic mean: observed 100.0000"), std::string::npos);
    EXPECT_NE(r.output.find("replicates 50:"), std::string::npos);
    EXPECT_NE(r.output.find("ppc_p_value = "), std::string::npos);
}

TEST_F(PpcCliTest, SingleReplicateGivesDegenerateZeroOrOne) {
    const auto r = run_cli("ppc " + state.string() + " " + transactions.string() +
                           " --replicates 1");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const bool zero = r.output.find("ppc_p_value = 0.0000") != std::string::npos;
    const bool one = r.output.find("ppc_p_value = 1.0000") != std::string::npos;
    EXPECT_TRUE(zero || one) << r.output;
}

TEST_F(PpcCliTest, UnknownStatisticListsTheValidNames) {
    const auto r = run_cli("ppc " + state.string() + " " + transactions.string() +
                           " --statistic median");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("valid: mean, variance, max, zero_fraction"), std::string::npos)
        << r.output;
}

TEST_F(PpcCliTest, OutOfRangeVariantFails) {
    const auto r = run_cli("ppc " + state.string() + " " + transactions.string() + " --variant 5");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("variant 5"), std::string::npos) << r.output;
}

TEST_F(PpcCliTest, MalformedTransactionsReportTheLine) {
    const auto bad = write_file("bad.txt", "12.5\nforty\n");
    const auto r = run_cli("ppc " + state.string() + " " + bad.string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("bad.txt:2"), std::string::npos) << r.output;
}

TEST_F(PpcCliTest, MismatchedTransactionsAreRejected) {
    std::ostringstream tx;
    tx << "85 120\n";  // one value nudged: totals no longer match the state file
    for (int i = 0; i < 9; ++i) tx << "80 120\n";
    const auto shifted = write_file("shifted.txt", tx.str());
    const auto r = run_cli("ppc " + state.string() + " " + shifted.string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.output.find("error:"), std::string::npos) << r.output;
}

}  // namespace
