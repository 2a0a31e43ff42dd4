#include <json.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using Json = nlohmann::ordered_json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmp_path(const std::string& stem) {
    return "/tmp/nullforge_cli_" + std::to_string(getpid()) + "_" + stem;
}

Run run(const std::string& args, const std::string& env = "") {
    const std::string err_file = tmp_path("stderr");
    const std::string cmd = env + " '" NULLFORGE_CLI "' " + args + " 2>" + err_file;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, "", "popen failed"};
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    Run r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, slurp(err_file)};
    std::remove(err_file.c_str());
    return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

const std::string kRankOne = R"({"rows":3,"cols":3,"domain":"rational","entries":[[1,2,3],[2,4,6],[3,6,9]]})";

} // namespace

TEST(Cli, ClockworkProfileCsvIsGeometric) {
    const auto r = run(R"x(nullmodes --model uniform_cw --n 15 --gf "q^(i-j)" --mode multiply --params q=2 --format csv)x");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 17u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"site", "amplitude", "log10_amplitude"}));
    double prev_log = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        ASSERT_EQ(rows[k].size(), 3u);
        EXPECT_EQ(std::stoi(rows[k][0]), static_cast<int>(k));
        const double amp = std::stod(rows[k][1]);
        const double lg = std::stod(rows[k][2]);
        EXPECT_NEAR(lg, std::log10(amp), 1e-12);
        if (k > 1) {
            EXPECT_NEAR(lg - prev_log, std::log10(2.0), 1e-9);
        }
        prev_log = lg;
    }
    EXPECT_NEAR(std::stod(rows[1][1]) / std::stod(rows[16][1]), std::pow(2.0, -15), 1e-12 * std::pow(2.0, -15));
}

TEST(Cli, KkSpectrumAgreesAndGapsAreLinear) {
    const auto r = run("spectrum --model kk_bidiagonal --n 50 --params Mf=1,g=1,gp=1 --analytic --numeric --gaps");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = Json::parse(r.out);
    EXPECT_LT(j["comparison"]["max_abs_error"].get<double>(), 1e-8);
    EXPECT_EQ(j["analytic"]["values"].size(), 50u);
    EXPECT_EQ(j["numeric"]["values"].size(), 50u);
    EXPECT_LT(j["gaps"]["linear_fit"]["max_rel_residual"].get<double>(), 0.05);
    EXPECT_GT(j["gaps"]["constant_fit"]["max_rel_residual"].get<double>(), 0.05);
}

TEST(Cli, SpectrumCsvHasHeaderAndMatchedColumns) {
    const auto r = run("spectrum --model kk_bidiagonal --n 4 --params Mf=1 --analytic --numeric --format csv");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_GE(rows.size(), 5u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "analytic", "numeric"}));
    for (std::size_t k = 1; k <= 4; ++k) {
        const double expect = 2 * std::sin(k * M_PI / 10.0);
        EXPECT_NEAR(std::stod(rows[k][1]), expect, 1e-12);
        EXPECT_NEAR(std::stod(rows[k][2]), expect, 1e-8);
    }
}

TEST(Cli, VerifyShippedFixturesExitsZero) {
    const auto r = run("verify --fixtures '" NULLFORGE_FIXTURE_DIR "'");
    ASSERT_EQ(r.code, 0) << r.err << r.out;
    const auto j = Json::parse(r.out);
    EXPECT_EQ(j["failed"], 0);
    EXPECT_GE(j["total"].get<int>(), 12);
    bool saw_case4 = false;
    for (const auto& f : j["fixtures"])
        if (f["file"].get<std::string>().find("case4_shifted_difference") != std::string::npos) saw_case4 = true;
    EXPECT_TRUE(saw_case4);
}

TEST(Cli, VerifyFailingFixtureExitsOne) {
    const std::string dir = tmp_path("badfix");
    ASSERT_EQ(std::system(("mkdir -p " + dir).c_str()), 0);
    auto fixture = Json::parse(slurp(NULLFORGE_FIXTURE_DIR "/case1_constant.json"));
    fixture["expected"]["nullity"] = 1;
    std::ofstream(dir + "/bad.json") << fixture.dump();
    const auto r = run("verify --fixtures " + dir);
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(std::system(("rm -rf " + dir).c_str()), 0);
}

TEST(Cli, CheckSeparableReportsWitness) {
    auto r = run(R"x(check-separable --gf "f+i-j" --n 3 --params f=3)x");
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = Json::parse(r.out);
    EXPECT_FALSE(j["report"]["separable"].get<bool>());
    EXPECT_EQ(j["report"]["witness"], Json::parse("[2,2,1,1]"));

    r = run(R"x(check-separable --gf "q^(i-j)" --n 8 --m 6 --params q=3)x");
    ASSERT_EQ(r.code, 0) << r.err;
    j = Json::parse(r.out);
    EXPECT_TRUE(j["report"]["separable"].get<bool>());
    EXPECT_EQ(j["report"]["cols"], 6);
    EXPECT_EQ(j["report"]["col_factor"][1], "1/3");
}

TEST(Cli, TransformWritesMatrixFile) {
    const std::string in = tmp_path("a.json"), out = tmp_path("b.json");
    std::ofstream(in) << kRankOne;
    const auto r = run("transform --in " + in + R"x( --gf "f^(i-j)" --mode multiply --params f=2 --out )x" + out);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = Json::parse(r.out);
    EXPECT_TRUE(summary["theorem"]["preserved"].get<bool>());
    EXPECT_EQ(summary["theorem"]["nullity_after"], 2);
    const auto b = Json::parse(slurp(out));
    EXPECT_EQ(b["entries"][2][0], "12/1");
    EXPECT_EQ(b["entries"][0][2], "3/4");
    std::remove(in.c_str());
    std::remove(out.c_str());
}

TEST(Cli, NullmodesPredictNonSeparableIsDomainError) {
    const std::string in = tmp_path("a.json");
    std::ofstream(in) << kRankOne;
    auto r = run("nullmodes --in " + in + R"x( --gf "f+i-j" --params f=3 --predict)x");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("separable"), std::string::npos) << r.err;
    EXPECT_TRUE(r.out.empty());

    r = run("nullmodes --in " + in + R"x( --gf "f^(i-j)" --params f=3 --predict)x");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = Json::parse(r.out);
    EXPECT_EQ(j["right"]["nullity"], 2);
    EXPECT_TRUE(j["predicted"]["matches"].get<bool>());
    std::remove(in.c_str());
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("spectrum --model nope --n 3").code, 2);
    EXPECT_EQ(run("nullmodes --model uniform_cw --n 4 --params zz=1").code, 2);
    EXPECT_EQ(run("nullmodes --n 4").code, 2);
    EXPECT_EQ(run("sweep --model uniform_cw --n 4 --param m=1:2 --metric nullity").code, 2);
    const auto r = run("transform --gf 1");
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(r.out.empty());
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, DomainErrorsExitOne) {
    EXPECT_EQ(run(R"x(check-separable --gf "1/(i-j)" --n 3)x").code, 1);
    EXPECT_EQ(run(R"x(check-separable --gf "i+" --n 3)x").code, 1);
    EXPECT_EQ(run("transform --in /nonexistent/x.json --gf 1").code, 1);
}

TEST(Cli, HelpExitsZero) {
    const auto r = run("--help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("nullmodes"), std::string::npos);
}

TEST(Cli, ConfigFileSuppliesFlags) {
    const std::string cfg = tmp_path("cfg.json");
    std::ofstream(cfg) << R"({"spectrum": {"model": "kk_bidiagonal", "n": 6, "params": "Mf=1", "analytic": true, "numeric": true}})";
    const auto via_cfg = run("--config " + cfg + " spectrum");
    const auto via_flags = run("spectrum --model kk_bidiagonal --n 6 --params Mf=1 --analytic --numeric");
    ASSERT_EQ(via_cfg.code, 0) << via_cfg.err;
    EXPECT_EQ(via_cfg.out, via_flags.out);
    std::remove(cfg.c_str());
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const std::string args = R"x(nullmodes --model deconstruction --n 14 --params m=1 --format json)x";
    EXPECT_EQ(run(args).out, run(args).out);
    const std::string spec = "spectrum --model kk_bidiagonal --n 30 --params Mf=1,g=1,gp=2 --analytic --numeric --gaps";
    EXPECT_EQ(run(spec).out, run(spec).out);
}

TEST(Cli, SweepIsIndependentOfThreadCount) {
    const std::string args = R"x(sweep --model uniform_cw --n 15 --gf "q^(i-j)" --mode multiply --param q=1:3:9 --metric suppression)x";
    const auto one = run(args, "NULLFORGE_THREADS=1");
    const auto many = run(args, "NULLFORGE_THREADS=4");
    ASSERT_EQ(one.code, 0) << one.err;
    EXPECT_EQ(one.out, many.out);
    const auto j = Json::parse(one.out);
    ASSERT_EQ(j["points"].size(), 9u);
    EXPECT_EQ(j["points"][4]["value"], 2);
    EXPECT_NEAR(j["points"][4]["metric"].get<double>(), std::pow(2.0, -15), 1e-12 * std::pow(2.0, -15));
    EXPECT_EQ(j["points"][1]["value"], "5/4");
}

TEST(Cli, SweepOverSizeTracksDeconstructionLaw) {
    const auto r = run("sweep --model deconstruction --n 2 --params m=1 --param n=2:11:10 --metric nullity --format csv", "NULLFORGE_THREADS=3");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"value", "nullity"}));
    for (std::size_t p = 1; p < rows.size(); ++p) {
        const int n = std::stoi(rows[p][0]);
        EXPECT_EQ(std::stoi(rows[p][1]), n % 3 == 2 ? 1 : 0) << "n=" << n;
    }
}
