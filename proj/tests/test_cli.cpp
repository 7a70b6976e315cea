#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "regsir_cli_test";

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    fs::create_directories(kWork);
    const fs::path out = kWork / "stdout.txt";
    const fs::path err = kWork / "stderr.txt";
    const std::string cmd = std::string(REGSIR_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_file(const std::string& name, const std::string& body) {
    fs::create_directories(kWork);
    const fs::path p = kWork / name;
    std::ofstream f(p);
    f << body;
    return p;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

const char* kFastParams = R"({
  "gamma": 0.091, "alpha": 0.0679, "u": 8e-4, "K": 0.0229,
  "c_s": 17.5392, "I0": 100.0, "beta0": 0.02
})";

} // namespace

TEST_CASE("zero horizon emits exactly the initial state") {
    const fs::path p = write_file("fast.json", kFastParams);
    const RunResult r =
        run_cli("simulate --model fast --params " + p.string() +
                " --horizon 0");
    CHECK(r.exit_code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "t");
    CHECK(std::stod(rows[1][0]) == 0.0);
    CHECK(std::stod(rows[1][1]) == 100.0);
    // y = c_s * beta * I
    CHECK(std::stod(rows[1][3]) ==
          doctest::Approx(17.5392 * 0.02 * 100.0).epsilon(1e-12));
}

TEST_CASE("full-model output conserves the population") {
    const fs::path p = write_file("full.json", R"({
      "c": 2.1924e-7, "gamma": 0.091, "alpha": 0.0679, "u": 8e-4,
      "epsilon": 1.25e-8, "K": 0.0229,
      "S0": 80000000.0, "I0": 1.0, "R0": 0.0, "beta0": 0.0229
    })");
    const RunResult r = run_cli("simulate --model full --params " +
                                p.string() + " --horizon 30");
    CHECK(r.exit_code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 32);
    const double total0 = std::stod(rows[1][5]);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::fabs(std::stod(rows[i][5]) - total0) / total0 <= 1e-8);
        CHECK(std::stod(rows[i][0]) == static_cast<double>(i - 1));
    }
}

TEST_CASE("json output format") {
    const fs::path p = write_file("fast.json", kFastParams);
    const RunResult r =
        run_cli("simulate --model fast --params " + p.string() +
                " --horizon 10 --format json");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["model"] == "fast");
    REQUIRE(j["columns"].size() == 4);
    CHECK(j["rows"].size() == 11);
}

TEST_CASE("log-coordinate model matches the linear one") {
    const fs::path p = write_file("fast.json", kFastParams);
    const RunResult rl =
        run_cli("simulate --model fast --params " + p.string() +
                " --horizon 40");
    const RunResult rp =
        run_cli("simulate --model log-fast --params " + p.string() +
                " --horizon 40");
    CHECK(rl.exit_code == 0);
    CHECK(rp.exit_code == 0);
    const auto a = parse_csv(rl.out);
    const auto b = parse_csv(rp.out);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 1; i < a.size(); ++i) {
        const double I_lin = std::stod(a[i][1]);
        const double I_log = std::stod(b[i][3]);
        CHECK(I_log == doctest::Approx(I_lin).epsilon(1e-5));
    }
}

TEST_CASE("slow and closed-form reductions agree") {
    const fs::path p = write_file("slow.json", R"({
      "gamma": 0.091, "alpha": 0.0679, "u": 8e-4, "K": 0.0229,
      "c_tilde": 1.0, "epsilon": 1e-4, "S0_rescaled": 8.0
    })");
    const RunResult rs = run_cli("simulate --model slow --params " +
                                 p.string() + " --horizon 50");
    const RunResult rc = run_cli("simulate --model closed-form-monod "
                                 "--params " +
                                 p.string() + " --horizon 50");
    CHECK(rs.exit_code == 0);
    CHECK(rc.exit_code == 0);
    const auto a = parse_csv(rs.out);
    const auto b = parse_csv(rc.out);
    REQUIRE(a.size() == 52);
    REQUIRE(b.size() == 52);
    for (std::size_t i = 1; i < a.size(); ++i) {
        CHECK(std::stod(a[i][2]) ==
              doctest::Approx(std::stod(b[i][2])).epsilon(1e-6));
        // infectives column: QSS of the numeric flow vs closed form
        CHECK(std::stod(a[i][3]) ==
              doctest::Approx(std::stod(b[i][3])).epsilon(1e-4));
    }
}

TEST_CASE("identical seeds give byte-identical outputs") {
    const fs::path p = write_file("fast.json", kFastParams);
    const fs::path o1 = kWork / "det1.csv";
    const fs::path o2 = kWork / "det2.csv";
    CHECK(run_cli("simulate --model fast --params " + p.string() +
                  " --horizon 60 --out " + o1.string())
              .exit_code == 0);
    CHECK(run_cli("simulate --model fast --params " + p.string() +
                  " --horizon 60 --out " + o2.string())
              .exit_code == 0);
    CHECK(slurp(o1) == slurp(o2));
    CHECK(!slurp(o1).empty());
}

TEST_CASE("invalid inputs exit with code 2") {
    CHECK(run_cli("simulate --model fast --params /nonexistent.json")
              .exit_code == 2);
    const fs::path bad = write_file("bad.json", "{ not json");
    CHECK(run_cli("simulate --model fast --params " + bad.string())
              .exit_code == 2);
    const fs::path p = write_file("fast.json", kFastParams);
    CHECK(run_cli("simulate --model warp --params " + p.string())
              .exit_code == 2);
    CHECK(run_cli("simulate --model fast --params " + p.string() +
                  " --format yaml")
              .exit_code == 2);
    CHECK(run_cli("simulate").exit_code == 2);
    const fs::path missing = write_file("missing.json",
                                        R"({"gamma": 0.1})");
    CHECK(run_cli("simulate --model fast --params " + missing.string())
              .exit_code == 2);
}

TEST_CASE("numerical breakdown exits with code 3") {
    const fs::path p = write_file("stiff.json", R"({
      "gamma": 0.1, "alpha": 500.0, "u": 1e-3, "K": 0.02,
      "c_s": 20.0, "I0": 10.0, "beta0": 5.0,
      "method": "rk4", "dt": 0.9
    })");
    const RunResult r = run_cli("simulate --model fast --params " +
                                p.string() + " --horizon 200");
    CHECK(r.exit_code == 3);
}

TEST_CASE("assumption violations exit with code 4") {
    const fs::path p = write_file("thin.json", R"({
      "gamma": 0.2, "alpha": 0.1, "u": 1e-3, "K": 0.01, "c_s": 1.0
    })");
    const RunResult r = run_cli("assign --params " + p.string() +
                                " --istar 100");
    CHECK(r.exit_code == 4);
}

TEST_CASE("gain assignment verifies its own round trip") {
    const fs::path p = write_file("assign.json", R"({
      "gamma": 0.091, "alpha": 0.0679, "K": 0.0229, "c_s": 17.5392
    })");
    const RunResult r = run_cli("assign --params " + p.string() +
                                " --istar 2500");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["u"].get<double>() > 0.0);
    CHECK(std::fabs(j["round_trip_relative_error"].get<double>()) <= 1e-9);
    CHECK(j["endemic"]["I"].get<double>() ==
          doctest::Approx(2500.0).epsilon(1e-9));
}

TEST_CASE("phase-plane report on the reference instance") {
    const fs::path p = write_file("analyze.json", R"({
      "gamma": 0.091, "alpha": 0.0679, "u": 8e-4, "K": 0.0229,
      "c_s": 17.5392
    })");
    const RunResult r = run_cli("analyze --params " + p.string());
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["assumptions"]["a4"] == true);
    CHECK(j["disease_free"]["present"] == true);
    CHECK(j["disease_free"]["classification"] == "exp-unstable");
    CHECK(j["endemic"]["present"] == true);
    CHECK(j["endemic"]["I"].get<double>() ==
          doctest::Approx(4267.138).epsilon(1e-3));
    CHECK(j["endemic"]["classification"] == "exp-stable");
    CHECK(j["r0_at_disease_free"].get<double>() > 1.0);
    CHECK(j["lyapunov_spot_check"]["available"] == true);
    CHECK(j["lyapunov_spot_check"]["min_V"].get<double>() >= 0.0);
    CHECK(j["lyapunov_spot_check"]["max_Vdot"].get<double>() <= 1e-12);
    CHECK(j["vector_field"].size() == 225);
    CHECK(j["nullclines"]["beta_nullcline"].size() > 0);
}

TEST_CASE("report below the sustaining threshold") {
    const fs::path p = write_file("analyze_low.json", R"({
      "gamma": 0.091, "alpha": 0.0679, "u": 8e-4, "K": 0.0229, "c_s": 3.0
    })");
    const RunResult r = run_cli("analyze --params " + p.string());
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["assumptions"]["a4"] == false);
    CHECK(j["endemic"]["present"] == false);
    CHECK(j["disease_free"]["present"] == true);
    CHECK(j["disease_free"]["classification"] == "exp-stable");
    CHECK(j["lyapunov_spot_check"]["available"] == false);
}

TEST_CASE("a missing data file leaves no partial fit outputs") {
    const fs::path p = write_file("fitcfg.json", R"({"S_tilde": 19.45})");
    const fs::path prefix = kWork / "ghost";
    std::error_code ec;
    fs::remove(prefix.string() + ".json", ec);
    fs::remove(prefix.string() + "_curve.csv", ec);
    const RunResult r = run_cli("fit --params " + p.string() +
                                " --data /nonexistent.csv --out " +
                                prefix.string());
    CHECK(r.exit_code == 2);
    CHECK_FALSE(fs::exists(prefix.string() + ".json"));
    CHECK_FALSE(fs::exists(prefix.string() + "_curve.csv"));
}

TEST_CASE("fit round trip on the bundled series") {
    const std::string data = std::string(REGSIR_DATA_DIR) + "/ny.csv";
    const fs::path p = write_file("fitny.json", R"({
      "S_tilde": 19.45, "window": [0, 59],
      "seeds": 2, "restarts": 0, "max_evals": 1500
    })");
    const fs::path prefix = kWork / "nyfit";
    const RunResult r = run_cli("fit --params " + p.string() + " --data " +
                                data + " --seed 7 --out " + prefix.string());
    CHECK(r.exit_code == 0);
    const json j = json::parse(slurp(prefix.string() + ".json"));
    CHECK(j["loss"].get<double>() >= 0.0);
    CHECK(j["params"]["gamma"].get<double>() > 0.0);
    CHECK(j["window"][1] == 59);
    const auto curve = parse_csv(slurp(prefix.string() + "_curve.csv"));
    CHECK(curve.size() == 322); // header + every data date
    CHECK(curve[0][0] == "date");

    // same seed, same bytes
    const fs::path prefix2 = kWork / "nyfit2";
    const RunResult r2 = run_cli("fit --params " + p.string() + " --data " +
                                 data + " --seed 7 --out " +
                                 prefix2.string());
    CHECK(r2.exit_code == 0);
    CHECK(slurp(prefix.string() + ".json") ==
          slurp(prefix2.string() + ".json"));
}

TEST_CASE("population sweep summary") {
    const fs::path p = write_file("sweep.json", R"({
      "cs_const": 2.0, "gamma": 0.1, "alpha": 0.1, "u": 1e-3,
      "K": 0.05, "I0": 1.0, "beta0": 0.05
    })");
    const fs::path prefix = kWork / "swp";
    const RunResult r = run_cli("sweep --params " + p.string() +
                                " --populations 2000,4000 --horizon 5 "
                                "--out " +
                                prefix.string());
    CHECK(r.exit_code == 0);
    const auto rows = parse_csv(slurp(prefix.string() + "_summary.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][0] == "population");
    CHECK(std::stod(rows[1][1]) == doctest::Approx(2.0 / 2000.0));
    CHECK(std::stod(rows[2][1]) == doctest::Approx(2.0 / 4000.0));
    CHECK(std::stod(rows[1][2]) == doctest::Approx(1.0 / 2000.0));
    // per-population trajectory files exist
    CHECK(fs::exists(prefix.string() + "_N2000.csv"));
    CHECK(fs::exists(prefix.string() + "_N4000.csv"));
    CHECK(run_cli("sweep --params " + p.string() +
                  " --populations nope --out " + prefix.string())
              .exit_code == 2);
}
