#include <filesystem>
#include <map>
#include <sstream>

#include "doctest.h"
#include "mfdrift/cli.hpp"
#include "mfdrift/io.hpp"

namespace fs = std::filesystem;
using mfdrift::run_cli;

namespace {

struct Run
{
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("mfdrift_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::map<std::string, std::string> directory_contents(const fs::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        files[entry.path().filename().string()] = mfdrift::read_text_file(entry.path().string());
    }
    return files;
}

}  // namespace

TEST_CASE("validate and presets")
{
    CHECK(cli({"validate", "--preset", "single-polynomial"}).code == 0);
    const Run listed = cli({"presets"});
    CHECK(listed.code == 0);
    CHECK(listed.out.find("two-region") != std::string::npos);
    const Run bad = cli({"validate", "--preset", "no-such-preset"});
    CHECK(bad.code == 1);
    CHECK(!bad.err.empty());
    CHECK(cli({"validate"}).code == 1);
    CHECK(cli({"simulate", "--preset", "single-polynomial", "--paths", "zero"}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
}

TEST_CASE("broken config file reports the field")
{
    const fs::path dir = scratch("config");
    const Run exported = cli({"export-preset", "single-polynomial"});
    REQUIRE(exported.code == 0);
    std::string text = exported.out;
    text.replace(text.find("\"sigma\""), 7, "\"sigmaa\"");
    mfdrift::write_text_file((dir / "bad.json").string(), text);
    const Run r = cli({"validate", "--config", (dir / "bad.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("/regions/0/sigmaa") != std::string::npos);
}

TEST_CASE("simulate twice gives identical files")
{
    const fs::path a = scratch("sim_a");
    const fs::path b = scratch("sim_b");
    for (const auto& dir : {a, b}) {
        REQUIRE(cli({"simulate", "--preset", "single-polynomial", "--paths", "8", "--horizon", "600",
                     "--seed", "42", "--out-dir", dir.string()})
                    .code == 0);
        REQUIRE(cli({"analyze", "--in-dir", dir.string()}).code == 0);
    }
    const auto fa = directory_contents(a);
    const auto fb = directory_contents(b);
    CHECK(fa.count("paths.csv") == 1);
    CHECK(fa.count("summary.json") == 1);
    CHECK(fa.count("analysis.json") == 1);
    CHECK(fa == fb);
}

TEST_CASE("numerical and domain failures exit with 2")
{
    const fs::path dir = scratch("fpe");
    CHECK(cli({"fpe", "--preset", "single-polynomial", "--n", "2000", "--dt-pde", "100", "--out-dir",
               dir.string()})
              .code == 2);
    CHECK(cli({"fpe", "--preset", "single-polynomial", "--n", "2000", "--times", "10,20",
               "--cells", "64", "--out-dir", dir.string()})
              .code == 0);
    CHECK(fs::exists(dir / "density.csv"));
}

TEST_CASE("stability writes a report")
{
    const fs::path dir = scratch("stability");
    const Run r = cli({"stability", "--preset", "single-polynomial", "--q", "2", "--n-points", "10",
                       "--z-points", "10", "--buf-points", "3", "--out-dir", dir.string()});
    CHECK(r.code == 0);
    const auto report = nlohmann::json::parse(mfdrift::read_text_file((dir / "stability.json").string()));
    CHECK(report.contains("equilibria"));
}
